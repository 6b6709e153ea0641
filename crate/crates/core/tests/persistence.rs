mod common;

use facetopo_core::geometry::{point_distance_matrix, DistanceMatrix};
use facetopo_core::landmarks::{FacialPose, FeatureSubset, LandmarkConnectivity, Region};
use facetopo_core::matrix::SymmetricMatrix;
use facetopo_core::metrics::bottleneck_distance;
use facetopo_core::persistence::{
    build_rips_filtration, compute_persistence, diagram_for_pose, rips_persistence, Mode, PersistenceDiagram,
};
use facetopo_core::synthetic::{face_points, MOUTH_MAX_HALF_HEIGHT};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn explicit(dm: &DistanceMatrix) -> PersistenceDiagram {
    compute_persistence(&build_rips_filtration(dm, Mode::Metric))
}

/// Random matrix whose entries come from a handful of values, so ties are
/// everywhere.
fn tied_matrix(rng: &mut impl Rng, n: usize) -> DistanceMatrix {
    let m = SymmetricMatrix::from_upper(n, |_, _| rng.random_range(1..5) as f64).unwrap();
    DistanceMatrix::nonmetric(m)
}

#[test]
fn fast_route_matches_explicit_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..150 {
        let n = rng.random_range(1..14);
        let dm = if trial % 2 == 0 {
            tied_matrix(&mut rng, n)
        } else {
            point_distance_matrix(&common::random_cloud(&mut rng, n)).unwrap()
        };
        let slow = explicit(&dm);
        assert_eq!(rips_persistence(&dm, true), slow, "trial {trial}, n = {n}");
        let no_gen = rips_persistence(&dm, false);
        assert_eq!(no_gen.pairs(0), slow.pairs(0));
        assert_eq!(no_gen.pairs(1), slow.pairs(1));
    }
}

#[test]
fn h0_deaths_are_mst_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let pts = common::random_cloud(&mut rng, 25);
        let dm = point_distance_matrix(&pts).unwrap();
        let mut deaths: Vec<f64> = rips_persistence(&dm, false)
            .dimension(0)
            .filter(|p| !p.is_essential())
            .map(|p| p.death)
            .collect();
        deaths.sort_by(f64::total_cmp);
        let mst = common::mst_weights(pts.len(), |i, j| dm.get(i, j));
        assert_eq!(deaths.len(), mst.len());
        for (a, b) in deaths.iter().zip(&mst) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}

#[test]
fn pairing_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [2usize, 3, 7, 20, 40] {
        let dm = point_distance_matrix(&common::random_cloud(&mut rng, n)).unwrap();
        let d = rips_persistence(&dm, false);
        assert_eq!(d.dimension(0).count(), n);
        assert_eq!(d.dimension(0).filter(|p| p.is_essential()).count(), 1);
        // Every edge outside the spanning tree creates a class that some triangle kills.
        assert_eq!(d.dimension(1).count(), n * (n - 1) / 2 - (n - 1));
        assert!(d.dimension(1).all(|p| !p.is_essential()));
    }
}

#[test]
fn representative_cycles_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let n = 30;
        let dm = point_distance_matrix(&common::random_cloud(&mut rng, n)).unwrap();
        for p in rips_persistence(&dm, true).dimension(1) {
            assert!(!p.generator.is_empty());
            assert!(common::odd_vertices(&p.generator).is_empty(), "{:?}", p.generator);
            for e in &p.generator {
                assert!(dm.get(e[0] as usize, e[1] as usize) <= p.birth);
            }
            assert!(p.generator.iter().any(|e| dm.get(e[0] as usize, e[1] as usize) == p.birth));
        }
    }
}

#[test]
fn unit_square_fixture() {
    let dm = point_distance_matrix(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
    let d = rips_persistence(&dm, true);
    let h1: Vec<_> = d.dimension(1).filter(|p| p.persistence() > 0.0).collect();
    assert_eq!(h1.len(), 1);
    assert!((h1[0].birth - 1.0).abs() < 1e-9 && (h1[0].death - 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(h1[0].generator.len(), 4);
    let finite: Vec<f64> = d.dimension(0).filter(|p| !p.is_essential()).map(|p| p.death).collect();
    assert_eq!(finite, vec![1.0, 1.0, 1.0]);
}

/// Shifting every coordinate by δ moves a 3D point by √3·δ, so a pair pushed
/// apart along the diagonal changes its H0 death by 2√3·δ. Stability in
/// terms of coordinate shifts is therefore only 2√3·δ, not 2δ.
#[test]
fn coordinate_shifts_can_exceed_twice_delta() {
    let delta = 0.01;
    let u = 1.0 / 3f64.sqrt();
    let a = point_distance_matrix(&[[0.0; 3], [u, u, u]]).unwrap();
    let b = point_distance_matrix(&[[-delta; 3], [u + delta, u + delta, u + delta]]).unwrap();
    let (da, db) = (rips_persistence(&a, false), rips_persistence(&b, false));
    let d = bottleneck_distance(&da.pairs(0), &db.pairs(0), 0).unwrap();
    assert!((d - 2.0 * 3f64.sqrt() * delta).abs() < 1e-12, "{d}");
    assert!(d > 2.0 * delta);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bottleneck_stability(seed in any::<u64>(), n in 3usize..12, delta in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = SymmetricMatrix::from_upper(n, |_, _| rng.random_range(0.5..3.0)).unwrap();
        let moved = SymmetricMatrix::from_upper(n, |i, j| base.get(i, j) + rng.random_range(-delta..=delta)).unwrap();
        let sup = base.sup_distance(&moved).unwrap();
        let a = rips_persistence(&DistanceMatrix::nonmetric(base), false);
        let b = rips_persistence(&DistanceMatrix::nonmetric(moved), false);
        for dim in [0u8, 1] {
            let d = bottleneck_distance(&a.pairs(dim), &b.pairs(dim), dim).unwrap();
            prop_assert!(d <= sup + 1e-12, "dim {} bottleneck {} > {}", dim, d, sup);
        }
    }

    #[test]
    fn scale_equivariance(seed in any::<u64>(), n in 2usize..15, c in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dm = point_distance_matrix(&common::random_cloud(&mut rng, n)).unwrap();
        let scaled = DistanceMatrix::nonmetric(dm.matrix().scaled(c).unwrap());
        let (a, b) = (rips_persistence(&dm, false), rips_persistence(&scaled, false));
        prop_assert_eq!(a.points.len(), b.points.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            prop_assert!((p.birth * c - q.birth).abs() <= 1e-9 * c.max(1.0));
            if p.is_essential() {
                prop_assert!(q.is_essential());
            } else {
                prop_assert!((p.death * c - q.death).abs() <= 1e-9 * c.max(1.0));
            }
        }
    }
}

fn pose(openness: f64) -> FacialPose {
    FacialPose::new(0, face_points(openness, 0.0)).unwrap()
}

#[test]
fn pose_diagrams_are_deterministic() {
    let conn = LandmarkConnectivity::default_face();
    let p = pose(0.5);
    let a = diagram_for_pose(&p, &conn, &FeatureSubset::full(), Mode::Metric).unwrap();
    let b = diagram_for_pose(&p, &conn, &FeatureSubset::full(), Mode::Metric).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mouth_ring_has_one_dominant_loop() {
    let conn = LandmarkConnectivity::default_face();
    let mouth = FeatureSubset::new([Region::Mouth]).unwrap();
    for mode in Mode::ALL {
        let d = diagram_for_pose(&pose(1.0), &conn, &mouth, mode).unwrap();
        // The smaller semi-axis of the fully open mouth.
        let radius = MOUTH_MAX_HALF_HEIGHT;
        let big: Vec<_> = d.dimension(1).filter(|p| p.persistence() > 0.5 * radius).collect();
        assert_eq!(big.len(), 1, "{mode}: {:?}", d.pairs(1));
        // Generators refer to original landmark / edge indices.
        let bound = if mode == Mode::Metric { 83 } else { conn.edges().len() as u32 };
        assert!(big[0].generator.iter().flatten().all(|&v| v < bound));
        if mode == Mode::Metric {
            assert!(big[0].generator.iter().flatten().all(|&v| (48..68).contains(&v)));
        }
    }
}

#[test]
fn nonmetric_face_has_fewer_components() {
    let conn = LandmarkConnectivity::default_face();
    let p = pose(0.6);
    let metric = diagram_for_pose(&p, &conn, &FeatureSubset::full(), Mode::Metric).unwrap();
    let nonmetric = diagram_for_pose(&p, &conn, &FeatureSubset::full(), Mode::Nonmetric).unwrap();
    assert!(nonmetric.counts_above(0.0).h1 >= 1);
    assert!(nonmetric.counts_above(0.0).h0 <= metric.counts_above(0.0).h0);
}

//! Distance kernels over landmark points and landmark edges.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::landmarks::Point3;
use crate::matrix::SymmetricMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metricity {
    Metric,
    Nonmetric,
}

/// Pairwise distances in millimeters, tagged with whether the triangle
/// inequality is guaranteed.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    matrix: SymmetricMatrix,
    metricity: Metricity,
}

/// Exhaustive triangle-inequality check up to this size, sampled beyond.
const EXHAUSTIVE_TRIANGLE_CHECK: usize = 64;
const SAMPLED_TRIPLES: usize = 20_000;

impl DistanceMatrix {
    pub fn new(matrix: SymmetricMatrix, metricity: Metricity) -> Result<Self> {
        if metricity == Metricity::Metric {
            check_triangle_inequality(&matrix)?;
        }
        Ok(Self { matrix, metricity })
    }

    pub fn nonmetric(matrix: SymmetricMatrix) -> Self {
        Self {
            matrix,
            metricity: Metricity::Nonmetric,
        }
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn metricity(&self) -> Metricity {
        self.metricity
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }
}

fn check_triangle_inequality(m: &SymmetricMatrix) -> Result<()> {
    let n = m.len();
    let tol = 1e-9 * m.max_value().max(1.0);
    let violates = |i: usize, j: usize, k: usize| m.get(i, k) > m.get(i, j) + m.get(j, k) + tol;
    let fail = |i, j, k| Err(Error::Validation(format!("triangle inequality fails on ({i}, {j}, {k})")));
    if n <= EXHAUSTIVE_TRIANGLE_CHECK {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if violates(i, j, k) {
                        return fail(i, j, k);
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..SAMPLED_TRIPLES {
            let (i, j, k) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            if violates(i, j, k) {
                return fail(i, j, k);
            }
        }
    }
    Ok(())
}

#[inline]
fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn euclidean(a: Point3, b: Point3) -> f64 {
    let d = sub(a, b);
    dot(d, d).sqrt()
}

fn validate_points(points: &[Point3]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Validation("distance matrix needs at least one point".into()));
    }
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Validation("non-finite coordinate".into()));
    }
    Ok(())
}

/// Fills the strict upper triangle in parallel, one row per task. Each entry
/// is computed by the same scalar code regardless of scheduling.
fn parallel_upper(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> SymmetricMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect())
        .collect();
    SymmetricMatrix::from_upper(n, |i, j| rows[i][j - i - 1]).expect("distances are finite and symmetric")
}

pub fn point_distance_matrix(points: &[Point3]) -> Result<DistanceMatrix> {
    validate_points(points)?;
    let matrix = parallel_upper(points.len(), |i, j| euclidean(points[i], points[j]));
    DistanceMatrix::new(matrix, Metricity::Metric)
}

/// Squared length below which a segment is treated as a point.
const DEGENERATE_SQ: f64 = 1e-24;
/// Relative threshold on `a*e - b^2` below which segments count as parallel.
const PARALLEL_REL: f64 = 1e-12;

/// Minimum Euclidean distance between segments `[a0, a1]` and `[b0, b1]`,
/// by the clamped closed-form solution over `s, t in [0, 1]`.
pub fn segment_segment_distance(a0: Point3, a1: Point3, b0: Point3, b1: Point3) -> f64 {
    let d1 = sub(a1, a0);
    let d2 = sub(b1, b0);
    let r = sub(a0, b0);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let f = dot(d2, r);

    let (s, t);
    if a <= DEGENERATE_SQ && e <= DEGENERATE_SQ {
        return euclidean(a0, b0);
    } else if a <= DEGENERATE_SQ {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(d1, r);
        if e <= DEGENERATE_SQ {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(d1, d2);
            let denom = a * e - b * b;
            let s0 = if denom > PARALLEL_REL * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    let p = [a0[0] + d1[0] * s, a0[1] + d1[1] * s, a0[2] + d1[2] * s];
    let q = [b0[0] + d2[0] * t, b0[1] + d2[1] * t, b0[2] + d2[2] * t];
    euclidean(p, q)
}

/// Segment-segment distances between the given edges. Adjacent edges are at
/// distance zero, so the result is generally not a metric.
pub fn edge_distance_matrix(points: &[Point3], edges: &[(usize, usize)]) -> Result<DistanceMatrix> {
    validate_points(points)?;
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= points.len() || b >= points.len()) {
        return Err(Error::Validation(format!(
            "edge ({a}, {b}) out of range for {} points",
            points.len()
        )));
    }
    if edges.is_empty() {
        return Err(Error::Validation("edge distance matrix needs at least one edge".into()));
    }
    let segs: Vec<(Point3, Point3)> = edges.iter().map(|&(a, b)| (points[a], points[b])).collect();
    let matrix = parallel_upper(segs.len(), |i, j| {
        segment_segment_distance(segs[i].0, segs[i].1, segs[j].0, segs[j].1)
    });
    Ok(DistanceMatrix::nonmetric(matrix))
}

/// Interpolates every edge so consecutive samples are at most `epsilon`
/// apart: an edge of length `L` gets `ceil(L / epsilon)` uniform intervals.
/// Endpoints shared between edges appear once (exact coordinate equality).
pub fn supersample(points: &[Point3], edges: &[(usize, usize)], epsilon: f64) -> Result<Vec<Point3>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon {epsilon} must be positive")));
    }
    let mut seen: HashSet<[u64; 3]> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |p: Point3| {
        // -0.0 and 0.0 are the same coordinate.
        let key = p.map(|c| (c + 0.0).to_bits());
        if seen.insert(key) {
            out.push(p);
        }
    };
    for &(a, b) in edges {
        let (pa, pb) = (
            *points.get(a).ok_or_else(|| Error::Validation(format!("edge endpoint {a} out of range")))?,
            *points.get(b).ok_or_else(|| Error::Validation(format!("edge endpoint {b} out of range")))?,
        );
        let len = euclidean(pa, pb);
        // Tolerate rounding so that e.g. 8 / 2 yields 4 intervals, not 5.
        let intervals = ((len / epsilon) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        push(pa);
        let d = sub(pb, pa);
        for m in 1..intervals {
            let s = m as f64 / intervals as f64;
            push([pa[0] + d[0] * s, pa[1] + d[1] * s, pa[2] + d[2] * s]);
        }
        push(pb);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn three_four_five() {
        let dm = point_distance_matrix(&[[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]]).unwrap();
        assert_eq!(dm.get(0, 1), 5.0);
        assert_eq!(dm.metricity(), Metricity::Metric);
        let one = point_distance_matrix(&[[1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(one.matrix().values(), &[0.0]);
    }

    #[test]
    fn random_points_are_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point3> = (0..10)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let dm = point_distance_matrix(&pts).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    assert!(dm.get(i, k) <= dm.get(i, j) + dm.get(j, k) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn metric_flag_rejects_violations() {
        let m = SymmetricMatrix::from_upper(3, |i, j| if (i, j) == (0, 2) { 5.0 } else { 1.0 }).unwrap();
        assert!(DistanceMatrix::new(m, Metricity::Metric).is_err());
    }

    #[test]
    fn segment_cases() {
        let d = segment_segment_distance([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-15);
        let d = segment_segment_distance([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 1.0, 0.0]);
        assert_eq!(d, 0.0);
        let d = segment_segment_distance([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 1.0]);
        assert!((d - 1.0).abs() < 1e-15);
        // collinear, disjoint
        let d = segment_segment_distance([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0], [5.0, 0.0, 0.0]);
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn skew_segments_agree_with_grid_search() {
        let (a0, a1, b0, b1) = ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 1.0]);
        let steps = 10_000;
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            let p = [i as f64 / steps as f64, 0.0, 0.0];
            for j in 0..=steps {
                best = best.min(euclidean(p, [0.0, j as f64 / steps as f64, 1.0]));
            }
        }
        let d = segment_segment_distance(a0, a1, b0, b1);
        assert!((d - best).abs() < 1e-3);
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shared_endpoint_edges_have_zero_distance() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let dm = edge_distance_matrix(&pts, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(dm.get(0, 1), 0.0);
        assert_eq!(dm.get(0, 2), 1.0);
        assert_eq!(dm.get(1, 3), 1.0);
        assert_eq!(dm.metricity(), Metricity::Nonmetric);
    }

    #[test]
    fn supersample_counts() {
        let pts = [[0.0, 0.0, 0.0], [8.0, 0.0, 0.0]];
        assert_eq!(supersample(&pts, &[(0, 1)], 8.0).unwrap().len(), 2);
        let s = supersample(&pts, &[(0, 1)], 2.0).unwrap();
        assert_eq!(s.len(), 5);
        for w in s.windows(2) {
            assert!((euclidean(w[0], w[1]) - 2.0).abs() < 1e-12);
        }
        assert!(supersample(&pts, &[(0, 1)], 0.0).is_err());
    }

    #[test]
    fn supersampled_square_ring() {
        let pts = [[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [4.0, 4.0, 0.0], [0.0, 4.0, 0.0]];
        let s = supersample(&pts, &[(0, 1), (1, 2), (2, 3), (3, 0)], 1.0).unwrap();
        assert_eq!(s.len(), 16);
        // Walk the perimeter in order: sort by perimeter coordinate.
        let perim = |p: &Point3| {
            let (x, y) = (p[0], p[1]);
            if y == 0.0 {
                x
            } else if x == 4.0 {
                4.0 + y
            } else if y == 4.0 {
                8.0 + (4.0 - x)
            } else {
                12.0 + (4.0 - y)
            }
        };
        let mut along: Vec<f64> = s.iter().map(perim).collect();
        along.sort_by(f64::total_cmp);
        along.push(16.0);
        for w in along.windows(2) {
            assert!(w[1] - w[0] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn degenerate_edges_are_points() {
        let p = [1.0, 2.0, 3.0];
        let d = segment_segment_distance(p, p, [4.0, 6.0, 3.0], [4.0, 6.0, 3.0]);
        assert_eq!(d, 5.0);
        let d = segment_segment_distance(p, p, [0.0, 0.0, 3.0], [10.0, 0.0, 3.0]);
        assert_eq!(d, 2.0);
    }

    fn point() -> impl Strategy<Value = Point3> {
        prop::array::uniform3(-10.0f64..10.0)
    }

    /// Ternary search over `s` of the exact point-to-segment distance; the
    /// outer function is convex in `s`.
    fn brute_force(a0: Point3, a1: Point3, b0: Point3, b1: Point3) -> f64 {
        let to_b = |s: f64| {
            let p = [a0[0] + (a1[0] - a0[0]) * s, a0[1] + (a1[1] - a0[1]) * s, a0[2] + (a1[2] - a0[2]) * s];
            let d = [b1[0] - b0[0], b1[1] - b0[1], b1[2] - b0[2]];
            let len2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((p[0] - b0[0]) * d[0] + (p[1] - b0[1]) * d[1] + (p[2] - b0[2]) * d[2]) / len2).clamp(0.0, 1.0)
            };
            euclidean(p, [b0[0] + d[0] * t, b0[1] + d[1] * t, b0[2] + d[2] * t])
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if to_b(m1) <= to_b(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        to_b((lo + hi) / 2.0).min(to_b(0.0)).min(to_b(1.0))
    }

    proptest! {
        #[test]
        fn segment_distance_properties(a0 in point(), a1 in point(), b0 in point(), b1 in point(),
                                       shift in point(), scale in 0.1f64..10.0) {
            let d = segment_segment_distance(a0, a1, b0, b1);
            prop_assert!(d >= 0.0);
            prop_assert!((d - segment_segment_distance(b0, b1, a0, a1)).abs() < 1e-9);
            prop_assert!((d - segment_segment_distance(a1, a0, b1, b0)).abs() < 1e-9);
            let endpoint_min = [euclidean(a0, b0), euclidean(a0, b1), euclidean(a1, b0), euclidean(a1, b1)]
                .into_iter().fold(f64::INFINITY, f64::min);
            prop_assert!(d <= endpoint_min + 1e-12);
            let mv = |p: Point3| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]];
            prop_assert!((d - segment_segment_distance(mv(a0), mv(a1), mv(b0), mv(b1))).abs() < 1e-9);
            let sc = |p: Point3| p.map(|c| c * scale);
            prop_assert!((d * scale - segment_segment_distance(sc(a0), sc(a1), sc(b0), sc(b1))).abs() < 1e-8 * scale.max(1.0));
            // rotation about z by 90 degrees
            let rot = |p: Point3| [-p[1], p[0], p[2]];
            prop_assert!((d - segment_segment_distance(rot(a0), rot(a1), rot(b0), rot(b1))).abs() < 1e-9);
            prop_assert!((d - brute_force(a0, a1, b0, b1)).abs() < 1e-6);
        }

        #[test]
        fn edge_matrix_is_symmetric(pts in prop::collection::vec(point(), 4..12)) {
            let edges: Vec<_> = (0..pts.len() - 1).map(|i| (i, i + 1)).collect();
            let dm = edge_distance_matrix(&pts, &edges).unwrap();
            for i in 0..edges.len() {
                prop_assert_eq!(dm.get(i, i), 0.0);
                for j in 0..edges.len() {
                    prop_assert_eq!(dm.get(i, j), dm.get(j, i));
                }
            }
        }

        #[test]
        fn supersample_count_scales_with_length(len in 1.0f64..50.0, eps in 0.1f64..5.0) {
            let pts = [[0.0, 0.0, 0.0], [len, 0.0, 0.0]];
            let n = supersample(&pts, &[(0, 1)], eps).unwrap().len();
            let expected = (len / eps).ceil() as usize + 1;
            prop_assert!(n == expected || n + 1 == expected);
        }
    }
}

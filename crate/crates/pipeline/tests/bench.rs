use facetopo_core::landmarks::{FacialPose, FeatureSubset, LandmarkConnectivity};
use facetopo_core::persistence::{diagram_for_pose, Mode};
use facetopo_core::synthetic::{face_points, generate_synthetic, Motion, SyntheticSpec};
use facetopo_pipeline::{benchmark, compare_supersampling, match_prominent_features, min_edge_length, supersampled_diagram};

#[test]
fn benchmark_table_shape() {
    let seq = generate_synthetic(&SyntheticSpec::new(8, Motion::EyeBlink, 0.5).with_seed(3)).unwrap();
    let conn = LandmarkConnectivity::default_face();
    let a = benchmark(&seq, &conn, &FeatureSubset::full()).unwrap();
    let b = benchmark(&seq, &conn, &FeatureSubset::full()).unwrap();
    assert_eq!(a.rows.len(), 2);
    assert_eq!(a.rows[0].mode, Mode::Metric);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!(x.persistence_seconds > 0.0 && x.bottleneck_seconds > 0.0 && x.wasserstein_seconds > 0.0);
        assert_eq!((x.mean_h0, x.mean_h1, x.mean_h0_raw, x.mean_h1_raw), (y.mean_h0, y.mean_h1, y.mean_h0_raw, y.mean_h1_raw));
    }
    assert!(a.rows[1].mean_h0_raw + a.rows[1].mean_h1_raw < a.rows[0].mean_h0_raw + a.rows[0].mean_h1_raw);
}

#[test]
fn supersampling_grows_with_resolution() {
    let pose = FacialPose::new(0, face_points(0.7, 0.2)).unwrap();
    let conn = LandmarkConnectivity::default_face();
    let report = compare_supersampling(&pose, &conn, &FeatureSubset::full(), &[8.0, 4.0, 2.0, 1.0]).unwrap();
    for w in report.rows.windows(2) {
        assert!(w[1].points > w[0].points);
        assert!(w[1].raw_features >= w[0].raw_features);
    }
    assert_eq!(report.rows.last().unwrap().bottleneck_to_finest, 0.0);
    assert!(report.nonmetric.raw_features < report.rows.last().unwrap().raw_features);
    assert!(compare_supersampling(&pose, &conn, &FeatureSubset::full(), &[1.0, 2.0]).is_err());
}

#[test]
fn mouth_loop_survives_supersampling() {
    let pose = FacialPose::new(0, face_points(1.0, 0.0)).unwrap();
    let conn = LandmarkConnectivity::default_face();
    let mouth = FeatureSubset::preset("mouth+nose").unwrap();
    let eps = 0.25 * min_edge_length(&pose, &conn, &mouth).unwrap();
    let (_, ss) = supersampled_diagram(&pose, &conn, &mouth, eps).unwrap();
    let nm = diagram_for_pose(&pose, &conn, &mouth, Mode::Nonmetric).unwrap();
    let m = match_prominent_features(&ss.pairs(1), &nm.pairs(1), 5.0 * eps, 2.0 * eps);
    assert!(m.prominent >= 1);
    assert!(m.complete(), "{m:?} at eps {eps}");
}

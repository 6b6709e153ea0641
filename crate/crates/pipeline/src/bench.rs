//! Metric vs non-metric cost and feature-count comparison, and the
//! supersampling study.

use std::time::Instant;

use facetopo_core::geometry::{edge_distance_matrix, euclidean, point_distance_matrix, supersample};
use facetopo_core::landmarks::{select_subset, FacialPose, FeatureSubset, LandmarkConnectivity, LandmarkSequence};
use facetopo_core::metrics::matching::maximum_matching;
use facetopo_core::metrics::{bottleneck_distance, dissimilarity_matrix, DistanceKind, FrameDiagrams, Pair};
use facetopo_core::persistence::{diagram_for_pose, rips_persistence, Mode, PersistenceDiagram};
use facetopo_core::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One row of the timing table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub mode: Mode,
    pub persistence_seconds: f64,
    pub bottleneck_seconds: f64,
    pub wasserstein_seconds: f64,
    /// Mean per-frame counts of positive-persistence features.
    pub mean_h0: f64,
    pub mean_h1: f64,
    /// Mean per-frame counts including zero-persistence pairs.
    pub mean_h0_raw: f64,
    pub mean_h1_raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub frames: usize,
    pub subset: String,
    pub rows: Vec<BenchRow>,
}

pub fn benchmark(seq: &LandmarkSequence, conn: &LandmarkConnectivity, subset: &FeatureSubset) -> Result<BenchReport> {
    let mut rows = Vec::new();
    for mode in Mode::ALL {
        let start = Instant::now();
        let diagrams = seq
            .frames()
            .par_iter()
            .map(|p| diagram_for_pose(p, conn, subset, mode))
            .collect::<Result<Vec<_>>>()?;
        let persistence_seconds = start.elapsed().as_secs_f64();

        let frames: Vec<FrameDiagrams> = diagrams.iter().map(FrameDiagrams::from).collect();
        let mut seconds = [0.0; 2];
        for (slot, kind) in seconds.iter_mut().zip(DistanceKind::ALL) {
            let start = Instant::now();
            dissimilarity_matrix(&frames, seq.frame_ids(), kind, None)?;
            *slot = start.elapsed().as_secs_f64();
        }

        let n = diagrams.len() as f64;
        let mean = |f: &dyn Fn(&PersistenceDiagram) -> usize| diagrams.iter().map(f).sum::<usize>() as f64 / n;
        rows.push(BenchRow {
            mode,
            persistence_seconds,
            bottleneck_seconds: seconds[0],
            wasserstein_seconds: seconds[1],
            mean_h0: mean(&|d| d.counts_above(0.0).h0),
            mean_h1: mean(&|d| d.counts_above(0.0).h1),
            mean_h0_raw: mean(&|d| d.raw_counts().h0),
            mean_h1_raw: mean(&|d| d.raw_counts().h1),
        });
    }
    Ok(BenchReport {
        frames: seq.frames().len(),
        subset: subset.name(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupersampleRow {
    pub epsilon: f64,
    pub points: usize,
    pub seconds: f64,
    pub raw_features: usize,
    pub positive_h0: usize,
    pub positive_h1: usize,
    /// H1 bottleneck distance to the smallest-ε diagram.
    pub bottleneck_to_finest: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonmetricRow {
    pub segments: usize,
    pub seconds: f64,
    pub raw_features: usize,
    pub positive_h0: usize,
    pub positive_h1: usize,
    pub bottleneck_to_finest: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupersampleReport {
    pub subset: String,
    pub rows: Vec<SupersampleRow>,
    pub nonmetric: NonmetricRow,
}

/// Shortest connectivity edge of the selection with non-zero length.
pub fn min_edge_length(pose: &FacialPose, conn: &LandmarkConnectivity, subset: &FeatureSubset) -> Result<f64> {
    let sel = select_subset(pose, conn, subset)?;
    sel.edges
        .iter()
        .map(|&(a, b)| euclidean(sel.points[a], sel.points[b]))
        .filter(|&l| l > 0.0)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::EmptySelection(format!("{} has no non-degenerate edges", subset.name())))
}

/// Diagram of the point cloud obtained by sampling every selected edge at
/// spacing at most `epsilon`.
pub fn supersampled_diagram(
    pose: &FacialPose,
    conn: &LandmarkConnectivity,
    subset: &FeatureSubset,
    epsilon: f64,
) -> Result<(usize, PersistenceDiagram)> {
    let sel = select_subset(pose, conn, subset)?;
    let cloud = supersample(&sel.points, &sel.edges, epsilon)?;
    let dm = point_distance_matrix(&cloud)?;
    Ok((cloud.len(), rips_persistence(&dm, false)))
}

/// Runs the supersampled point-cloud filtration for each `epsilon` (which
/// must be positive and strictly decreasing) and the non-metric filtration
/// on the same pose.
pub fn compare_supersampling(
    pose: &FacialPose,
    conn: &LandmarkConnectivity,
    subset: &FeatureSubset,
    epsilons: &[f64],
) -> Result<SupersampleReport> {
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Parameter("epsilons must be a non-empty list of positive values".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("epsilons must be strictly decreasing".into()));
    }

    let mut computed = Vec::new();
    for &eps in epsilons {
        let start = Instant::now();
        let (points, dgm) = supersampled_diagram(pose, conn, subset, eps)?;
        computed.push((eps, points, start.elapsed().as_secs_f64(), dgm));
    }
    let finest = computed.last().expect("non-empty").3.pairs(1);

    let rows = computed
        .iter()
        .map(|(eps, points, seconds, dgm)| {
            Ok(SupersampleRow {
                epsilon: *eps,
                points: *points,
                seconds: *seconds,
                raw_features: dgm.raw_counts().total(),
                positive_h0: dgm.counts_above(0.0).h0,
                positive_h1: dgm.counts_above(0.0).h1,
                bottleneck_to_finest: bottleneck_distance(&dgm.pairs(1), &finest, 1)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let sel = select_subset(pose, conn, subset)?;
    let start = Instant::now();
    let nm = rips_persistence(&edge_distance_matrix(&sel.points, &sel.edges)?, false);
    let seconds = start.elapsed().as_secs_f64();
    Ok(SupersampleReport {
        subset: subset.name(),
        rows,
        nonmetric: NonmetricRow {
            segments: sel.edges.len(),
            seconds,
            raw_features: nm.raw_counts().total(),
            positive_h0: nm.counts_above(0.0).h0,
            positive_h1: nm.counts_above(0.0).h1,
            bottleneck_to_finest: bottleneck_distance(&nm.pairs(1), &finest, 1)?,
        },
    })
}

/// Result of matching the prominent features of a reference diagram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatch {
    /// Reference features with persistence above the threshold.
    pub prominent: usize,
    /// How many of them found a distinct partner within the cost bound.
    pub matched: usize,
}

impl FeatureMatch {
    pub fn complete(&self) -> bool {
        self.matched == self.prominent
    }
}

/// Matches every `reference` point with persistence above `min_persistence`
/// to a distinct `candidate` point at L∞ distance at most `max_cost`.
pub fn match_prominent_features(
    reference: &[Pair],
    candidates: &[Pair],
    min_persistence: f64,
    max_cost: f64,
) -> FeatureMatch {
    let prominent: Vec<Pair> = reference
        .iter()
        .copied()
        .filter(|&(b, d)| d.is_finite() && d - b > min_persistence)
        .collect();
    let finite: Vec<Pair> = candidates.iter().copied().filter(|p| p.1.is_finite()).collect();
    let adj: Vec<Vec<usize>> = prominent
        .iter()
        .map(|&(b, d)| {
            (0..finite.len())
                .filter(|&j| (finite[j].0 - b).abs().max((finite[j].1 - d).abs()) <= max_cost)
                .collect()
        })
        .collect();
    FeatureMatch {
        prominent: prominent.len(),
        matched: maximum_matching(&adj, finite.len()),
    }
}

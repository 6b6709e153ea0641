//! Rips persistence (H0, H1) of landmark point clouds and edge sets.

mod column;
mod diagram;
mod filtration;
mod reduction;
mod rips;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use diagram::{DiagramRecord, FeatureCounts, PersistenceDiagram, PersistencePoint, PointRecord};
pub use filtration::{build_rips_filtration, Filtration, Simplex};
pub use reduction::compute_persistence;
pub use rips::rips_persistence;

use crate::error::{Error, Result};
use crate::geometry::{edge_distance_matrix, point_distance_matrix};
use crate::landmarks::{select_subset, FacialPose, FeatureSubset, LandmarkConnectivity};

/// Metric: landmarks are the vertices. Non-metric: connectivity segments are
/// the vertices, at segment-segment distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Metric,
    Nonmetric,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Metric, Mode::Nonmetric];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Metric => "metric",
            Mode::Nonmetric => "nonmetric",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "metric" => Ok(Mode::Metric),
            "nonmetric" => Ok(Mode::Nonmetric),
            _ => Err(Error::Parameter(format!("unknown mode '{s}' (expected metric or nonmetric)"))),
        }
    }
}

/// Diagram of one pose restricted to `subset`.
///
/// Generator endpoints refer to original landmark indices in metric mode and
/// to original connectivity edge indices in non-metric mode.
pub fn diagram_for_pose(
    pose: &FacialPose,
    conn: &LandmarkConnectivity,
    subset: &FeatureSubset,
    mode: Mode,
) -> Result<PersistenceDiagram> {
    let sel = select_subset(pose, conn, subset)?;
    let (dm, index) = match mode {
        Mode::Metric => (point_distance_matrix(&sel.points)?, sel.landmark_indices),
        Mode::Nonmetric => {
            if sel.edges.is_empty() {
                return Err(Error::EmptySelection(format!("{} has no connectivity edges", subset.name())));
            }
            (edge_distance_matrix(&sel.points, &sel.edges)?, sel.edge_indices)
        }
    };
    let mut dgm = rips_persistence(&dm, true);
    dgm.map_generators(|v| index[v as usize] as u32);
    Ok(dgm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert_eq!("Non-Metric".parse::<Mode>().unwrap(), Mode::Nonmetric);
        assert!("euclid".parse::<Mode>().is_err());
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{combined_distance, DistanceKind, Pair};
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;
use crate::persistence::{Mode, PersistenceDiagram};

/// H0 and H1 pairs of one frame, as fed to the distance solvers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameDiagrams {
    pub h0: Vec<Pair>,
    pub h1: Vec<Pair>,
}

impl From<&PersistenceDiagram> for FrameDiagrams {
    fn from(d: &PersistenceDiagram) -> Self {
        Self {
            h0: d.pairs(0),
            h1: d.pairs(1),
        }
    }
}

/// Which diagrams a matrix was computed from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub mode: Mode,
    pub subset: Vec<String>,
}

/// Pairwise combined distances over the frames of a sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct PoseDissimilarityMatrix {
    pub ids: Vec<u32>,
    pub kind: DistanceKind,
    pub provenance: Option<Provenance>,
    pub matrix: SymmetricMatrix,
}

/// Serialized matrix: `{"ids", "kind", "values"}` with `values` the
/// row-major strict lower triangle, plus the optional provenance fields.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixRecord {
    ids: Vec<u32>,
    kind: DistanceKind,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subset: Option<Vec<String>>,
}

impl PoseDissimilarityMatrix {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn to_json_string(&self) -> String {
        let record = MatrixRecord {
            ids: self.ids.clone(),
            kind: self.kind,
            values: self.matrix.lower_triangle(),
            mode: self.provenance.as_ref().map(|p| p.mode),
            subset: self.provenance.as_ref().map(|p| p.subset.clone()),
        };
        serde_json::to_string(&record).expect("matrix record serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let r: MatrixRecord = serde_json::from_str(text)
            .map_err(|e| Error::format(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
        let matrix = SymmetricMatrix::from_lower_triangle(r.ids.len(), &r.values)?;
        let provenance = match (r.mode, r.subset) {
            (Some(mode), Some(subset)) => Some(Provenance { mode, subset }),
            (None, None) => None,
            _ => return Err(Error::Validation("matrix provenance needs both mode and subset".into())),
        };
        Ok(Self {
            ids: r.ids,
            kind: r.kind,
            provenance,
            matrix,
        })
    }
}

/// Combined distance for every unordered pair of frames, computed in
/// parallel and assembled deterministically.
pub fn dissimilarity_matrix(
    frames: &[FrameDiagrams],
    ids: Vec<u32>,
    kind: DistanceKind,
    provenance: Option<Provenance>,
) -> Result<PoseDissimilarityMatrix> {
    let n = frames.len();
    if n < 2 {
        return Err(Error::Parameter(format!("a dissimilarity matrix needs at least 2 frames, got {n}")));
    }
    if ids.len() != n {
        return Err(Error::Validation(format!("{} frame ids for {n} frames", ids.len())));
    }
    let pairs: Vec<(usize, usize)> = (1..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let lower = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&frames[i], &frames[j]);
            combined_distance(&a.h0, &a.h1, &b.h0, &b.h1, kind)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PoseDissimilarityMatrix {
        ids,
        kind,
        provenance,
        matrix: SymmetricMatrix::from_lower_triangle(n, &lower)?,
    })
}

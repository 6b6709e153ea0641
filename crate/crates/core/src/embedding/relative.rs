use serde_json::Value;

use super::{params, Embedding, Method};
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Distance of every frame to `keyframe`: row `keyframe` of the matrix.
pub fn relative_distance(dm: &SymmetricMatrix, keyframe: usize) -> Result<Vec<f64>> {
    if keyframe >= dm.len() {
        return Err(Error::IndexOutOfRange {
            index: keyframe,
            len: dm.len(),
        });
    }
    Ok(dm.row(keyframe).to_vec())
}

pub fn relative_embedding(dm: &SymmetricMatrix, keyframe: usize) -> Result<Embedding> {
    Ok(Embedding {
        method: Method::Relative,
        params: params([("keyframe", Value::from(keyframe))]),
        fitness: None,
        coords: relative_distance(dm, keyframe)?.into_iter().map(|v| vec![v]).collect(),
    })
}

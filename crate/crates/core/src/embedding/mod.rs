//! Low-dimensional summaries of a dissimilarity matrix.

mod mds;
mod relative;
mod shepard;
mod tsne;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub use mds::classical_mds;
pub use relative::{relative_distance, relative_embedding};
pub use shepard::{shepard_fitness, ShepardFitness};
pub use tsne::{tsne, TsneParams};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Relative,
    Mds,
    Tsne,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Relative => "relative",
            Method::Mds => "mds",
            Method::Tsne => "tsne",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "").as_str() {
            "relative" => Ok(Method::Relative),
            "mds" => Ok(Method::Mds),
            "tsne" => Ok(Method::Tsne),
            _ => Err(Error::Parameter(format!("unknown embedding method '{s}' (expected relative, mds or tsne)"))),
        }
    }
}

/// Per-frame coordinates (1D for relative distance, 2D otherwise).
///
/// JSON: `{"method", "params": {...}, "fitness": f|null, "coords": [[x(,y)], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub method: Method,
    pub params: Map<String, Value>,
    pub fitness: Option<f64>,
    pub coords: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

fn params<const N: usize>(entries: [(&str, Value); N]) -> Map<String, Value> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Shepard fitness of `coords`, or `None` when it is undefined (fewer than
/// three frames).
fn fitness_of(dm: &crate::matrix::SymmetricMatrix, coords: &[Vec<f64>]) -> Option<f64> {
    (dm.len() >= 3).then(|| shepard_fitness(dm, coords).map(|f| f.value).unwrap_or(0.0))
}

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Mode;

/// One birth-death pair.
///
/// `generator` holds the merging edge for a finite H0 class (empty for the
/// essential class) and a representative cycle, as a list of edges, for an
/// H1 class. Edge endpoints are vertex indices of the filtration.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistencePoint {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
    pub generator: Vec<[u32; 2]>,
}

impl PersistencePoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    /// Born and killed at the same scale.
    pub fn is_zero_persistence(&self) -> bool {
        self.death == self.birth
    }
}

/// H0 and H1 pairs of a Rips filtration, zero-persistence pairs included.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PersistenceDiagram {
    pub points: Vec<PersistencePoint>,
    /// Largest pairwise distance, i.e. the scale at which the complex is full.
    pub max_scale: f64,
}

/// Per-dimension feature counts of a diagram.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCounts {
    pub h0: usize,
    pub h1: usize,
}

impl FeatureCounts {
    pub fn total(&self) -> usize {
        self.h0 + self.h1
    }
}

impl PersistenceDiagram {
    pub fn dimension(&self, dim: u8) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    /// `(birth, death)` pairs of one dimension; essential classes have an
    /// infinite death.
    pub fn pairs(&self, dim: u8) -> Vec<(f64, f64)> {
        self.dimension(dim).map(|p| (p.birth, p.death)).collect()
    }

    /// Counts every pair, zero-persistence ones included.
    pub fn raw_counts(&self) -> FeatureCounts {
        self.counts_where(|_| true)
    }

    /// Counts pairs whose persistence exceeds `threshold` (essential classes
    /// always count).
    pub fn counts_above(&self, threshold: f64) -> FeatureCounts {
        self.counts_where(|p| p.persistence() > threshold)
    }

    fn counts_where(&self, keep: impl Fn(&PersistencePoint) -> bool) -> FeatureCounts {
        let mut c = FeatureCounts::default();
        for p in self.points.iter().filter(|p| keep(p)) {
            match p.dim {
                0 => c.h0 += 1,
                _ => c.h1 += 1,
            }
        }
        c
    }

    /// Rewrites generator vertex indices, e.g. from subset-local to original
    /// landmark (or edge) indices.
    pub fn map_generators(&mut self, f: impl Fn(u32) -> u32) {
        for p in &mut self.points {
            for e in &mut p.generator {
                *e = [f(e[0]), f(e[1])];
            }
        }
    }

    pub fn to_record(&self, mode: Mode, subset: Vec<String>) -> DiagramRecord {
        DiagramRecord {
            mode,
            subset,
            points: self
                .points
                .iter()
                .map(|p| PointRecord {
                    b: p.birth,
                    d: p.death,
                    dim: p.dim,
                    // Zero-persistence classes carry no visible feature; their
                    // cycles are left out of the serialized form.
                    gen: if p.is_zero_persistence() { Vec::new() } else { p.generator.clone() },
                    zero: p.is_zero_persistence(),
                })
                .collect(),
            max_scale: self.max_scale,
        }
    }
}

/// Serialized diagram:
/// `{"mode", "subset", "points": [{"b", "d", "dim", "gen"}], "max_scale"}`
/// with `"d": "inf"` for essential classes and `"zero": true` marking
/// zero-persistence pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramRecord {
    pub mode: Mode,
    pub subset: Vec<String>,
    pub points: Vec<PointRecord>,
    pub max_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub b: f64,
    #[serde(serialize_with = "ser_death", deserialize_with = "de_death")]
    pub d: f64,
    pub dim: u8,
    pub gen: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub zero: bool,
}

impl DiagramRecord {
    pub fn into_diagram(self) -> PersistenceDiagram {
        PersistenceDiagram {
            points: self
                .points
                .into_iter()
                .map(|p| PersistencePoint {
                    dim: p.dim,
                    birth: p.b,
                    death: p.d,
                    generator: p.gen,
                })
                .collect(),
            max_scale: self.max_scale,
        }
    }
}

fn ser_death<S: Serializer>(d: &f64, s: S) -> Result<S::Ok, S::Error> {
    if d.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*d)
    }
}

fn de_death<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Death {
        Finite(f64),
        Text(String),
    }
    match Death::deserialize(d)? {
        Death::Finite(v) => Ok(v),
        Death::Text(t) if t == "inf" => Ok(f64::INFINITY),
        Death::Text(t) => Err(serde::de::Error::custom(format!("invalid death '{t}'"))),
    }
}

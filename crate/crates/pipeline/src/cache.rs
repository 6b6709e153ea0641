//! Content-addressed artifact store.
//!
//! ```text
//! <cache>/objects/<key>.json        payload
//! <cache>/objects/<key>.meta.json   {"stage", "created_at"}
//! <cache>/manifests/<digest>.json   per-sequence index of artifact keys
//! ```
//!
//! Keys are SHA-256 digests of a canonical JSON description of the stage,
//! its input digest and its parameters, so identical work always lands on
//! the same key regardless of run order. Every file is written to a
//! temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use facetopo_core::landmarks::Emotion;
use facetopo_core::metrics::DistanceKind;
use facetopo_core::persistence::Mode;
use facetopo_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Cache key of one stage output. `params` must serialize deterministically
/// (serde_json maps are ordered).
pub fn artifact_key(stage: &str, input: &str, params: &Value) -> String {
    let canonical = json!({"stage": stage, "input": input, "params": params});
    sha256_hex(canonical.to_string().as_bytes())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiagramEntry {
    pub mode: Mode,
    pub subset: String,
    pub key: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub mode: Mode,
    pub subset: String,
    pub kind: DistanceKind,
    pub key: String,
}

/// Index of everything cached for one input sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subject: String,
    pub emotion: Emotion,
    pub sequence_digest: String,
    /// Path of the input relative to the data root.
    pub source: String,
    pub frame_ids: Vec<u32>,
    pub landmark_count: usize,
    /// Key of the cached landmark sequence.
    pub landmarks: String,
    /// Key of the cached connectivity graph the diagrams were built with.
    pub connectivity: String,
    pub au: Option<String>,
    pub diagrams: Vec<DiagramEntry>,
    pub matrices: Vec<MatrixEntry>,
}

impl Manifest {
    pub fn diagram_key(&self, mode: Mode, subset: &str) -> Option<&str> {
        self.diagrams
            .iter()
            .find(|d| d.mode == mode && d.subset == subset)
            .map(|d| d.key.as_str())
    }

    pub fn matrix_key(&self, mode: Mode, subset: &str, kind: DistanceKind) -> Option<&str> {
        self.matrices
            .iter()
            .find(|m| m.mode == mode && m.subset == subset && m.kind == kind)
            .map(|m| m.key.as_str())
    }

    /// Adds the entries of `older` that this manifest does not already
    /// cover, keeping results from runs with other configurations.
    pub fn merge_from(&mut self, older: &Manifest) {
        for d in &older.diagrams {
            if self.diagram_key(d.mode, &d.subset).is_none() {
                self.diagrams.push(d.clone());
            }
        }
        for m in &older.matrices {
            if self.matrix_key(m.mode, &m.subset, m.kind).is_none() {
                self.matrices.push(m.clone());
            }
        }
        self.diagrams.sort();
        self.matrices.sort();
    }
}

#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    /// Opens (and creates) a cache directory.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let cache = Self { root: root.into() };
        for dir in [cache.objects_dir(), cache.manifests_dir()] {
            fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        }
        Ok(cache)
    }

    /// Opens an existing cache without writing anything.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let cache = Self { root: root.into() };
        if !cache.root.is_dir() {
            return Err(Error::Parameter(format!("cache directory {} does not exist", cache.root.display())));
        }
        Ok(cache)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn objects_dir(&self) -> PathBuf {
        self.root.join("objects")
    }

    fn manifests_dir(&self) -> PathBuf {
        self.root.join("manifests")
    }

    fn object_path(&self, key: &str) -> PathBuf {
        self.objects_dir().join(format!("{key}.json"))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.object_path(key).is_file()
    }

    pub fn read(&self, key: &str) -> Result<String> {
        let path = self.object_path(key);
        fs::read_to_string(&path).map_err(|e| io_err(&path, e))
    }

    /// Stores a payload under `key` with a metadata sidecar.
    pub fn write(&self, key: &str, stage: &str, payload: &str) -> Result<()> {
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let meta = json!({"stage": stage, "created_at": created_at});
        write_atomic(&self.objects_dir().join(format!("{key}.meta.json")), meta.to_string().as_bytes())?;
        write_atomic(&self.object_path(key), payload.as_bytes())
    }

    pub fn read_manifest(&self, sequence_digest: &str) -> Result<Option<Manifest>> {
        let path = self.manifests_dir().join(format!("{sequence_digest}.json"));
        if !path.is_file() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        parse_manifest(&text, &path).map(Some)
    }

    pub fn write_manifest(&self, m: &Manifest) -> Result<()> {
        let text = serde_json::to_string_pretty(m).expect("manifest serializes");
        write_atomic(&self.manifests_dir().join(format!("{}.json", m.sequence_digest)), text.as_bytes())
    }

    /// All manifests, ordered by (subject, emotion, source).
    pub fn manifests(&self) -> Result<Vec<Manifest>> {
        let dir = self.manifests_dir();
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| io_err(&dir, e))? {
            let path = entry.map_err(|e| io_err(&dir, e))?.path();
            if path.extension().is_some_and(|x| x == "json") {
                let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
                out.push(parse_manifest(&text, &path)?);
            }
        }
        out.sort_by(|a, b| (&a.subject, a.emotion, &a.source).cmp(&(&b.subject, b.emotion, &b.source)));
        Ok(out)
    }
}

fn parse_manifest(text: &str, path: &Path) -> Result<Manifest> {
    serde_json::from_str(text).map_err(|e| Error::Format {
        location: format!("{} line {}", path.display(), e.line()),
        message: e.to_string(),
    })
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().expect("cache paths have a parent");
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

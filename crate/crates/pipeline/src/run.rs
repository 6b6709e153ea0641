use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use facetopo_core::landmarks::{
    load_sequence, parse_au_csv, FeatureSubset, LandmarkConnectivity, LandmarkSequence, SequenceFormat,
};
use facetopo_core::metrics::{dissimilarity_matrix, DistanceKind, FrameDiagrams, Provenance};
use facetopo_core::persistence::{diagram_for_pose, DiagramRecord, Mode};
use facetopo_core::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cache::{artifact_key, sha256_hex, Cache, DiagramEntry, Manifest, MatrixEntry};
use crate::config::PipelineConfig;

/// Bumped whenever a payload format changes, invalidating old entries.
const FORMAT_VERSION: u32 = 1;

/// Per-frame diagrams of one (sequence, mode, subset).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramSet {
    pub frame_ids: Vec<u32>,
    pub diagrams: Vec<DiagramRecord>,
}

impl DiagramSet {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn frames(&self) -> Vec<FrameDiagrams> {
        self.diagrams
            .iter()
            .map(|r| FrameDiagrams::from(&r.clone().into_diagram()))
            .collect()
    }
}

/// Work counters. A run over a complete cache leaves both at zero.
#[derive(Debug, Default)]
pub struct Stats {
    /// Persistence computations (one per frame diagram).
    pub reductions: AtomicU64,
    /// Diagram-pair distance evaluations.
    pub matching_solves: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub computed: usize,
    pub cached: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceError {
    pub source: String,
    pub error: String,
    pub detail: String,
}

/// Summary of a pipeline run; every field is a pure function of the inputs
/// and the prior cache state.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub sequences: usize,
    pub errors: Vec<SequenceError>,
    pub diagram_sets: Tally,
    pub matrices: Tally,
    pub reductions: u64,
    pub matching_solves: u64,
}

/// Input sequence files under `root`, sorted. AU tables (`*.au.csv`) are
/// not sequences.
pub fn discover_sequences(root: &Path) -> Vec<PathBuf> {
    walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| SequenceFormat::from_path(p).is_some() && !is_au_table(p))
        .collect()
}

fn is_au_table(p: &Path) -> bool {
    p.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.to_ascii_lowercase().ends_with(".au.csv"))
}

/// `<stem>.au.csv` next to a sequence file.
pub fn au_sibling(seq_path: &Path) -> PathBuf {
    let stem = seq_path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    seq_path.with_file_name(format!("{stem}.au.csv"))
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    let conn = cfg.load_connectivity()?;
    let cache = Cache::create(&cfg.cache_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let stats = Stats::default();
    let mut report = PipelineReport::default();

    pool.install(|| {
        for path in discover_sequences(&cfg.data_root) {
            let rel = path.strip_prefix(&cfg.data_root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            match process_sequence(&path, &rel, cfg, &conn, &cache, &stats) {
                Ok((d, m)) => {
                    report.sequences += 1;
                    for (t, add) in [(&mut report.diagram_sets, d), (&mut report.matrices, m)] {
                        t.computed += add.computed;
                        t.cached += add.cached;
                    }
                }
                Err(e) => {
                    log::error!("{rel}: {e}");
                    report.errors.push(SequenceError {
                        source: rel,
                        error: e.kind().to_string(),
                        detail: e.to_string(),
                    });
                }
            }
        }
    });

    report.reductions = stats.reductions.load(Ordering::Relaxed);
    report.matching_solves = stats.matching_solves.load(Ordering::Relaxed);
    Ok(report)
}

pub fn sequence_digest(seq: &LandmarkSequence) -> String {
    sha256_hex(seq.to_json_string().as_bytes())
}

pub fn diagram_key(seq_digest: &str, conn: &LandmarkConnectivity, mode: Mode, subset: &FeatureSubset) -> String {
    artifact_key(
        "diagrams",
        seq_digest,
        &json!({
            "v": FORMAT_VERSION,
            "mode": mode,
            "subset": subset.labels(),
            "connectivity": sha256_hex(conn.to_json_string().as_bytes()),
        }),
    )
}

pub fn matrix_key(diagram_key: &str, kind: DistanceKind) -> String {
    artifact_key("matrix", diagram_key, &json!({"v": FORMAT_VERSION, "kind": kind}))
}

/// Diagrams of every frame, in frame order.
pub fn compute_diagram_set(
    seq: &LandmarkSequence,
    conn: &LandmarkConnectivity,
    mode: Mode,
    subset: &FeatureSubset,
) -> Result<DiagramSet> {
    let diagrams = seq
        .frames()
        .par_iter()
        .map(|pose| diagram_for_pose(pose, conn, subset, mode).map(|d| d.to_record(mode, subset.labels())))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagramSet {
        frame_ids: seq.frame_ids(),
        diagrams,
    })
}

fn process_sequence(
    path: &Path,
    rel: &str,
    cfg: &PipelineConfig,
    conn: &LandmarkConnectivity,
    cache: &Cache,
    stats: &Stats,
) -> Result<(Tally, Tally)> {
    let format = SequenceFormat::from_path(path).expect("discovered files have a known format");
    let seq = load_sequence(path, format)?;
    if seq.landmark_count() != conn.landmark_count() {
        return Err(Error::Validation(format!(
            "sequence has {} landmarks but the connectivity covers {}",
            seq.landmark_count(),
            conn.landmark_count()
        )));
    }
    let seq_json = seq.to_json_string();
    let digest = sha256_hex(seq_json.as_bytes());

    let landmarks = artifact_key("landmarks", &digest, &json!({"v": FORMAT_VERSION}));
    if !cache.contains(&landmarks) {
        cache.write(&landmarks, "landmarks", &seq_json)?;
    }

    let conn_json = conn.to_json_string();
    let connectivity = artifact_key("connectivity", &sha256_hex(conn_json.as_bytes()), &json!({"v": FORMAT_VERSION}));
    if !cache.contains(&connectivity) {
        cache.write(&connectivity, "connectivity", &conn_json)?;
    }

    let au_path = au_sibling(path);
    let au = if au_path.is_file() {
        let text = std::fs::read_to_string(&au_path).map_err(|e| Error::Io {
            path: au_path.clone(),
            source: e,
        })?;
        let key = artifact_key("au", &sha256_hex(text.as_bytes()), &json!({"v": FORMAT_VERSION}));
        if !cache.contains(&key) {
            let table = parse_au_csv(&text)?;
            cache.write(&key, "au", &serde_json::to_string(&table).expect("AU table serializes"))?;
        }
        Some(key)
    } else {
        None
    };

    let units: Vec<(Mode, &FeatureSubset)> = cfg
        .modes
        .iter()
        .flat_map(|&m| cfg.subsets.iter().map(move |s| (m, s)))
        .collect();
    let outcomes = units
        .par_iter()
        .map(|&(mode, subset)| process_unit(&seq, &digest, conn, mode, subset, &cfg.kinds, cache, stats))
        .collect::<Result<Vec<_>>>()?;

    let mut manifest = Manifest {
        subject: seq.subject_id().to_string(),
        emotion: seq.emotion(),
        sequence_digest: digest.clone(),
        source: rel.to_string(),
        frame_ids: seq.frame_ids(),
        landmark_count: seq.landmark_count(),
        landmarks,
        connectivity,
        au,
        diagrams: Vec::new(),
        matrices: Vec::new(),
    };
    let (mut diagrams, mut matrices) = (Tally::default(), Tally::default());
    for o in outcomes {
        if o.diagram_computed {
            diagrams.computed += 1;
        } else {
            diagrams.cached += 1;
        }
        matrices.computed += o.matrices_computed;
        matrices.cached += o.matrix_entries.len() - o.matrices_computed;
        manifest.diagrams.push(o.diagram_entry);
        manifest.matrices.extend(o.matrix_entries);
    }
    if let Some(old) = cache.read_manifest(&digest)? {
        manifest.merge_from(&old);
    }
    manifest.diagrams.sort();
    manifest.matrices.sort();
    cache.write_manifest(&manifest)?;
    Ok((diagrams, matrices))
}

struct UnitOutcome {
    diagram_entry: DiagramEntry,
    diagram_computed: bool,
    matrix_entries: Vec<MatrixEntry>,
    matrices_computed: usize,
}

#[allow(clippy::too_many_arguments)]
fn process_unit(
    seq: &LandmarkSequence,
    digest: &str,
    conn: &LandmarkConnectivity,
    mode: Mode,
    subset: &FeatureSubset,
    kinds: &[DistanceKind],
    cache: &Cache,
    stats: &Stats,
) -> Result<UnitOutcome> {
    let dkey = diagram_key(digest, conn, mode, subset);
    let mkeys: Vec<(DistanceKind, String)> = kinds.iter().map(|&k| (k, matrix_key(&dkey, k))).collect();
    let missing: Vec<&(DistanceKind, String)> = mkeys.iter().filter(|(_, k)| !cache.contains(k)).collect();

    let mut diagram_computed = false;
    if !missing.is_empty() || !cache.contains(&dkey) {
        let set = if cache.contains(&dkey) {
            DiagramSet::from_json_str(&cache.read(&dkey)?)?
        } else {
            let set = compute_diagram_set(seq, conn, mode, subset)?;
            stats.reductions.fetch_add(set.diagrams.len() as u64, Ordering::Relaxed);
            cache.write(&dkey, "diagrams", &serde_json::to_string(&set).expect("diagram set serializes"))?;
            diagram_computed = true;
            set
        };
        let frames = set.frames();
        for (kind, key) in &missing {
            let n = frames.len() as u64;
            let provenance = Provenance {
                mode,
                subset: subset.labels(),
            };
            let m = dissimilarity_matrix(&frames, set.frame_ids.clone(), *kind, Some(provenance))?;
            stats.matching_solves.fetch_add(n * n.saturating_sub(1) / 2, Ordering::Relaxed);
            cache.write(key, "matrix", &m.to_json_string())?;
        }
    }

    let name = subset.name();
    Ok(UnitOutcome {
        diagram_entry: DiagramEntry {
            mode,
            subset: name.clone(),
            key: dkey,
        },
        diagram_computed,
        matrices_computed: missing.len(),
        matrix_entries: mkeys
            .into_iter()
            .map(|(kind, key)| MatrixEntry {
                mode,
                subset: name.clone(),
                kind,
                key,
            })
            .collect(),
    })
}

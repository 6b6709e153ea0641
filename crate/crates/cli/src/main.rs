//! `facetopo`: batch computation, benchmarks, exports and the HTTP service.
//!
//! Settings resolve as flag (or `FACETOPO_*` environment variable), then the
//! `--config` file, then the built-in default.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use facetopo_core::embedding::{classical_mds, relative_embedding, tsne, Embedding, Method, TsneParams};
use facetopo_core::landmarks::{
    load_sequence, save_sequence, Emotion, FeatureSubset, LandmarkConnectivity, LandmarkSequence, SequenceFormat,
};
use facetopo_core::metrics::{DistanceKind, PoseDissimilarityMatrix};
use facetopo_core::persistence::Mode;
use facetopo_core::synthetic::{generate_synthetic, Motion, SyntheticSpec};
use facetopo_core::{Error, Result};
use facetopo_pipeline::config::parse_list;
use facetopo_pipeline::{benchmark, compare_supersampling, run_pipeline, Cache, ConfigFile, DiagramSet, Manifest, PipelineConfig};
use serde_json::json;

const DEFAULT_CACHE_DIR: &str = "facetopo-cache";

#[derive(Parser, Debug)]
#[command(name = "facetopo", version, about = "Topological analysis of facial landmark sequences")]
struct Cli {
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

/// Pipeline settings shared with the config file.
#[derive(Args, Debug)]
struct Settings {
    /// key = value settings file
    #[arg(long, global = true, env = "FACETOPO_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "FACETOPO_DATA_ROOT")]
    data_root: Option<PathBuf>,
    /// Connectivity JSON; defaults to the built-in 83-landmark face
    #[arg(long, global = true, env = "FACETOPO_CONNECTIVITY")]
    connectivity: Option<PathBuf>,
    /// Comma-separated: metric, nonmetric
    #[arg(long, global = true, env = "FACETOPO_MODES")]
    modes: Option<String>,
    /// Presets or `+`-joined regions, separated by `,` or `;`
    #[arg(long, global = true, env = "FACETOPO_SUBSETS")]
    subsets: Option<String>,
    /// Comma-separated: bottleneck, wasserstein1
    #[arg(long, global = true, env = "FACETOPO_KINDS")]
    kinds: Option<String>,
    #[arg(long, global = true, env = "FACETOPO_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, env = "FACETOPO_PARALLELISM")]
    parallelism: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute diagrams and dissimilarity matrices for every sequence under the data root
    Compute,
    /// Metric vs non-metric timing and feature counts for one sequence
    Bench {
        #[arg(long, env = "FACETOPO_INPUT")]
        input: PathBuf,
        #[arg(long, default_value = "full")]
        subset: FeatureSubset,
    },
    /// Supersampled point clouds at decreasing spacing vs the non-metric filtration
    SupersampleCompare {
        #[arg(long, env = "FACETOPO_INPUT")]
        input: PathBuf,
        /// Frame position within the sequence
        #[arg(long, default_value_t = 0)]
        frame: usize,
        #[arg(long, default_value = "full")]
        subset: FeatureSubset,
        /// Strictly decreasing spacings
        #[arg(long, default_value = "8,4,2,1", value_delimiter = ',')]
        epsilons: Vec<f64>,
    },
    /// Embed a cached dissimilarity matrix
    Embed {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        embedding: EmbeddingArgs,
    },
    /// Serve the cache over HTTP
    Serve {
        #[arg(long, env = "FACETOPO_PORT", default_value_t = 8080)]
        port: u16,
        /// Static frontend assets, served under /ui
        #[arg(long, env = "FACETOPO_UI_DIR")]
        ui_dir: Option<PathBuf>,
    },
    /// Generate a synthetic landmark sequence
    Synth {
        #[arg(long, default_value = "mouth")]
        motion: Motion,
        #[arg(long, default_value_t = 50)]
        frames: usize,
        /// Standard deviation of per-coordinate Gaussian noise
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// .json or .csv; JSON on stdout when omitted
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Write a cached or derived artifact as JSON
    Export {
        #[arg(long, value_enum)]
        what: What,
        #[command(flatten)]
        target: Target,
        /// Frame position; the whole diagram set when omitted
        #[arg(long)]
        frame: Option<usize>,
        #[command(flatten)]
        embedding: EmbeddingArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum What {
    Diagram,
    Matrix,
    Embedding,
}

/// One cached (sequence, mode, subset, kind).
#[derive(Args, Debug)]
struct Target {
    #[arg(long)]
    subject: String,
    #[arg(long)]
    emotion: Emotion,
    #[arg(long, default_value = "nonmetric")]
    mode: Mode,
    #[arg(long, default_value = "full")]
    subset: FeatureSubset,
    #[arg(long, default_value = "bottleneck")]
    kind: DistanceKind,
}

#[derive(Args, Debug)]
struct EmbeddingArgs {
    #[arg(long, default_value = "mds")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    keyframe: usize,
    #[arg(long, default_value_t = 30.0)]
    perplexity: f64,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            e.exit();
        }
        Err(e) => {
            let message = e.render().to_string();
            fail("usage", json!({"message": message.trim()}));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            fail(e.kind(), json!({"message": e.to_string()}));
            ExitCode::FAILURE
        }
    }
}

fn fail(error: &str, detail: serde_json::Value) {
    eprintln!("{}", json!({"error": error, "detail": detail}));
}

fn run(cli: Cli) -> Result<ExitCode> {
    let s = &cli.settings;
    let file = match &s.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Compute => {
            let cfg = pipeline_config(s, &file)?;
            let report = run_pipeline(&cfg)?;
            print_json(&serde_json::to_string_pretty(&report).expect("report serializes"))?;
            // partial failure: everything else was computed, but say so
            return Ok(if report.errors.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(3) });
        }
        Command::Bench { input, subset } => {
            let seq = read_sequence(&input)?;
            let report = benchmark(&seq, &connectivity(s, &file)?, &subset)?;
            print_json(&serde_json::to_string_pretty(&report).expect("report serializes"))?;
        }
        Command::SupersampleCompare {
            input,
            frame,
            subset,
            epsilons,
        } => {
            let seq = read_sequence(&input)?;
            let pose = seq.frames().get(frame).ok_or(Error::IndexOutOfRange {
                index: frame,
                len: seq.frames().len(),
            })?;
            let report = compare_supersampling(pose, &connectivity(s, &file)?, &subset, &epsilons)?;
            print_json(&serde_json::to_string_pretty(&report).expect("report serializes"))?;
        }
        Command::Embed { target, embedding } => {
            let cache = Cache::open(cache_dir(s, &file)?)?;
            let e = embed(&cache, &target, &embedding)?;
            print_json(&serde_json::to_string(&e).expect("embedding serializes"))?;
        }
        Command::Serve { port, ui_dir } => {
            let dir = cache_dir(s, &file)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Parameter(format!("runtime: {e}")))?;
            rt.block_on(facetopo_serve::serve(&dir, ui_dir.as_deref(), port))?;
        }
        Command::Synth {
            motion,
            frames,
            noise,
            seed,
            output,
        } => {
            let seq = generate_synthetic(&SyntheticSpec::new(frames, motion, noise).with_seed(seed))?;
            match output {
                Some(path) => {
                    let format = SequenceFormat::from_path(&path)
                        .ok_or_else(|| Error::Parameter(format!("{}: expected a .json or .csv path", path.display())))?;
                    save_sequence(&seq, &path, format)?;
                }
                None => print_json(&seq.to_json_string())?,
            }
        }
        Command::Export {
            what,
            target,
            frame,
            embedding,
            output,
        } => {
            let cache = Cache::open(cache_dir(s, &file)?)?;
            let text = match what {
                What::Matrix => cache.read(&find_matrix(&cache, &target)?)?,
                What::Diagram => {
                    let m = find_manifest(&cache, &target)?;
                    let subset = target.subset.name();
                    let key = m
                        .diagram_key(target.mode, &subset)
                        .ok_or_else(|| missing("diagrams", &target))?;
                    let text = cache.read(key)?;
                    match frame {
                        None => text,
                        Some(f) => {
                            let set = DiagramSet::from_json_str(&text)?;
                            let record = set.diagrams.get(f).ok_or(Error::IndexOutOfRange {
                                index: f,
                                len: set.diagrams.len(),
                            })?;
                            serde_json::to_string(record).expect("diagram serializes")
                        }
                    }
                }
                What::Embedding => serde_json::to_string(&embed(&cache, &target, &embedding)?).expect("embedding serializes"),
            };
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?,
                None => print_json(&text)?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_json(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| Error::Io {
        path: "<stdout>".into(),
        source: e,
    })
}

/// Flag/env value, else config-file value, else `None`.
fn setting<T: FromStr<Err = Error>>(flag: &Option<String>, file: &ConfigFile, key: &str) -> Result<Option<Vec<T>>> {
    flag.as_deref().or(file.get(key)).map(parse_list).transpose()
}

fn path_setting(flag: &Option<PathBuf>, file: &ConfigFile, key: &str) -> Option<PathBuf> {
    flag.clone().or_else(|| file.get(key).map(PathBuf::from))
}

fn cache_dir(s: &Settings, file: &ConfigFile) -> Result<PathBuf> {
    Ok(path_setting(&s.cache_dir, file, "cache_dir").unwrap_or_else(|| DEFAULT_CACHE_DIR.into()))
}

fn connectivity(s: &Settings, file: &ConfigFile) -> Result<LandmarkConnectivity> {
    match path_setting(&s.connectivity, file, "connectivity") {
        Some(p) => LandmarkConnectivity::load(&p),
        None => Ok(LandmarkConnectivity::default_face()),
    }
}

fn pipeline_config(s: &Settings, file: &ConfigFile) -> Result<PipelineConfig> {
    let data_root = path_setting(&s.data_root, file, "data_root")
        .ok_or_else(|| Error::Parameter("data_root is required (--data-root or config file)".into()))?;
    let mut cfg = PipelineConfig::new(data_root, cache_dir(s, file)?);
    cfg.connectivity = path_setting(&s.connectivity, file, "connectivity");
    if let Some(v) = setting(&s.modes, file, "modes")? {
        cfg.modes = dedup(v);
    }
    if let Some(v) = setting(&s.subsets, file, "subsets")? {
        cfg.subsets = dedup(v);
    }
    if let Some(v) = setting(&s.kinds, file, "kinds")? {
        cfg.kinds = dedup(v);
    }
    cfg.parallelism = match (s.parallelism, file.get("parallelism")) {
        (Some(p), _) => p,
        (None, Some(raw)) => raw
            .parse()
            .map_err(|_| Error::Parameter(format!("parallelism must be a non-negative integer, got '{raw}'")))?,
        (None, None) => 0,
    };
    Ok(cfg)
}

fn dedup<T: PartialEq>(v: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(v.len());
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn read_sequence(path: &Path) -> Result<LandmarkSequence> {
    let format = SequenceFormat::from_path(path)
        .ok_or_else(|| Error::Parameter(format!("{}: expected a .json or .csv file", path.display())))?;
    load_sequence(path, format)
}

fn missing(what: &str, t: &Target) -> Error {
    Error::Parameter(format!(
        "no cached {what} for subject '{}', emotion {}, mode {}, subset {}, kind {}",
        t.subject,
        t.emotion,
        t.mode,
        t.subset.name(),
        t.kind.as_str()
    ))
}

fn find_manifest(cache: &Cache, t: &Target) -> Result<Manifest> {
    cache
        .manifests()?
        .into_iter()
        .find(|m| m.subject == t.subject && m.emotion == t.emotion)
        .ok_or_else(|| missing("sequence", t))
}

fn find_matrix(cache: &Cache, t: &Target) -> Result<String> {
    let m = find_manifest(cache, t)?;
    m.matrix_key(t.mode, &t.subset.name(), t.kind)
        .map(str::to_string)
        .ok_or_else(|| missing("matrix", t))
}

fn embed(cache: &Cache, t: &Target, a: &EmbeddingArgs) -> Result<Embedding> {
    let matrix = PoseDissimilarityMatrix::from_json_str(&cache.read(&find_matrix(cache, t)?)?)?.matrix;
    match a.method {
        Method::Relative => relative_embedding(&matrix, a.keyframe),
        Method::Mds => classical_mds(&matrix, a.dim),
        Method::Tsne => tsne(
            &matrix,
            TsneParams {
                perplexity: a.perplexity,
                iterations: a.iterations,
                seed: a.seed,
            },
        ),
    }
}

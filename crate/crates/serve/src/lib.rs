//! Read-only HTTP/JSON service over a populated cache.
//!
//! The cache is scanned once at startup; every response is a pure function
//! of that snapshot and the query. Embeddings are computed on demand and
//! memoized by their full parameter tuple.

mod catalog;
mod error;

use std::collections::HashMap;
use std::fmt::Display;
use std::net::SocketAddr;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use axum::extract::{Query, State};
use axum::http::{header, HeaderValue};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use facetopo_core::embedding::{classical_mds, relative_embedding, tsne, Method, TsneParams};
use facetopo_core::landmarks::{Emotion, FeatureSubset, LandmarkSequence};
use facetopo_core::metrics::{DistanceKind, PoseDissimilarityMatrix};
use facetopo_core::persistence::Mode;
use facetopo_pipeline::{Cache, DiagramSet, Manifest};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub use catalog::Catalog;
pub use error::ApiError;

/// Response header: `hit` when an embedding came from the memo table.
pub const MEMO_HEADER: &str = "x-memo";
/// Response header: memo hits served since startup.
pub const MEMO_HITS_HEADER: &str = "x-memo-hits";

const MAX_TSNE_ITERATIONS: usize = 10_000;

type Memo = Arc<OnceLock<Result<Arc<String>, ApiError>>>;

pub struct AppState {
    cache: Cache,
    manifests: Vec<Manifest>,
    catalog: String,
    memo: Mutex<HashMap<String, Memo>>,
    memo_hits: AtomicU64,
}

impl AppState {
    pub fn load(cache_dir: &Path) -> facetopo_core::Result<Self> {
        let cache = Cache::open(cache_dir)?;
        let manifests = cache.manifests()?;
        let catalog = serde_json::to_string(&Catalog::from_manifests(&manifests)).expect("catalog serializes");
        Ok(Self {
            cache,
            manifests,
            catalog,
            memo: Mutex::default(),
            memo_hits: AtomicU64::new(0),
        })
    }
}

/// The full router. Static assets under `/ui` when `ui_dir` is given.
pub fn app(state: AppState, ui_dir: Option<&Path>) -> Router {
    let mut router = Router::new()
        .route("/catalog", get(get_catalog))
        .route("/diagram", get(get_diagram))
        .route("/matrix", get(get_matrix))
        .route("/relative", get(get_relative))
        .route("/embedding", get(get_embedding))
        .route("/landmarks", get(get_landmarks))
        .route("/connectivity", get(get_connectivity))
        .route("/au", get(get_au));
    if let Some(dir) = ui_dir {
        router = router.nest_service("/ui", ServeDir::new(dir));
    }
    router
        .fallback(|| async { ApiError::not_found("route", Value::Null) })
        .layer(CorsLayer::permissive())
        .with_state(Arc::new(state))
}

pub async fn serve(cache_dir: &Path, ui_dir: Option<&Path>, port: u16) -> facetopo_core::Result<()> {
    let router = app(AppState::load(cache_dir)?, ui_dir);
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| facetopo_core::Error::Parameter(format!("cannot bind {addr}: {e}")))?;
    log::info!("serving {} on http://{addr}", cache_dir.display());
    axum::serve(listener, router)
        .await
        .map_err(|e| facetopo_core::Error::Parameter(format!("server error: {e}")))
}

type Shared = State<Arc<AppState>>;
type Params = Query<HashMap<String, String>>;

fn json_body(text: impl Into<String>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text.into()).into_response()
}

fn param<T: FromStr>(q: &HashMap<String, String>, key: &str, default: Option<T>) -> Result<T, ApiError>
where
    T::Err: Display,
{
    match q.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| ApiError::bad_request(format!("invalid {key}: {e}"), json!({"param": key, "value": raw}))),
        None => default.ok_or_else(|| ApiError::bad_request(format!("missing {key}"), json!({"param": key}))),
    }
}

/// The sequence addressed by `subject` and `emotion`.
fn manifest<'a>(state: &'a AppState, q: &HashMap<String, String>) -> Result<&'a Manifest, ApiError> {
    let subject: String = param(q, "subject", None)?;
    let emotion: Emotion = param(q, "emotion", None)?;
    state
        .manifests
        .iter()
        .find(|m| m.subject == subject && m.emotion == emotion)
        .ok_or_else(|| ApiError::not_found("sequence", json!({"subject": subject, "emotion": emotion})))
}

/// (mode, canonical subset name), defaulting to the non-metric full face.
fn unit(q: &HashMap<String, String>) -> Result<(Mode, String), ApiError> {
    let mode = param(q, "mode", Some(Mode::Nonmetric))?;
    let subset: FeatureSubset = param(q, "subset", Some(FeatureSubset::full()))?;
    Ok((mode, subset.name()))
}

fn echo(m: &Manifest, extra: Value) -> Value {
    let mut v = json!({"subject": m.subject, "emotion": m.emotion});
    if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
        a.extend(b);
    }
    v
}

fn read(state: &AppState, key: &str) -> Result<String, ApiError> {
    state.cache.read(key).map_err(ApiError::from)
}

fn matrix_key<'a>(m: &'a Manifest, q: &HashMap<String, String>) -> Result<&'a str, ApiError> {
    let (mode, subset) = unit(q)?;
    let kind = param(q, "kind", Some(DistanceKind::Bottleneck))?;
    m.matrix_key(mode, &subset, kind)
        .ok_or_else(|| ApiError::not_found("matrix", echo(m, json!({"mode": mode, "subset": subset, "kind": kind}))))
}

async fn get_catalog(State(state): Shared) -> Response {
    json_body(state.catalog.clone())
}

async fn get_diagram(State(state): Shared, Query(q): Params) -> Result<Response, ApiError> {
    let m = manifest(&state, &q)?;
    let (mode, subset) = unit(&q)?;
    let frame: usize = param(&q, "frame", None)?;
    let tuple = echo(m, json!({"frame": frame, "mode": mode, "subset": subset}));
    let key = m
        .diagram_key(mode, &subset)
        .ok_or_else(|| ApiError::not_found("diagrams", tuple.clone()))?;
    let set = DiagramSet::from_json_str(&read(&state, key)?)?;
    let record = set.diagrams.get(frame).ok_or_else(|| ApiError::not_found("frame", tuple))?;
    Ok(json_body(serde_json::to_string(record).expect("diagram serializes")))
}

async fn get_matrix(State(state): Shared, Query(q): Params) -> Result<Response, ApiError> {
    let m = manifest(&state, &q)?;
    Ok(json_body(read(&state, matrix_key(m, &q)?)?))
}

async fn get_relative(State(state): Shared, Query(q): Params) -> Result<Response, ApiError> {
    let m = manifest(&state, &q)?;
    let matrix = PoseDissimilarityMatrix::from_json_str(&read(&state, matrix_key(m, &q)?)?)?;
    let keyframe = param(&q, "keyframe", Some(0usize))?;
    let e = relative_embedding(&matrix.matrix, keyframe)?;
    Ok(json_body(serde_json::to_string(&e).expect("embedding serializes")))
}

async fn get_embedding(State(state): Shared, Query(q): Params) -> Result<Response, ApiError> {
    let m = manifest(&state, &q)?;
    let key = matrix_key(m, &q)?.to_string();
    let method = param(&q, "method", Some(Method::Mds))?;
    let params = match method {
        Method::Relative => json!({"keyframe": param(&q, "keyframe", Some(0usize))?}),
        Method::Mds => json!({"dim": param(&q, "dim", Some(2usize))?}),
        Method::Tsne => {
            let d = TsneParams::default();
            let iterations = param(&q, "iterations", Some(d.iterations))?;
            if iterations > MAX_TSNE_ITERATIONS {
                return Err(ApiError::bad_request(
                    format!("iterations must be at most {MAX_TSNE_ITERATIONS}"),
                    json!({"param": "iterations", "value": iterations}),
                ));
            }
            json!({
                "perplexity": param(&q, "perplexity", Some(d.perplexity))?,
                "iterations": iterations,
                "seed": param(&q, "seed", Some(d.seed))?,
            })
        }
    };
    let memo_key = json!({"matrix": key, "method": method, "params": params}).to_string();

    let cell = {
        let mut memo = state.memo.lock().expect("memo lock");
        Arc::clone(memo.entry(memo_key).or_default())
    };
    let hit = cell.get().is_some();
    let result = if hit {
        state.memo_hits.fetch_add(1, Ordering::Relaxed);
        cell.get().cloned().expect("checked above")
    } else {
        let state = Arc::clone(&state);
        tokio::task::spawn_blocking(move || {
            cell.get_or_init(|| compute_embedding(&state, &key, method, &params).map(Arc::new))
                .clone()
        })
        .await
        .map_err(|e| ApiError::from(facetopo_core::Error::Parameter(format!("embedding task failed: {e}"))))?
    };

    let mut response = json_body(result?.as_str());
    let headers = response.headers_mut();
    headers.insert(MEMO_HEADER, HeaderValue::from_static(if hit { "hit" } else { "miss" }));
    headers.insert(MEMO_HITS_HEADER, HeaderValue::from(state.memo_hits.load(Ordering::Relaxed)));
    Ok(response)
}

fn compute_embedding(state: &AppState, key: &str, method: Method, params: &Value) -> Result<String, ApiError> {
    let matrix = PoseDissimilarityMatrix::from_json_str(&read(state, key)?)?.matrix;
    let get = |k: &str| params[k].as_u64().unwrap_or_default() as usize;
    let e = match method {
        Method::Relative => relative_embedding(&matrix, get("keyframe"))?,
        Method::Mds => classical_mds(&matrix, get("dim"))?,
        Method::Tsne => tsne(
            &matrix,
            TsneParams {
                perplexity: params["perplexity"].as_f64().unwrap_or_default(),
                iterations: get("iterations"),
                seed: params["seed"].as_u64().unwrap_or_default(),
            },
        )?,
    };
    Ok(serde_json::to_string(&e).expect("embedding serializes"))
}

async fn get_landmarks(State(state): Shared, Query(q): Params) -> Result<Response, ApiError> {
    let m = manifest(&state, &q)?;
    let frame: usize = param(&q, "frame", None)?;
    let seq = LandmarkSequence::from_json_str(&read(&state, &m.landmarks)?)?;
    let pose = seq
        .frames()
        .get(frame)
        .ok_or_else(|| ApiError::not_found("frame", echo(m, json!({"frame": frame}))))?;
    let body = json!({
        "subject": m.subject,
        "emotion": m.emotion,
        "frame": frame,
        "frame_id": pose.frame_index(),
        "points": pose.points(),
    });
    Ok(json_body(body.to_string()))
}

async fn get_connectivity(State(state): Shared, Query(q): Params) -> Result<Response, ApiError> {
    let m = manifest(&state, &q)?;
    Ok(json_body(read(&state, &m.connectivity)?))
}

async fn get_au(State(state): Shared, Query(q): Params) -> Result<Response, ApiError> {
    let m = manifest(&state, &q)?;
    let key = m.au.as_deref().ok_or_else(|| ApiError::not_found("au", echo(m, json!({}))))?;
    Ok(json_body(read(&state, key)?))
}

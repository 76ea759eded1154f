//! HTTP reward endpoint.
//!
//! Endpoints:
//!
//! * `POST /v1/reward`: [`RewardRequest`] in, [`RewardResponse`] out.
//! * `GET /v1/health`: `{"status": "ok", "version": "..."}`.
//! * `GET /v1/config`: effective default [`RewardConfig`].
//!
//! Failures return `{"code", "message"}` with a non-2xx status. Codes are
//! `validation-error`, `reference-not-compilable`, `reference-not-functional`,
//! `reference-concepts-uncomputable` and `internal-error`.
//!
//! Rewards are computed by the library exactly as a direct
//! [`score_candidates`](gdl_reward::rewards::score_candidates) call would
//! compute them, so responses match that call bit for bit.

use std::future::Future;
use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gdl_reward::rewards::{reference_concepts, score_against, ReferenceError};
use gdl_reward::{
    ConceptVector, Grammar, GrammarError, RewardBreakdown, RewardConfig, RewardConfigOverrides,
    SeedPolicy,
};
use lru::LruCache;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_CACHE_CAPACITY: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardRequest {
    /// Ground-truth game description.
    pub reference: String,
    /// Sampled outputs to score; must be non-empty.
    pub candidates: Vec<String>,
    /// Partial config merged over the server defaults.
    #[serde(default)]
    pub config: Option<RewardConfigOverrides>,
    /// Echoed back unchanged.
    #[serde(default)]
    pub request_id: Option<String>,
    /// Fixed base seed for every playout batch. When absent each batch is
    /// seeded from its description's content hash.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RewardRequest {
    pub fn seed_policy(&self) -> SeedPolicy {
        self.seed.map_or(SeedPolicy::ContentHash, SeedPolicy::Fixed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardResponse {
    pub request_id: Option<String>,
    pub breakdowns: Vec<RewardBreakdown>,
    /// Group-normalized advantages, aligned with `breakdowns`.
    pub advantages: Vec<f64>,
    pub reference_concepts: ConceptVector,
    pub cache_hit: bool,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
            },
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "validation-error",
            message,
        )
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal-error", message)
    }
}

impl From<ReferenceError> for ApiError {
    fn from(e: ReferenceError) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// Everything the reference concepts depend on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    reference: String,
    base_seed: u64,
    playouts_gt: usize,
    max_turns: usize,
    probe_seeds: usize,
    budget_bits: u64,
}

impl CacheKey {
    fn new(reference: &str, seeds: SeedPolicy, cfg: &RewardConfig) -> Self {
        CacheKey {
            reference: reference.to_owned(),
            base_seed: seeds.base_seed(reference),
            playouts_gt: cfg.playouts_gt,
            max_turns: cfg.max_turns,
            probe_seeds: cfg.probe_seeds,
            budget_bits: cfg.budget_secs.to_bits(),
        }
    }
}

/// Shared service state. The reference cache is the only mutable part.
pub struct AppState {
    grammar: Grammar,
    defaults: RewardConfig,
    cache: Mutex<LruCache<CacheKey, ConceptVector>>,
}

impl AppState {
    pub fn new(grammar: Grammar, defaults: RewardConfig, cache_capacity: usize) -> Self {
        let cap = NonZeroUsize::new(cache_capacity).unwrap_or(NonZeroUsize::MIN);
        AppState {
            grammar,
            defaults,
            cache: Mutex::new(LruCache::new(cap)),
        }
    }

    pub fn defaults(&self) -> &RewardConfig {
        &self.defaults
    }

    pub fn cached_references(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// Score a request synchronously. Runs playouts; call off the async runtime.
    pub fn reward(&self, req: &RewardRequest) -> Result<RewardResponse, ApiError> {
        let start = Instant::now();
        if req.candidates.is_empty() {
            return Err(ApiError::validation("candidates must be non-empty"));
        }
        let cfg = match &req.config {
            Some(o) => o.apply(&self.defaults),
            None => self.defaults.validate().map(|_| self.defaults.clone()),
        }
        .map_err(|e| ApiError::validation(e.to_string()))?;
        let seeds = req.seed_policy();

        let key = CacheKey::new(&req.reference, seeds, &cfg);
        let cached = self.cache.lock().expect("cache lock").get(&key).cloned();
        let cache_hit = cached.is_some();
        let gt = match cached {
            Some(gt) => gt,
            None => {
                let gt = reference_concepts(&req.reference, &cfg, seeds)?;
                self.cache.lock().expect("cache lock").put(key, gt.clone());
                gt
            }
        };

        let scored = score_against(&gt, &req.candidates, &self.grammar, &cfg, seeds);
        Ok(RewardResponse {
            request_id: req.request_id.clone(),
            breakdowns: scored.breakdowns,
            advantages: scored.advantages,
            reference_concepts: gt,
            cache_hit,
            timing_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }
}

async fn reward_handler(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<Json<RewardResponse>, ApiError> {
    let req: RewardRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::validation(format!("malformed request body: {e}")))?;
    let id = req.request_id.clone();
    let result = tokio::task::spawn_blocking(move || state.reward(&req))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    match &result {
        Ok(r) => {
            tracing::info!(request_id = ?id, n = r.breakdowns.len(), cache_hit = r.cache_hit, ms = r.timing_ms, "reward")
        }
        Err(e) => tracing::warn!(request_id = ?id, code = %e.body.code, "reward rejected"),
    }
    result.map(Json)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: VERSION.into(),
    })
}

async fn config(State(state): State<Arc<AppState>>) -> Json<RewardConfig> {
    Json(state.defaults.clone())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/reward", post(reward_handler))
        .route("/v1/health", get(health))
        .route("/v1/config", get(config))
        .with_state(state)
}

#[derive(Debug)]
pub enum ServeError {
    Grammar(GrammarError),
    Config(String),
    Io(std::io::Error),
}

impl std::fmt::Display for ServeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ServeError::Grammar(e) => write!(f, "grammar: {e}"),
            ServeError::Config(e) => write!(f, "config: {e}"),
            ServeError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ServeError {}

/// Serve on an already bound listener until `shutdown` resolves.
pub async fn serve_with(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Load the grammar (the shipped one when `grammar_path` is `None`), bind,
/// and serve until Ctrl-C.
pub async fn serve(
    bind: SocketAddr,
    grammar_path: Option<&Path>,
    defaults: RewardConfig,
) -> Result<(), ServeError> {
    let grammar = match grammar_path {
        Some(p) => Grammar::load(p).map_err(ServeError::Grammar)?,
        None => Grammar::ludilite(),
    };
    defaults
        .validate()
        .map_err(|e| ServeError::Config(e.to_string()))?;
    let listener = TcpListener::bind(bind).await.map_err(ServeError::Io)?;
    tracing::info!(addr = %listener.local_addr().map_err(ServeError::Io)?, "listening");
    let state = Arc::new(AppState::new(grammar, defaults, DEFAULT_CACHE_CAPACITY));
    serve_with(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
    .map_err(ServeError::Io)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TTT: &str = "(game \"Tic-Tac-Toe\" (players 2) (equipment { (board (square 3)) (piece \"Disc\" Each) }) (rules (play (move Add (to (sites Empty)))) (end (if (is Line 3) (result Mover Win)) (if (is Full) (result All Draw)))))";

    fn state() -> AppState {
        AppState::new(Grammar::ludilite(), RewardConfig::default(), 2)
    }

    fn request(candidates: &[&str]) -> RewardRequest {
        RewardRequest {
            reference: TTT.into(),
            candidates: candidates.iter().map(|s| s.to_string()).collect(),
            config: None,
            request_id: Some("r1".into()),
            seed: None,
        }
    }

    #[test]
    fn second_request_hits_cache() {
        let s = state();
        let a = s.reward(&request(&[TTT, "gibberish"])).unwrap();
        let b = s.reward(&request(&[TTT, "gibberish"])).unwrap();
        assert!(!a.cache_hit && b.cache_hit);
        assert_eq!(a.breakdowns, b.breakdowns);
        assert_eq!(a.advantages, b.advantages);
        assert_eq!(a.breakdowns[0].r_g, 1.0);
        assert_eq!(a.breakdowns[1].r_g, 0.0);
        assert!(a.advantages.iter().sum::<f64>().abs() < 1e-12);
        assert_eq!(a.request_id.as_deref(), Some("r1"));
    }

    #[test]
    fn validation() {
        let s = state();
        assert_eq!(
            s.reward(&request(&[])).unwrap_err().body.code,
            "validation-error"
        );
        let mut req = request(&[TTT]);
        req.config = Some(RewardConfigOverrides {
            sigma: Some(0.0),
            ..Default::default()
        });
        let e = s.reward(&req).unwrap_err();
        assert_eq!(e.body.code, "validation-error");
        assert!(e.body.message.contains("sigma"), "{}", e.body.message);
    }

    #[test]
    fn reference_errors_carry_codes() {
        let s = state();
        let mut req = request(&[TTT]);
        req.reference = TTT
            .replace(
                "(is Full) (result All Draw)",
                "(is Line 9) (result All Draw)",
            )
            .replace(
                "(is Line 3) (result Mover Win)",
                "(is Line 9) (result Mover Win)",
            );
        assert_eq!(
            s.reward(&req).unwrap_err().body.code,
            "reference-not-functional"
        );
        req.reference = "(game".into();
        assert_eq!(
            s.reward(&req).unwrap_err().body.code,
            "reference-not-compilable"
        );
    }

    #[test]
    fn cache_is_bounded_and_keyed_on_config() {
        let s = state();
        let mut req = request(&[TTT]);
        s.reward(&req).unwrap();
        req.seed = Some(1);
        assert!(!s.reward(&req).unwrap().cache_hit);
        req.config = Some(RewardConfigOverrides {
            playouts_gt: Some(20),
            ..Default::default()
        });
        assert!(!s.reward(&req).unwrap().cache_hit);
        assert_eq!(s.cached_references(), 2);
        // Candidate-side knobs do not affect the reference entry.
        req.config = Some(RewardConfigOverrides {
            playouts_gt: Some(20),
            sigma: Some(0.5),
            ..Default::default()
        });
        assert!(s.reward(&req).unwrap().cache_hit);
    }
}

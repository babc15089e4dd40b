//! REST service: a job-submission API over the tournament engine. Query
//! submission returns immediately; the tournament runs as a background job
//! and results are polled via `GET /queries/{id}`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response as HttpResponse};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::agent::{agent_id_for_name, AgentConfig, AgentRegistry};
use crate::error::{ArtError, Result};
use crate::hash::stable_hash;
use crate::mock::MockAgent;
use crate::persistence::{leaderboard_of, EventStore, RegisteredAgent, KIND_AGENT_REGISTERED};
use crate::tournament::{TournamentConfig, TournamentEngine, TournamentResult};

pub const DEFAULT_PORT: u16 = 8080;

/// Boot parameters for the HTTP server.
#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub port: u16,
    /// Event log + snapshot directory; `None` runs in-memory only.
    pub data_dir: Option<PathBuf>,
    /// TOML file holding a [`TournamentConfig`] used as the default.
    pub config_file: Option<PathBuf>,
    /// Master seed for mock agents registered without an explicit seed.
    pub seed: u64,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            port: DEFAULT_PORT,
            data_dir: None,
            config_file: None,
            seed: 0,
        }
    }
}

// ---------------------------------------------------------------------------
// Wire types
// ---------------------------------------------------------------------------

/// `POST /queries` request body. Unknown fields are rejected; omitted
/// config fields take the stock defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySubmission {
    pub content: String,
    #[serde(default)]
    pub context: Option<String>,
    #[serde(default)]
    pub config: Option<TournamentConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Pending,
    Running,
    Completed,
    Failed,
}

/// Completed-query result document; field names are part of the public API.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDocument {
    pub tournament_id: String,
    pub final_rankings: Vec<(String, f64)>,
    pub best_response: BestResponse,
    pub winner_agent_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestResponse {
    pub agent_id: String,
    pub content: String,
    pub confidence: f64,
}

/// `GET /queries/{id}` response body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryStatus {
    pub query_id: String,
    pub status: JobStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<ResultDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRegistration {
    pub name: String,
    /// Mock latent quality in [0, 1]; defaults to 0.75.
    #[serde(default)]
    pub quality: Option<f64>,
    /// Noise seed; defaults to a stable hash of the server seed and name.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub description: Option<String>,
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

impl ResultDocument {
    fn from_tournament(result: &TournamentResult) -> Self {
        ResultDocument {
            tournament_id: result.tournament_id.clone(),
            final_rankings: result
                .final_rankings
                .iter()
                .map(|(id, r)| (id.clone(), round1(*r)))
                .collect(),
            best_response: BestResponse {
                agent_id: result.best_response.agent_id.clone(),
                content: result.best_response.content.clone(),
                confidence: result.best_response.confidence,
            },
            winner_agent_id: result.winner_agent_id.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

#[derive(Debug, Default)]
struct Metrics {
    tournaments_run: AtomicU64,
    rounds_completed: AtomicU64,
    agent_invocations: AtomicU64,
    queries_submitted: AtomicU64,
    queries_failed: AtomicU64,
    /// (count, total ms, max ms) of completed query jobs.
    latency: Mutex<(u64, u64, u64)>,
}

pub struct AppState {
    registry: Arc<Mutex<AgentRegistry>>,
    store: Option<Arc<Mutex<EventStore>>>,
    jobs: Mutex<BTreeMap<String, QueryStatus>>,
    default_config: Mutex<TournamentConfig>,
    metrics: Metrics,
    seed: u64,
    next_query: AtomicU64,
}

pub type SharedState = Arc<AppState>;

/// Build service state, replaying any existing event log in `data_dir` so
/// mock agents and their ratings survive restarts.
pub fn build_state(options: &ServeOptions) -> Result<SharedState> {
    let default_config = match &options.config_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let config: TournamentConfig = toml::from_str(&text)
                .map_err(|e| ArtError::Validation(format!("config file: {e}")))?;
            config.validate()?;
            config
        }
        None => TournamentConfig::default(),
    };

    let mut registry = AgentRegistry::new();
    let store = match &options.data_dir {
        Some(dir) => {
            let store = EventStore::open(dir)?;
            for reg in store.registrations()? {
                let mut config = AgentConfig::new(reg.name.clone(), reg.model_name.clone());
                config.description = reg.description.clone();
                let agent = MockAgent::new(config.clone(), reg.quality, reg.seed);
                registry.register(Arc::new(agent), &config)?;
            }
            for state in store.load_agent_states()? {
                if registry.get(&state.agent_id).is_some() {
                    registry.restore_state(state)?;
                }
            }
            Some(Arc::new(Mutex::new(store)))
        }
        None => None,
    };

    Ok(Arc::new(AppState {
        registry: Arc::new(Mutex::new(registry)),
        store,
        jobs: Mutex::new(BTreeMap::new()),
        default_config: Mutex::new(default_config),
        metrics: Metrics::default(),
        seed: options.seed,
        next_query: AtomicU64::new(1),
    }))
}

impl AppState {
    pub fn registry(&self) -> &Arc<Mutex<AgentRegistry>> {
        &self.registry
    }

    fn engine(&self) -> TournamentEngine {
        let engine = TournamentEngine::new(self.registry.clone());
        match &self.store {
            Some(store) => engine.with_store(store.clone()),
            None => engine,
        }
    }
}

// ---------------------------------------------------------------------------
// Error mapping
// ---------------------------------------------------------------------------

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> HttpResponse {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<ArtError> for ApiError {
    fn from(err: ArtError) -> Self {
        let status = match &err {
            ArtError::InvalidArgument(_) | ArtError::Validation(_) => StatusCode::BAD_REQUEST,
            ArtError::Conflict(_) => StatusCode::CONFLICT,
            ArtError::NotFound(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, err.to_string())
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// Body deserialization failures become 400 with the serde message (which
/// names the offending field), not axum's default 422.
fn parse_body<T>(
    body: std::result::Result<Json<T>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<T> {
    body.map(|Json(v)| v)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.body_text()))
}

// ---------------------------------------------------------------------------
// Handlers
// ---------------------------------------------------------------------------

async fn submit_query(
    State(state): State<SharedState>,
    body: std::result::Result<Json<QuerySubmission>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let submission = parse_body(body)?;
    if submission.content.trim().is_empty() {
        return Err(ApiError(
            StatusCode::BAD_REQUEST,
            "content: must be non-empty".into(),
        ));
    }
    let config = match submission.config {
        Some(config) => {
            config.validate().map_err(ApiError::from)?;
            config
        }
        None => state.default_config.lock().unwrap().clone(),
    };
    if state.registry.lock().unwrap().is_empty() {
        return Err(ApiError(
            StatusCode::CONFLICT,
            "no agents registered".into(),
        ));
    }

    let n = state.next_query.fetch_add(1, Ordering::SeqCst);
    let query_id = format!("q-{n:08x}");
    state.jobs.lock().unwrap().insert(
        query_id.clone(),
        QueryStatus {
            query_id: query_id.clone(),
            status: JobStatus::Pending,
            result: None,
            error: None,
        },
    );
    state
        .metrics
        .queries_submitted
        .fetch_add(1, Ordering::Relaxed);

    let job_state = state.clone();
    let job_id = query_id.clone();
    tokio::task::spawn_blocking(move || run_job(job_state, job_id, submission.content, config));

    Ok((
        StatusCode::ACCEPTED,
        Json(json!({ "query_id": query_id, "status": "pending" })),
    ))
}

fn run_job(state: SharedState, query_id: String, content: String, config: TournamentConfig) {
    let started = Instant::now();
    if let Some(job) = state.jobs.lock().unwrap().get_mut(&query_id) {
        job.status = JobStatus::Running;
    }
    let outcome = state.engine().run_query(&content, &query_id, &config);

    let elapsed_ms = started.elapsed().as_millis() as u64;
    {
        let mut latency = state.metrics.latency.lock().unwrap();
        latency.0 += 1;
        latency.1 += elapsed_ms;
        latency.2 = latency.2.max(elapsed_ms);
    }

    let mut jobs = state.jobs.lock().unwrap();
    let Some(job) = jobs.get_mut(&query_id) else {
        return;
    };
    match outcome {
        Ok(result) => {
            state
                .metrics
                .tournaments_run
                .fetch_add(config.num_tournaments as u64, Ordering::Relaxed);
            state
                .metrics
                .rounds_completed
                .fetch_add(result.rounds.len() as u64, Ordering::Relaxed);
            let invocations: u64 = result
                .rounds
                .iter()
                .map(|r| (r.responses.len() + r.critiques.len()) as u64)
                .sum();
            state
                .metrics
                .agent_invocations
                .fetch_add(invocations, Ordering::Relaxed);
            job.status = JobStatus::Completed;
            job.result = Some(ResultDocument::from_tournament(&result));
        }
        Err(err) => {
            state.metrics.queries_failed.fetch_add(1, Ordering::Relaxed);
            job.status = JobStatus::Failed;
            job.error = Some(err.to_string());
        }
    }
}

async fn query_status(
    State(state): State<SharedState>,
    Path(query_id): Path<String>,
) -> ApiResult<Json<QueryStatus>> {
    state
        .jobs
        .lock()
        .unwrap()
        .get(&query_id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown query '{query_id}'")))
}

/// Register a mock agent at runtime. Shared with the CLI's `agents add`.
pub fn register_mock_agent(
    registry: &Arc<Mutex<AgentRegistry>>,
    store: Option<&Arc<Mutex<EventStore>>>,
    master_seed: u64,
    registration: &AgentRegistration,
) -> Result<RegisteredAgent> {
    if registration.name.trim().is_empty() {
        return Err(ArtError::Validation("name: must be non-empty".into()));
    }
    let quality = registration.quality.unwrap_or(0.75);
    if !quality.is_finite() || !(0.0..=1.0).contains(&quality) {
        return Err(ArtError::Validation(format!(
            "quality: must be in [0, 1], got {quality}"
        )));
    }
    let seed = registration.seed.unwrap_or_else(|| {
        stable_hash(&[&master_seed.to_le_bytes(), registration.name.as_bytes()])
    });

    let mut config = AgentConfig::new(registration.name.clone(), "mock");
    config.description = registration.description.clone();
    let agent = MockAgent::new(config.clone(), quality, seed);
    registry
        .lock()
        .unwrap()
        .register(Arc::new(agent), &config)?;

    let record = RegisteredAgent {
        agent_id: agent_id_for_name(&registration.name),
        name: registration.name.clone(),
        model_name: "mock".into(),
        description: registration.description.clone(),
        quality,
        seed,
    };
    if let Some(store) = store {
        store.lock().unwrap().append_event(
            KIND_AGENT_REGISTERED,
            serde_json::to_value(&record).map_err(|e| ArtError::Storage(e.to_string()))?,
        )?;
    }
    Ok(record)
}

async fn add_agent(
    State(state): State<SharedState>,
    body: std::result::Result<Json<AgentRegistration>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let registration = parse_body(body)?;
    let record = register_mock_agent(
        &state.registry,
        state.store.as_ref(),
        state.seed,
        &registration,
    )?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "agent_id": record.agent_id,
            "name": record.name,
            "rating": 1500.0,
        })),
    ))
}

async fn list_agents(State(state): State<SharedState>) -> Json<serde_json::Value> {
    let registry = state.registry.lock().unwrap();
    let agents: Vec<_> = registry
        .entries()
        .map(|e| {
            json!({
                "agent_id": e.state.agent_id,
                "name": e.state.name,
                "model_name": e.state.model_name,
                "rating": round1(e.state.rating.value),
                "match_count": e.state.rating.match_count,
            })
        })
        .collect();
    Json(json!({ "agents": agents }))
}

#[derive(Debug, Deserialize)]
struct LeaderboardParams {
    #[serde(default)]
    limit: Option<usize>,
}

async fn leaderboard(
    State(state): State<SharedState>,
    Query(params): Query<LeaderboardParams>,
) -> Json<serde_json::Value> {
    let states = state.registry.lock().unwrap().states();
    let entries = leaderboard_of(&states, params.limit.unwrap_or(usize::MAX));
    Json(json!({ "leaderboard": entries }))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn get_config(State(state): State<SharedState>) -> Json<TournamentConfig> {
    Json(state.default_config.lock().unwrap().clone())
}

async fn put_config(
    State(state): State<SharedState>,
    body: std::result::Result<Json<TournamentConfig>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<TournamentConfig>> {
    let config = parse_body(body)?;
    config.validate().map_err(ApiError::from)?;
    *state.default_config.lock().unwrap() = config.clone();
    Ok(Json(config))
}

async fn metrics(State(state): State<SharedState>) -> Json<serde_json::Value> {
    let m = &state.metrics;
    let (count, total_ms, max_ms) = *m.latency.lock().unwrap();
    let mean_ms = if count > 0 {
        total_ms as f64 / count as f64
    } else {
        0.0
    };
    Json(json!({
        "counters": {
            "queries_submitted": m.queries_submitted.load(Ordering::Relaxed),
            "queries_failed": m.queries_failed.load(Ordering::Relaxed),
            "tournaments_run": m.tournaments_run.load(Ordering::Relaxed),
            "rounds_completed": m.rounds_completed.load(Ordering::Relaxed),
            "agent_invocations": m.agent_invocations.load(Ordering::Relaxed),
        },
        "latency": {
            "completed_queries": count,
            "mean_ms": mean_ms,
            "max_ms": max_ms,
        },
    }))
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/queries", post(submit_query))
        .route("/queries/:query_id", get(query_status))
        .route("/agents", post(add_agent).get(list_agents))
        .route("/leaderboard", get(leaderboard))
        .route("/health", get(health))
        .route("/config", get(get_config).put(put_config))
        .route("/metrics", get(metrics))
        .with_state(state)
}

/// Bind and serve until the process is terminated.
pub async fn serve(options: ServeOptions) -> Result<()> {
    let state = build_state(&options)?;
    let addr = std::net::SocketAddr::from(([0, 0, 0, 0], options.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .await
        .map_err(ArtError::Io)?;
    Ok(())
}

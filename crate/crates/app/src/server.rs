//! HTTP/JSON service over loaded model bundles.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::bundle::ModelBundle;
use crate::error::{AppError, ErrorKind};
use crate::ops::{self, MatchupRequest, OptimizeRequest, SweepRequest};

/// Finished jobs kept for polling before the oldest are dropped.
const RETAINED_JOBS: usize = 256;

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.kind.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = if self.kind == ErrorKind::Internal {
            // Internal details stay in the server log.
            eprintln!("internal error: {self}");
            json!({ "error": "internal error", "code": self.kind.code(), "detail": "" })
        } else {
            serde_json::to_value(self.body()).expect("strings")
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Running,
    Done,
    Failed,
}

struct Job {
    model: String,
    total: usize,
    progress: Arc<AtomicUsize>,
    status: JobStatus,
    result: Option<serde_json::Value>,
    error: Option<AppError>,
}

#[derive(Default)]
struct JobRegistry {
    next: u64,
    jobs: HashMap<u64, Job>,
    finished: VecDeque<u64>,
}

impl JobRegistry {
    fn finish(&mut self, id: u64, outcome: Result<serde_json::Value, AppError>) {
        if let Some(job) = self.jobs.get_mut(&id) {
            match outcome {
                Ok(v) => {
                    job.status = JobStatus::Done;
                    job.result = Some(v);
                }
                Err(e) => {
                    job.status = JobStatus::Failed;
                    job.error = Some(e);
                }
            }
        }
        self.finished.push_back(id);
        while self.finished.len() > RETAINED_JOBS {
            if let Some(old) = self.finished.pop_front() {
                self.jobs.remove(&old);
            }
        }
    }
}

/// Immutable bundles plus the sweep job registry.
pub struct AppState {
    models: BTreeMap<String, Arc<ModelBundle>>,
    jobs: Mutex<JobRegistry>,
}

impl AppState {
    pub fn new(models: BTreeMap<String, ModelBundle>) -> Self {
        AppState {
            models: models.into_iter().map(|(k, v)| (k, Arc::new(v))).collect(),
            jobs: Mutex::new(JobRegistry::default()),
        }
    }

    fn model(&self, id: &str) -> Result<Arc<ModelBundle>, AppError> {
        self.models.get(id).cloned().ok_or_else(|| AppError::not_found(format!("unknown model {id:?}")))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/models/{id}/ratings", get(ratings))
        .route("/models/{id}/compare", get(compare))
        .route("/models/{id}/matchup", post(matchup))
        .route("/models/{id}/optimize", post(optimize))
        .route("/models/{id}/sweep", post(sweep))
        .route("/jobs/{id}", get(job))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state)
}

async fn not_found() -> AppError {
    AppError::not_found("no such route")
}

async fn method_not_allowed() -> Response {
    let e = AppError::new(ErrorKind::InvalidQuery, "method not allowed", "");
    (StatusCode::METHOD_NOT_ALLOWED, Json(serde_json::to_value(e.body()).expect("strings"))).into_response()
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, AppError> {
    serde_json::from_slice(body).map_err(|e| AppError::query(format!("request body: {e}")))
}

/// Runs CPU-bound work off the async workers.
async fn blocking<T, F>(f: F) -> Result<T, AppError>
where
    F: FnOnce() -> Result<T, AppError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| AppError::new(ErrorKind::Internal, "internal error", e.to_string()))?
}

async fn healthz(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "models": state.models.keys().collect::<Vec<_>>() }))
}

async fn ratings(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<ops::Ratings>, AppError> {
    let bundle = state.model(&id)?;
    Ok(Json(ops::ratings(&bundle)))
}

async fn compare(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Result<Query<HashMap<String, String>>, QueryRejection>,
) -> Result<Json<icepm::gibbs::BetterThan>, AppError> {
    let bundle = state.model(&id)?;
    let Query(params) = params.map_err(|e| AppError::query(e.body_text()))?;
    let raw = params.get("ids").ok_or_else(|| AppError::query("missing ids parameter"))?;
    let ids: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    blocking(move || ops::compare(&bundle, &ids)).await.map(Json)
}

async fn matchup(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ops::MatchupResponse>, AppError> {
    let bundle = state.model(&id)?;
    let req: MatchupRequest = parse_body(&body)?;
    blocking(move || ops::matchup(&bundle, &req)).await.map(Json)
}

async fn optimize(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ops::OptimizeResponse>, AppError> {
    let bundle = state.model(&id)?;
    let req: OptimizeRequest = parse_body(&body)?;
    blocking(move || ops::optimize(&bundle, &req)).await.map(Json)
}

/// Validates the request, then runs the sweep as a job and returns its id.
async fn sweep(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Response, AppError> {
    let bundle = state.model(&id)?;
    let req: SweepRequest = parse_body(&body)?;
    let plan = ops::plan_sweep(&bundle, &req)?;
    let progress = Arc::new(AtomicUsize::new(0));
    let total = bundle.require_draws()?.n_draws();
    let job_id = {
        let mut reg = state.jobs.lock().expect("job registry poisoned");
        let job_id = reg.next;
        reg.next += 1;
        reg.jobs.insert(
            job_id,
            Job { model: id.clone(), total, progress: progress.clone(), status: JobStatus::Running, result: None, error: None },
        );
        job_id
    };
    let worker_state = state.clone();
    tokio::task::spawn_blocking(move || {
        let outcome = ops::run_sweep(&bundle, &plan, &progress)
            .and_then(|r| serde_json::to_value(r).map_err(AppError::from));
        worker_state.jobs.lock().expect("job registry poisoned").finish(job_id, outcome);
    });
    let body = json!({ "job_id": job_id, "status": JobStatus::Running, "poll": format!("/jobs/{job_id}") });
    Ok((StatusCode::ACCEPTED, Json(body)).into_response())
}

async fn job(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<serde_json::Value>, AppError> {
    let job_id: u64 = id.parse().map_err(|_| AppError::not_found(format!("unknown job {id:?}")))?;
    let reg = state.jobs.lock().expect("job registry poisoned");
    let job = reg.jobs.get(&job_id).ok_or_else(|| AppError::not_found(format!("unknown job {job_id}")))?;
    let mut out = json!({
        "job_id": job_id,
        "model": job.model,
        "status": job.status,
        "progress": { "done": job.progress.load(Ordering::Relaxed).min(job.total), "total": job.total },
    });
    if let Some(r) = &job.result {
        out["result"] = r.clone();
    }
    if let Some(e) = &job.error {
        out["error"] = serde_json::to_value(e.body()).expect("strings");
    }
    Ok(Json(out))
}

/// Binds and serves until ctrl-c.
pub async fn serve(state: Arc<AppState>, host: &str, port: u16) -> Result<(), AppError> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    let addr = listener.local_addr()?;
    println!("{}", json!({ "listening": addr.to_string() }));
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

//! HTTP JSON service for layout analysis evaluation.
//!
//! Evaluating a set of pages takes two requests and a poll:
//!
//! 1. `POST /collections` with `{"files": [{"name", "extension", "value"}]}`
//!    (base64 images) once for the ground truth and once for the predictions.
//!    Each returns `201 {"collection": <name>}`.
//! 2. `POST /evaluation` with
//!    `{"data": [{"gtCollection": <name>, "hypothesisCollection": <name>}]}`
//!    returns `202 {"id": <job>}`. Images are paired by name.
//! 3. `GET /jobs/<job>` returns the job state and, once done, one
//!    `{"file", "metrics"}` object per image. Metric names match the CSV
//!    columns of the command-line tool.
//!
//! Collections and jobs live under a data directory and survive restarts.

pub mod api;
pub mod jobs;
pub mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use layout_eval_core::ClassRegistry;
use tokio::net::TcpListener;
use tokio::sync::Semaphore;

use crate::jobs::{run_pairs, ImagePair, JobRecord, JobState, JobView};
use crate::store::Store;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    /// Jobs evaluated at the same time.
    pub workers: usize,
    pub registry: ClassRegistry,
    pub max_body_bytes: usize,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            workers: 2,
            registry: ClassRegistry::diva_hisdb(),
            max_body_bytes: 512 * 1024 * 1024,
        }
    }
}

struct Inner {
    store: Store,
    registry: Arc<ClassRegistry>,
    jobs: RwLock<HashMap<String, JobRecord>>,
    workers: Semaphore,
    max_body_bytes: usize,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// Opens the data directory and resumes jobs that had not finished.
    /// Must be called inside a Tokio runtime.
    pub fn open(config: ServiceConfig) -> std::io::Result<Self> {
        let store = Store::open(&config.data_dir)?;
        let mut unfinished = Vec::new();
        let mut jobs = HashMap::new();
        for mut job in store.load_jobs()? {
            if !job.state.is_finished() {
                // interrupted mid-run: start over
                job.state = JobState::Pending;
                unfinished.push(job.id.clone());
            }
            jobs.insert(job.id.clone(), job);
        }
        let state = Self {
            inner: Arc::new(Inner {
                store,
                registry: Arc::new(config.registry),
                jobs: RwLock::new(jobs),
                workers: Semaphore::new(config.workers.max(1)),
                max_body_bytes: config.max_body_bytes,
            }),
        };
        for id in unfinished {
            tracing::info!(job = %id, "resuming job");
            state.spawn_job(id);
        }
        Ok(state)
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }

    pub fn job(&self, id: &str) -> Option<JobView> {
        self.inner.jobs.read().unwrap().get(id).map(JobRecord::view)
    }

    /// Records a pending job for `pairs` and schedules it.
    pub fn submit(&self, pairs: Vec<ImagePair>) -> std::io::Result<String> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let job = JobRecord {
            id: id.clone(),
            created_at: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            state: JobState::Pending,
            pairs,
            results: None,
            errors: None,
        };
        self.inner.store.save_job(&job)?;
        self.inner.jobs.write().unwrap().insert(id.clone(), job);
        self.spawn_job(id.clone());
        Ok(id)
    }

    fn update(&self, id: &str, f: impl FnOnce(&mut JobRecord)) -> Option<JobRecord> {
        let snapshot = {
            let mut jobs = self.inner.jobs.write().unwrap();
            let job = jobs.get_mut(id)?;
            f(job);
            job.clone()
        };
        if let Err(e) = self.inner.store.save_job(&snapshot) {
            tracing::error!(job = %id, "cannot persist job: {e}");
        }
        Some(snapshot)
    }

    fn spawn_job(&self, id: String) {
        let state = self.clone();
        tokio::spawn(async move {
            let Ok(_permit) = state.inner.workers.acquire().await else {
                return;
            };
            let Some(job) = state.update(&id, |job| {
                job.advance(JobState::Running);
            }) else {
                return;
            };
            let store = state.inner.store.clone();
            let registry = Arc::clone(&state.inner.registry);
            let outcome = tokio::task::spawn_blocking(move || run_pairs(&store, &registry, &job.pairs))
                .await
                .unwrap_or_else(|e| {
                    Err(vec![jobs::FileError {
                        file: String::new(),
                        error: format!("evaluation aborted: {e}"),
                    }])
                });
            let finished = state.update(&id, |job| job.finish(outcome));
            if let Some(job) = finished {
                tracing::info!(job = %id, state = ?job.state, "job finished");
            }
        });
    }
}

pub fn router(state: AppState) -> Router {
    let limit = state.inner.max_body_bytes;
    Router::new()
        .route("/collections", post(api::post_collection))
        .route("/evaluation", post(api::post_evaluation))
        .route("/jobs/{id}", get(api::get_job))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

/// Serves on an already bound listener until the future is dropped.
pub async fn serve(listener: TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::open(config)?;
    axum::serve(listener, router(state)).await
}

/// Binds `addr` and serves, returning the bound address through `on_bound`.
pub async fn bind_and_serve(
    addr: SocketAddr,
    config: ServiceConfig,
    on_bound: impl FnOnce(SocketAddr),
) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    serve(listener, config).await
}

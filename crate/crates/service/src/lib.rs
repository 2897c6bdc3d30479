//! HTTP classification endpoint.
//!
//! `POST /v1/classify` takes one call's opening audio (raw μ-law with
//! `Content-Type: audio/basic`, or a WAV file with `audio/wav`) and returns a
//! JSON verdict. `GET /v1/health` and `GET /v1/stats` report liveness and
//! running counters.

use std::future::Future;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::body::{to_bytes, Body};
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use deadair_core::audio::{decode_mulaw, normalize_clip, wav};
use deadair_core::{AudioClip, Detector, Featurizer, Label, Model, SilencePolicy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::net::TcpListener;
use tokio::sync::Semaphore;

pub const MAX_BODY_BYTES: usize = 64 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("malformed audio: {0}")]
    BadAudio(String),
    #[error("request body exceeds {MAX_BODY_BYTES} bytes")]
    TooLarge,
    #[error("unsupported content type {0:?}; use audio/basic or audio/wav")]
    UnsupportedMediaType(String),
    #[error("no model loaded")]
    NoModel,
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::BadAudio(_) => StatusCode::BAD_REQUEST,
            ServiceError::TooLarge => StatusCode::PAYLOAD_TOO_LARGE,
            ServiceError::UnsupportedMediaType(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
            ServiceError::NoModel => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = Json(serde_json::json!({ "error": self.to_string() }));
        (self.status(), body).into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub call_id: String,
    pub label: Label,
    pub score: f64,
    pub degenerate: bool,
    pub digital_silence: bool,
    pub processing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub model_hash: Option<String>,
    /// Seconds since the state was created.
    pub uptime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub requests: u64,
    pub spam: u64,
    pub ham: u64,
    pub digital_silence: u64,
    pub errors: u64,
    pub p50_processing_ms: f64,
    pub p95_processing_ms: f64,
    pub p99_processing_ms: f64,
}

#[derive(Debug, Default)]
struct Counters {
    requests: u64,
    spam: u64,
    ham: u64,
    digital_silence: u64,
    errors: u64,
    latencies_ms: Vec<f64>,
}

/// Nearest-rank percentile of an ascending slice; 0 when empty.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (p / 100.0 * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Shared, immutable detector plus exact request counters.
#[derive(Debug)]
pub struct AppState {
    detector: Option<Detector>,
    model_hash: Option<String>,
    started: Instant,
    next_id: AtomicU64,
    counters: Mutex<Counters>,
    /// Bounds concurrently running pipelines to the available cores.
    workers: Semaphore,
}

impl AppState {
    pub fn new(detector: Option<Detector>, model_hash: Option<String>) -> Self {
        AppState {
            detector,
            model_hash,
            started: Instant::now(),
            next_id: AtomicU64::new(0),
            counters: Mutex::new(Counters::default()),
            workers: Semaphore::new(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    /// A state with no model: health reports `degraded` and classify is 503.
    pub fn degraded() -> Self {
        AppState::new(None, None)
    }

    /// Loads a model file, hashing its exact bytes.
    pub fn from_model_file(
        path: impl AsRef<Path>,
        policy: SilencePolicy,
    ) -> deadair_core::Result<Self> {
        let bytes = std::fs::read(path)?;
        let model = Model::from_json_bytes(&bytes)?;
        let detector = Detector::new(Featurizer::default(), model, policy)?;
        Ok(AppState::new(
            Some(detector),
            Some(hex::encode(Sha256::digest(&bytes))),
        ))
    }

    pub fn detector(&self) -> Option<&Detector> {
        self.detector.as_ref()
    }

    pub fn health(&self) -> Health {
        Health {
            status: if self.detector.is_some() {
                "ok"
            } else {
                "degraded"
            }
            .to_string(),
            model_hash: self.model_hash.clone(),
            uptime: self.started.elapsed().as_secs_f64(),
        }
    }

    pub fn stats(&self) -> StatsReport {
        let c = self.counters.lock().expect("counter lock poisoned");
        let mut lat = c.latencies_ms.clone();
        lat.sort_by(f64::total_cmp);
        StatsReport {
            requests: c.requests,
            spam: c.spam,
            ham: c.ham,
            digital_silence: c.digital_silence,
            errors: c.errors,
            p50_processing_ms: percentile(&lat, 50.0),
            p95_processing_ms: percentile(&lat, 95.0),
            p99_processing_ms: percentile(&lat, 99.0),
        }
    }

    fn record(&self, outcome: Result<&Verdict, &ServiceError>) {
        let mut c = self.counters.lock().expect("counter lock poisoned");
        c.requests += 1;
        match outcome {
            Ok(v) => {
                match v.label {
                    Label::Spam => c.spam += 1,
                    Label::Ham => c.ham += 1,
                }
                if v.digital_silence {
                    c.digital_silence += 1;
                }
                c.latencies_ms.push(v.processing_ms);
            }
            Err(_) => c.errors += 1,
        }
    }

    fn call_id(&self, headers: &HeaderMap) -> String {
        headers
            .get("x-call-id")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string)
            .unwrap_or_else(|| format!("req-{:08}", self.next_id.fetch_add(1, Ordering::Relaxed)))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/classify", post(classify))
        .route("/v1/health", get(health))
        .route("/v1/stats", get(stats))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(state.health())
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<StatsReport> {
    Json(state.stats())
}

/// Decodes a request body and rejects audio shorter than `min_samples`.
pub fn decode_body(
    content_type: &str,
    body: &[u8],
    min_samples: usize,
) -> Result<AudioClip, ServiceError> {
    let bad = |e: deadair_core::Error| ServiceError::BadAudio(e.to_string());
    let pcm = match content_type {
        "audio/basic" => decode_mulaw(body).map_err(bad)?,
        "audio/wav" | "audio/wave" | "audio/x-wav" => wav::parse_wav(body).map_err(bad)?.1,
        other => return Err(ServiceError::UnsupportedMediaType(other.to_string())),
    };
    if pcm.len() < min_samples {
        return Err(ServiceError::BadAudio(format!(
            "{} samples is shorter than one {min_samples}-sample window",
            pcm.len()
        )));
    }
    normalize_clip(&pcm).map_err(bad)
}

async fn classify(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Body) -> Response {
    let call_id = state.call_id(&headers);
    let result = run_classify(&state, &headers, body, call_id.clone()).await;
    state.record(result.as_ref());
    match result {
        Ok(v) => {
            tracing::info!(
                "{}",
                serde_json::json!({
                    "call_id": v.call_id,
                    "status": 200,
                    "label": v.label,
                    "score": v.score,
                    "digital_silence": v.digital_silence,
                    "processing_ms": v.processing_ms,
                })
            );
            Json(v).into_response()
        }
        Err(e) => {
            tracing::info!(
                "{}",
                serde_json::json!({
                    "call_id": call_id,
                    "status": e.status().as_u16(),
                    "error": e.to_string(),
                })
            );
            e.into_response()
        }
    }
}

/// `processing_ms` runs from admission to a worker slot until the verdict
/// is ready; time queued behind other requests is excluded.
async fn run_classify(
    state: &Arc<AppState>,
    headers: &HeaderMap,
    body: Body,
    call_id: String,
) -> Result<Verdict, ServiceError> {
    if state.detector.is_none() {
        return Err(ServiceError::NoModel);
    }
    let bytes = to_bytes(body, MAX_BODY_BYTES)
        .await
        .map_err(|_| ServiceError::TooLarge)?;
    let content_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .map(|v| {
            v.split(';')
                .next()
                .unwrap_or("")
                .trim()
                .to_ascii_lowercase()
        })
        .unwrap_or_default();

    let _permit = state
        .workers
        .acquire()
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?;
    let started = Instant::now();
    let state = Arc::clone(state);
    tokio::task::spawn_blocking(move || {
        let detector = state.detector.as_ref().ok_or(ServiceError::NoModel)?;
        let clip = decode_body(
            &content_type,
            &bytes,
            detector.featurizer().stft_config().window_size,
        )?;
        let c = detector
            .classify(&clip)
            .map_err(|e| ServiceError::BadAudio(e.to_string()))?;
        Ok(Verdict {
            call_id,
            label: c.label,
            score: c.score,
            degenerate: c.degenerate,
            digital_silence: c.digital_silence,
            processing_ms: started.elapsed().as_secs_f64() * 1000.0,
        })
    })
    .await
    .map_err(|e| ServiceError::Internal(e.to_string()))?
}

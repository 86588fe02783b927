//! HTTP API over a data directory, backing the demonstration annotator.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/recordings` | recording list |
//! | GET | `/recordings/{id}` | frames with joint positions |
//! | GET | `/recordings/{id}/angles` | extracted human angles per frame |
//! | GET | `/recordings/{id}/noise?threshold=&window=&per_joint=` | detector suggestions |
//! | GET | `/recordings/{id}/annotations` | stored annotation set, `ETag` = version |
//! | PUT | `/recordings/{id}/annotations` | validate and store, honours `If-Match` |
//! | POST | `/recordings/{id}/run?mode=closed\|open` | run the pipeline, returns the summary |
//! | GET | `/recordings/{id}/export/{file}` | a file of the last run |
//!
//! The annotation version is the hex SHA-256 of the stored file. A `PUT`
//! with a stale `If-Match` gets 409; without `If-Match` the last write wins.
//! Errors are JSON objects `{"error": "..."}`.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use skelmotion_core::angles::{extract_angles, DroppedFrame};
use skelmotion_core::control::ExecutionMode;
use skelmotion_core::pipeline::{
    detect_noisy_frames, AnnotationError, AnnotationSet, DataDir, NoiseDetectorConfig, PipelineError,
    SUMMARY_FILE,
};
use skelmotion_core::skeleton::SkeletonError;
use skelmotion_core::{AngleJointId, JointId};

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Unprocessable(String),
    #[error("annotation version mismatch")]
    Conflict { current: Option<String> },
    #[error("{0}")]
    Internal(String),
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e.root() {
            PipelineError::Annotation(_) => ApiError::Unprocessable(e.to_string()),
            _ => ApiError::Internal(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Conflict { .. } => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = match &self {
            ApiError::Conflict { current } => json!({ "error": self.to_string(), "current_version": current }),
            _ => json!({ "error": self.to_string() }),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
pub struct AppState {
    data: DataDir,
    locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
}

impl AppState {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data: DataDir::new(data_dir),
            locks: Arc::default(),
        }
    }

    pub fn data(&self) -> &DataDir {
        &self.data
    }

    /// Per-recording lock serializing annotation writes and runs.
    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }

    fn require(&self, id: &str) -> ApiResult<()> {
        if self.data.has_recording(id) {
            Ok(())
        } else {
            Err(ApiError::NotFound(format!("unknown recording {id:?}")))
        }
    }
}

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

/// Version token of stored annotation bytes.
pub fn version_token(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn etag(version: &str) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{version}\"")).expect("hex is a valid header")
}

#[derive(Serialize)]
struct RecordingInfo {
    id: String,
    frames: usize,
    duration: f64,
    has_annotations: bool,
}

async fn list_recordings(State(st): State<AppState>) -> ApiResult<Json<Value>> {
    blocking(move || {
        let mut out = Vec::new();
        for id in st.data.recording_ids()? {
            let seq = st.data.load_recording(&id)?;
            out.push(RecordingInfo {
                frames: seq.len(),
                duration: seq.frames().last().map_or(0.0, |f| f.timestamp()),
                has_annotations: st.data.annotation_path(&id).is_file(),
                id,
            });
        }
        Ok(Json(json!({ "recordings": out })))
    })
    .await
}

#[derive(Serialize)]
struct FrameRecord {
    index: usize,
    t: f64,
    joints: BTreeMap<&'static str, [f64; 3]>,
}

async fn get_recording(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    st.require(&id)?;
    blocking(move || {
        let seq = st.data.load_recording(&id)?;
        let frames: Vec<FrameRecord> = seq
            .frames()
            .iter()
            .enumerate()
            .map(|(index, f)| FrameRecord {
                index,
                t: f.timestamp(),
                joints: JointId::ALL
                    .iter()
                    .map(|j| {
                        let p = f.position(*j);
                        (j.name(), [p.x, p.y, p.z])
                    })
                    .collect(),
            })
            .collect();
        Ok(Json(json!({
            "id": id,
            "sample_rate_hint": seq.sample_rate_hint(),
            "frames": frames,
        })))
    })
    .await
}

#[derive(Serialize)]
struct AngleRecord {
    index: usize,
    t: f64,
    angles: BTreeMap<&'static str, f64>,
}

async fn get_angles(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    st.require(&id)?;
    blocking(move || {
        let seq = st.data.load_recording(&id)?;
        let settings = st.data.settings()?;
        let mut frames = Vec::new();
        let mut dropped = Vec::new();
        for (index, frame) in seq.frames().iter().enumerate() {
            match extract_angles(frame, &settings.extraction) {
                Ok(col) => frames.push(AngleRecord {
                    index,
                    t: frame.timestamp(),
                    angles: AngleJointId::ALL.iter().map(|j| (j.code(), col[*j])).collect(),
                }),
                Err(e) => dropped.push(DroppedFrame {
                    frame: index,
                    timestamp: frame.timestamp(),
                    angle: match e {
                        SkeletonError::DegenerateLink { angle, .. } => angle,
                        _ => None,
                    },
                }),
            }
        }
        Ok(Json(json!({ "id": id, "frames": frames, "dropped": dropped })))
    })
    .await
}

#[derive(Debug, Deserialize)]
struct NoiseQuery {
    threshold: Option<f64>,
    window: Option<usize>,
    per_joint: Option<bool>,
}

async fn get_noise(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<NoiseQuery>,
) -> ApiResult<Json<Value>> {
    st.require(&id)?;
    blocking(move || {
        let seq = st.data.load_recording(&id)?;
        let base = st.data.settings()?.noise.unwrap_or_default();
        let cfg = NoiseDetectorConfig {
            jump_threshold: q.threshold.unwrap_or(base.jump_threshold),
            window: q.window.unwrap_or(base.window),
            per_joint: q.per_joint.unwrap_or(base.per_joint),
        };
        cfg.validate().map_err(ApiError::BadRequest)?;
        let flagged = detect_noisy_frames(&seq, &cfg);
        Ok(Json(json!({ "id": id, "config": cfg, "noisy_frames": flagged })))
    })
    .await
}

async fn get_annotations(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    st.require(&id)?;
    let path = st.data.annotation_path(&id);
    match tokio::fs::read(&path).await {
        Ok(bytes) => {
            let version = version_token(&bytes);
            let mut resp = (StatusCode::OK, bytes).into_response();
            let headers = resp.headers_mut();
            headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
            headers.insert(header::ETAG, etag(&version));
            Ok(resp)
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(ApiError::NotFound(format!("no annotations stored for {id:?}")))
        }
        Err(e) => Err(ApiError::Internal(e.to_string())),
    }
}

fn if_match(headers: &HeaderMap) -> ApiResult<Option<String>> {
    headers
        .get(header::IF_MATCH)
        .map(|v| {
            v.to_str()
                .map(|s| s.trim().trim_matches('"').to_string())
                .map_err(|_| ApiError::BadRequest("unreadable If-Match header".into()))
        })
        .transpose()
}

async fn put_annotations(
    State(st): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    st.require(&id)?;
    let expected = if_match(&headers)?;
    let ann: AnnotationSet = serde_json::from_slice(&body)
        .map_err(|e| ApiError::Unprocessable(format!("invalid annotation document: {e}")))?;
    if ann.recording_id != id {
        return Err(ApiError::Unprocessable(format!(
            "recording_id {:?} does not match {id:?}",
            ann.recording_id
        )));
    }
    let lock = st.lock_for(&id);
    let _guard = lock.lock().await;
    blocking(move || {
        let seq = st.data.load_recording(&id)?;
        ann.validate(seq.len())
            .map_err(|e: AnnotationError| ApiError::Unprocessable(e.to_string()))?;

        let path = st.data.annotation_path(&id);
        let current = match std::fs::read(&path) {
            Ok(bytes) => Some(version_token(&bytes)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(ApiError::Internal(e.to_string())),
        };
        if let Some(want) = expected {
            let ok = match &current {
                Some(cur) => want == "*" || &want == cur,
                None => false,
            };
            if !ok {
                return Err(ApiError::Conflict { current });
            }
        }

        let mut text = serde_json::to_string_pretty(&ann).expect("annotations serialize");
        text.push('\n');
        let dir = path.parent().expect("annotation path has a parent");
        std::fs::create_dir_all(dir).map_err(|e| ApiError::Internal(e.to_string()))?;
        let tmp = dir.join(format!(".{id}.json.tmp"));
        std::fs::write(&tmp, &text).map_err(|e| ApiError::Internal(e.to_string()))?;
        std::fs::rename(&tmp, &path).map_err(|e| ApiError::Internal(e.to_string()))?;

        let version = version_token(text.as_bytes());
        let mut resp = Json(json!({ "id": id, "version": version })).into_response();
        resp.headers_mut().insert(header::ETAG, etag(&version));
        Ok(resp)
    })
    .await
}

#[derive(Debug, Deserialize)]
struct RunQuery {
    mode: Option<String>,
}

async fn post_run(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<RunQuery>,
) -> ApiResult<Response> {
    st.require(&id)?;
    let mode: ExecutionMode = match q.mode.as_deref() {
        None => ExecutionMode::ClosedLoop,
        Some(m) => m.parse().map_err(ApiError::BadRequest)?,
    };
    let lock = st.lock_for(&id);
    let _guard = lock.lock().await;
    blocking(move || {
        let settings = st.data.settings()?;
        let out = st.data.run_dir(&id);
        st.data.run(&id, &settings, mode, &out)?;
        let summary = std::fs::read(out.join(SUMMARY_FILE)).map_err(|e| ApiError::Internal(e.to_string()))?;
        Ok(([(header::CONTENT_TYPE, "application/json")], summary).into_response())
    })
    .await
}

fn valid_export_name(name: &str) -> bool {
    !name.starts_with('.')
        && !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

async fn get_export(
    State(st): State<AppState>,
    Path((id, file)): Path<(String, String)>,
) -> ApiResult<Response> {
    st.require(&id)?;
    if !valid_export_name(&file) {
        return Err(ApiError::NotFound(format!("no export {file:?}")));
    }
    let path = st.data.run_dir(&id).join(&file);
    match tokio::fs::read(&path).await {
        Ok(bytes) => {
            let kind = if file.ends_with(".json") { "application/json" } else { "text/csv" };
            Ok(([(header::CONTENT_TYPE, kind)], bytes).into_response())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(ApiError::NotFound(format!("no export {file:?} for {id:?}")))
        }
        Err(e) => Err(ApiError::Internal(e.to_string())),
    }
}

async fn not_found() -> ApiError {
    ApiError::NotFound("no such endpoint".into())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/recordings", get(list_recordings))
        .route("/recordings/{id}", get(get_recording))
        .route("/recordings/{id}/angles", get(get_angles))
        .route("/recordings/{id}/noise", get(get_noise))
        .route("/recordings/{id}/annotations", get(get_annotations).put(put_annotations))
        .route("/recordings/{id}/run", post(post_run))
        .route("/recordings/{id}/export/{file}", get(get_export))
        .fallback(not_found)
        .with_state(state)
}

/// Serves the API on an already bound listener.
pub async fn serve_on(listener: tokio::net::TcpListener, data_dir: PathBuf) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::new(data_dir))).await
}

/// Binds `0.0.0.0:port` and serves until the process ends.
pub async fn serve(port: u16, data_dir: PathBuf) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port))).await?;
    serve_on(listener, data_dir).await
}

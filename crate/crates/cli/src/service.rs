use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, RwLock};

use ambiq_core::{DetectionPayload, MatchConfig, TableSchema};
use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::detector::Detector;

const INDEX_HTML: &str = include_str!("../../../webui/dist/index.html");
const APP_JS: &str = include_str!("../../../webui/dist/app.js");
const RENDER_JS: &str = include_str!("../../../webui/dist/render.js");
const STYLE_CSS: &str = include_str!("../../../webui/dist/style.css");

/// Model, registered tables and matching settings shared by all requests.
#[derive(Debug)]
pub struct ServiceState {
    pub detector: Detector,
    pub tables: RwLock<BTreeMap<String, TableSchema>>,
    pub cfg: MatchConfig,
    /// Serves the UI from disk when set, otherwise the embedded bundle.
    pub ui_dir: Option<PathBuf>,
}

pub type SharedState = Arc<ServiceState>;

impl ServiceState {
    pub fn new(detector: Detector, tables: Vec<TableSchema>, cfg: MatchConfig) -> ServiceState {
        let tables = tables.into_iter().map(|t| (t.table_id.clone(), t)).collect();
        ServiceState { detector, tables: RwLock::new(tables), cfg, ui_dir: None }
    }

    pub fn with_ui_dir(mut self, dir: Option<PathBuf>) -> ServiceState {
        self.ui_dir = dir;
        self
    }

    /// Detection for one request, shared by the HTTP handler and tests.
    pub fn detect(&self, request: &DetectRequest) -> Result<DetectionPayload, ApiError> {
        if request.question.trim().is_empty() {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty question"));
        }
        let schema = {
            let tables = self.tables.read().unwrap_or_else(|e| e.into_inner());
            tables.get(&request.table_id).cloned()
        };
        let schema = schema.ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown table_id"))?;
        self.detector
            .detect(&request.question, &schema, &self.cfg)
            .map(|r| r.payload())
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectRequest {
    pub table_id: String,
    pub question: String,
}

/// Error response with body `{"error": message}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> ApiError {
        ApiError { status, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("invalid request body: {e}")))
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/health", get(health))
        .route("/tables", get(list_tables).post(register_table))
        .route("/detect", axum::routing::post(handle_detect))
        .route("/assets/{file}", get(asset))
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "ok": true }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TablesResponse {
    pub tables: Vec<TableSchema>,
}

async fn list_tables(State(state): State<SharedState>) -> Json<TablesResponse> {
    let tables = state.tables.read().unwrap_or_else(|e| e.into_inner());
    Json(TablesResponse { tables: tables.values().cloned().collect() })
}

/// Registers or replaces a table. Posting the same schema twice leaves the same state.
async fn register_table(State(state): State<SharedState>, body: Bytes) -> Result<Json<serde_json::Value>, ApiError> {
    let schema: TableSchema = parse_body(&body)?;
    if schema.table_id.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty table_id"));
    }
    schema.validate().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let id = schema.table_id.clone();
    let columns = schema.columns.len();
    state.tables.write().unwrap_or_else(|e| e.into_inner()).insert(id.clone(), schema);
    Ok(Json(json!({ "table_id": id, "columns": columns })))
}

/// `POST /detect` with body `{"table_id", "question"}`.
pub async fn handle_detect(State(state): State<SharedState>, body: Bytes) -> Result<Json<DetectionPayload>, ApiError> {
    let request: DetectRequest = parse_body(&body)?;
    let payload = tokio::task::spawn_blocking(move || state.detect(&request))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(payload))
}

async fn index(State(state): State<SharedState>) -> Response {
    serve_asset(&state, "index.html").await
}

async fn asset(State(state): State<SharedState>, UrlPath(file): UrlPath<String>) -> Response {
    serve_asset(&state, &file).await
}

fn content_type(file: &str) -> &'static str {
    match Path::new(file).extension().and_then(|x| x.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") => "text/javascript; charset=utf-8",
        Some("css") => "text/css; charset=utf-8",
        Some("json") => "application/json",
        _ => "application/octet-stream",
    }
}

async fn serve_asset(state: &ServiceState, file: &str) -> Response {
    let not_found = || ApiError::new(StatusCode::NOT_FOUND, "not found").into_response();
    let body: Vec<u8> = match &state.ui_dir {
        Some(dir) => {
            let rel = Path::new(file);
            if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
                return not_found();
            }
            match tokio::fs::read(dir.join(rel)).await {
                Ok(bytes) => bytes,
                Err(_) => return not_found(),
            }
        }
        None => match file {
            "index.html" => INDEX_HTML,
            "app.js" => APP_JS,
            "render.js" => RENDER_JS,
            "style.css" => STYLE_CSS,
            _ => return not_found(),
        }
        .as_bytes()
        .to_vec(),
    };
    ([(header::CONTENT_TYPE, content_type(file))], body).into_response()
}

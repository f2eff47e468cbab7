//! HTTP facade over a corpus store.
//!
//! | method | path                          | body / response                         |
//! |--------|-------------------------------|-----------------------------------------|
//! | POST   | `/graphql`                    | `{query, variables}` → query envelope   |
//! | GET    | `/contracts/{address}/{kind}` | artifact text (`source`/`abi`/`bytecode`) |
//! | POST   | `/download`                   | `{addresses}` → ZIP archive             |
//! | GET    | `/stats/daily`                | `[{date, count}]`                       |
//!
//! The service only reads; a store written by another process is picked up
//! on the next request.

mod archive;
mod config;

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Map, Value};
use smac_core::query::respond;
use smac_core::store::{ArtifactKind, StoreError};
use smac_core::{ContractAddress, CorpusStore};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use archive::{build_archive, ArchiveManifest};
pub use config::{ConfigError, ServiceConfig, DEFAULT_BIND, DEFAULT_BODY_LIMIT, DEFAULT_MAX_ROWS};

#[derive(Clone)]
struct AppState {
    store: Arc<CorpusStore>,
    max_rows: usize,
}

/// Builds the service around an open store.
pub fn router(store: Arc<CorpusStore>, config: &ServiceConfig) -> Router {
    let state = AppState { store, max_rows: config.max_rows.max(1) };
    Router::new()
        .route("/graphql", post(graphql))
        .route("/contracts/{address}/{kind}", get(contract_artifact))
        .route("/download", post(download))
        .route("/stats/daily", get(daily_stats))
        .layer(DefaultBodyLimit::max(config.body_limit))
        .layer(cors(&config.cors_origin))
        .with_state(state)
}

fn cors(origin: &str) -> CorsLayer {
    let allow = if origin == "*" {
        AllowOrigin::any()
    } else {
        AllowOrigin::exact(HeaderValue::from_str(origin).unwrap_or(HeaderValue::from_static("null")))
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

/// Opens the store, binds, and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    config.validate().map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    let store = CorpusStore::open(&config.store_path).map_err(std::io::Error::other)?;
    let app = router(Arc::new(store), &config);
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, store = %config.store_path.display(), "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn client_error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn store_error(e: StoreError) -> Response {
    match e {
        StoreError::NotFound(a) => client_error(StatusCode::NOT_FOUND, format!("address {a} not found")),
        other => {
            tracing::error!(error = %other, "store failure");
            client_error(StatusCode::INTERNAL_SERVER_ERROR, other.to_string())
        }
    }
}

/// The error response, if re-reading the store failed.
fn refresh(store: &CorpusStore) -> Option<Response> {
    store.refresh().err().map(store_error)
}

async fn blocking<F>(f: F) -> Response
where
    F: FnOnce() -> Response + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| client_error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

/// Pulls `query` and `variables` out of a request body.
pub fn parse_graphql_body(body: &[u8]) -> Result<(String, Map<String, Value>), String> {
    let value: Value = serde_json::from_slice(body).map_err(|e| format!("body is not JSON: {e}"))?;
    let Value::Object(mut obj) = value else {
        return Err("body must be a JSON object".into());
    };
    let query = match obj.remove("query") {
        Some(Value::String(q)) => q,
        Some(_) => return Err("`query` must be a string".into()),
        None => return Err("missing `query`".into()),
    };
    let variables = match obj.remove("variables") {
        None | Some(Value::Null) => Map::new(),
        Some(Value::Object(m)) => m,
        Some(_) => return Err("`variables` must be an object".into()),
    };
    Ok((query, variables))
}

async fn graphql(State(state): State<AppState>, body: Bytes) -> Response {
    let (query, variables) = match parse_graphql_body(&body) {
        Ok(parts) => parts,
        Err(message) => return client_error(StatusCode::BAD_REQUEST, message),
    };
    blocking(move || {
        if let Some(r) = refresh(&state.store) {
            return r;
        }
        let response = respond(&query, &variables, &state.store, state.max_rows);
        ([(header::CONTENT_TYPE, "application/json")], response.to_json()).into_response()
    })
    .await
}

async fn contract_artifact(State(state): State<AppState>, Path((address, kind)): Path<(String, String)>) -> Response {
    let address: ContractAddress = match address.parse() {
        Ok(a) => a,
        Err(e) => return client_error(StatusCode::BAD_REQUEST, format!("{e}")),
    };
    let kind: ArtifactKind = match kind.parse() {
        Ok(k) => k,
        Err(_) => return client_error(StatusCode::BAD_REQUEST, format!("unknown artifact kind {kind:?}")),
    };
    blocking(move || {
        if let Some(r) = refresh(&state.store) {
            return r;
        }
        match state.store.artifact_bytes(&address, kind) {
            Ok(bytes) => ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], bytes).into_response(),
            Err(e) => store_error(e),
        }
    })
    .await
}

async fn download(State(state): State<AppState>, body: Bytes) -> Response {
    let addresses = match parse_download_body(&body, state.max_rows) {
        Ok(a) => a,
        Err(message) => return client_error(StatusCode::BAD_REQUEST, message),
    };
    blocking(move || {
        if let Some(r) = refresh(&state.store) {
            return r;
        }
        match build_archive(&state.store, &addresses) {
            Ok((bytes, _)) => (
                [
                    (header::CONTENT_TYPE, "application/zip"),
                    (header::CONTENT_DISPOSITION, "attachment; filename=\"contracts.zip\""),
                ],
                bytes,
            )
                .into_response(),
            Err(e) => client_error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        }
    })
    .await
}

/// `{"addresses": [...]}` with 1 to `max` parseable addresses.
pub fn parse_download_body(body: &[u8], max: usize) -> Result<Vec<ContractAddress>, String> {
    let value: Value = serde_json::from_slice(body).map_err(|e| format!("body is not JSON: {e}"))?;
    let list =
        value.get("addresses").and_then(Value::as_array).ok_or("body must be an object with an `addresses` array")?;
    if list.is_empty() {
        return Err("`addresses` is empty".into());
    }
    if list.len() > max {
        return Err(format!("`addresses` holds {} entries, the limit is {max}", list.len()));
    }
    list.iter()
        .map(|v| {
            v.as_str()
                .ok_or_else(|| format!("address {v} is not a string"))?
                .parse::<ContractAddress>()
                .map_err(|e| e.to_string())
        })
        .collect()
}

async fn daily_stats(State(state): State<AppState>) -> Response {
    blocking(move || {
        if let Some(r) = refresh(&state.store) {
            return r;
        }
        Json(state.store.daily_counts()).into_response()
    })
    .await
}

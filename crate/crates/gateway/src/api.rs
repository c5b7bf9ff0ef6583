//! HTTP service under `/api/v1`.
//!
//! Every handler takes a snapshot of the stored project and delegates to
//! the core engine; mutations go through [`ProjectStore`], which serializes
//! writes per project.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use munidss_core::{
    build_semantic_network, portfolio_coverage, Analysis, ImpactEstimate, InfluenceOptions,
    Method, NodeId, Project, Scenario,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::GatewayError;
use crate::render::InfluencePayload;
use crate::store::ProjectStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ApiErrorCode {
    Validation,
    NotFound,
    Conflict,
    Convergence,
    Internal,
}

impl ApiErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ApiErrorCode::Validation => StatusCode::BAD_REQUEST,
            ApiErrorCode::NotFound => StatusCode::NOT_FOUND,
            ApiErrorCode::Conflict => StatusCode::CONFLICT,
            ApiErrorCode::Convergence => StatusCode::UNPROCESSABLE_ENTITY,
            ApiErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ApiErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl ApiError {
    fn new(code: ApiErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            details: None,
        }
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }
}

impl From<GatewayError> for ApiError {
    fn from(err: GatewayError) -> Self {
        use munidss_core::Error as Core;
        use ApiErrorCode::*;

        let message = err.to_string();
        match err {
            GatewayError::Invalid(report) => ApiError::new(Validation, message)
                .with_details(serde_json::to_value(&report).unwrap_or(Value::Null)),
            GatewayError::Engine(Core::Validation(report)) => ApiError::new(Validation, message)
                .with_details(serde_json::to_value(&report).unwrap_or(Value::Null)),
            GatewayError::Parse { line, column, .. } | GatewayError::Schema { line, column, .. } => {
                ApiError::new(Validation, message)
                    .with_details(serde_json::json!({ "line": line, "column": column }))
            }
            GatewayError::UnsupportedVersion(_) | GatewayError::BadRequest(_) => {
                ApiError::new(Validation, message)
            }
            GatewayError::NotFound(_) | GatewayError::Engine(Core::UnknownTarget(_)) => {
                ApiError::new(NotFound, message)
            }
            GatewayError::Conflict { current, supplied } => ApiError::new(Conflict, message)
                .with_details(serde_json::json!({ "current": current, "supplied": supplied })),
            GatewayError::Engine(Core::Convergence { radius }) => ApiError::new(Convergence, message)
                .with_details(serde_json::json!({ "rho_estimate": radius })),
            GatewayError::Engine(Core::Singular) => ApiError::new(Convergence, message),
            GatewayError::Engine(_) => ApiError::new(Validation, message),
            GatewayError::Io { .. } => ApiError::new(Internal, message),
        }
    }
}

impl From<munidss_core::Error> for ApiError {
    fn from(err: munidss_core::Error) -> Self {
        GatewayError::Engine(err).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfluenceQuery {
    #[serde(default)]
    pub method: Method,
    pub k: Option<usize>,
}

impl From<InfluenceQuery> for InfluenceOptions {
    fn from(q: InfluenceQuery) -> Self {
        InfluenceOptions {
            method: q.method,
            k: q.k,
        }
    }
}

fn options(query: Result<Query<InfluenceQuery>, QueryRejection>) -> Result<InfluenceOptions, ApiError> {
    query
        .map(|Query(q)| q.into())
        .map_err(|e| ApiError::new(ApiErrorCode::Validation, e.body_text()))
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| GatewayError::from(e).into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimatesBody {
    #[serde(default)]
    revision: Option<u64>,
    estimates: Vec<ImpactEstimate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIfBody {
    deltas: BTreeMap<NodeId, f64>,
}

type Shared = Arc<ProjectStore>;

async fn get_project(State(store): State<Shared>, Path(id): Path<String>) -> ApiResult<Project> {
    Ok(Json(store.get(&id)?))
}

async fn put_project(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Project> {
    let project: Project = parse_body(&body)?;
    Ok(Json(store.put(&id, project)?))
}

async fn post_estimates(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Project> {
    let body: EstimatesBody = parse_body(&body)?;
    Ok(Json(store.upsert_estimates(&id, body.revision, body.estimates)?))
}

async fn get_influence(
    State(store): State<Shared>,
    Path(id): Path<String>,
    query: Result<Query<InfluenceQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let options = options(query)?;
    let project = store.get(&id)?;
    let analysis = Analysis::new(&project, options)?;
    Ok(Json(InfluencePayload::new(&analysis)).into_response())
}

async fn get_rating(
    State(store): State<Shared>,
    Path((id, target)): Path<(String, String)>,
    query: Result<Query<InfluenceQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let options = options(query)?;
    let project = store.get(&id)?;
    let analysis = Analysis::new(&project, options)?;
    Ok(Json(analysis.rating(&target)?).into_response())
}

async fn post_what_if(
    State(store): State<Shared>,
    Path(id): Path<String>,
    query: Result<Query<InfluenceQuery>, QueryRejection>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let options = options(query)?;
    let body: WhatIfBody = parse_body(&body)?;
    let project = store.get(&id)?;
    let analysis = Analysis::new(&project, options)?;
    let scenario: Scenario = body.deltas;
    Ok(Json(analysis.what_if(&scenario)?).into_response())
}

async fn get_coverage(State(store): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let project = store.get(&id)?;
    Ok(Json(portfolio_coverage(&project.documents)).into_response())
}

async fn get_network(State(store): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let project = store.get(&id)?;
    Ok(Json(build_semantic_network(&project)?).into_response())
}

async fn fallback() -> ApiError {
    ApiError::new(ApiErrorCode::NotFound, "no such endpoint")
}

pub fn router(store: Arc<ProjectStore>) -> Router {
    let api = Router::new()
        .route("/projects/{id}", get(get_project).put(put_project))
        .route("/projects/{id}/estimates", post(post_estimates))
        .route("/projects/{id}/influence", get(get_influence))
        .route("/projects/{id}/ratings/{target}", get(get_rating))
        .route("/projects/{id}/whatif", post(post_what_if))
        .route("/projects/{id}/coverage", get(get_coverage))
        .route("/projects/{id}/network", get(get_network));
    Router::new()
        .nest("/api/v1", api)
        .fallback(fallback)
        .with_state(store)
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub port: u16,
    pub data_dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("data directory: {0}")]
    DataDir(#[source] GatewayError),
    #[error("cannot bind port {port}: {source}")]
    Bind {
        port: u16,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(#[source] std::io::Error),
}

/// Binds the port and serves until Ctrl-C.
pub async fn serve(config: ServeConfig) -> Result<(), ServeError> {
    let store = ProjectStore::open(&config.data_dir).map_err(ServeError::DataDir)?;
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind {
            port: config.port,
            source,
        })?;
    eprintln!("munidss listening on {}", listener.local_addr().map_err(ServeError::Serve)?);
    axum::serve(listener, router(Arc::new(store)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServeError::Serve)
}

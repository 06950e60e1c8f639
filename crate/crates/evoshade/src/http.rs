//! JSON-over-HTTP facade for [`Service`].
//!
//! Evolution steps are CPU-bound, so every service call runs on the blocking
//! pool. Errors are reported as `{"error": {"code", "message"}}` with 400 for
//! validation failures, 404 for unknown ids and 409 for stale candidates.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::service::{CandidateView, ConfigOverrides, Service, ServiceError};
use crate::store::{validate_model, StoreError};

const DEFAULT_PAGE: usize = 50;
const MAX_PAGE: usize = 500;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "validation",
            message: message.into(),
        }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let (status, code) = match &e {
            ServiceError::Validation(_) => (StatusCode::BAD_REQUEST, "validation"),
            ServiceError::NotFound { .. } => (StatusCode::NOT_FOUND, "not_found"),
            ServiceError::StaleCandidate(_) => (StatusCode::CONFLICT, "stale_candidate"),
            ServiceError::Store(StoreError::Validation(_)) => (StatusCode::BAD_REQUEST, "validation"),
            ServiceError::Store(StoreError::NotFound { .. }) => (StatusCode::NOT_FOUND, "not_found"),
            ServiceError::Store(_) => (StatusCode::INTERNAL_SERVER_ERROR, "storage"),
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %e, "request failed");
        }
        ApiError {
            status,
            code,
            message: e.to_string(),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ServiceError::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(result) => result.map_err(ApiError::from),
        Err(e) => {
            tracing::error!(error = %e, "service task panicked");
            Err(ApiError {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                code: "internal",
                message: "internal error".into(),
            })
        }
    }
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/candidates", get(candidates))
        .route("/api/sessions/{id}/step", post(step))
        .route("/api/sessions/{id}/save", post(save))
        .route("/api/sessions/{id}/inject", post(inject))
        .route("/api/transformations", get(list_transformations))
        .route("/api/transformations/{id}", get(get_transformation))
        .route("/api/models", post(upload_model).get(list_models))
        .route("/api/models/{id}", get(get_model))
        .with_state(service)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CreateSessionBody {
    config: Option<ConfigOverrides>,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct CandidatesBody {
    generation: u64,
    candidates: Vec<CandidateView>,
}

async fn create_session(State(svc): State<Arc<Service>>, body: Bytes) -> ApiResult<Response> {
    let req: CreateSessionBody = if body.iter().all(u8::is_ascii_whitespace) {
        CreateSessionBody::default()
    } else {
        parse_body(&body)?
    };
    let view = blocking(move || svc.create_session(req.config.as_ref(), req.seed)).await?;
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn candidates(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Json<CandidatesBody>> {
    let view = blocking(move || svc.candidates(&id)).await?;
    Ok(Json(CandidatesBody {
        generation: view.generation,
        candidates: view.candidates,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepBody {
    selected: Vec<String>,
}

async fn step(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<CandidatesBody>> {
    let req: StepBody = parse_body(&body)?;
    let view = blocking(move || svc.step(&id, &req.selected)).await?;
    Ok(Json(CandidatesBody {
        generation: view.generation,
        candidates: view.candidates,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SaveBody {
    candidate_id: String,
    name: String,
}

async fn save(State(svc): State<Arc<Service>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: SaveBody = parse_body(&body)?;
    let tid = blocking(move || svc.save(&id, &req.candidate_id, &req.name)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "transformation_id": tid }))).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InjectBody {
    transformation_id: String,
}

async fn inject(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<CandidatesBody>> {
    let req: InjectBody = parse_body(&body)?;
    let view = blocking(move || svc.inject(&id, &req.transformation_id)).await?;
    Ok(Json(CandidatesBody {
        generation: view.generation,
        candidates: view.candidates,
    }))
}

#[derive(Deserialize)]
struct PageQuery {
    offset: Option<usize>,
    limit: Option<usize>,
}

impl PageQuery {
    fn bounds(&self) -> (usize, usize) {
        (self.offset.unwrap_or(0), self.limit.unwrap_or(DEFAULT_PAGE).min(MAX_PAGE))
    }
}

async fn list_transformations(
    State(svc): State<Arc<Service>>,
    Query(q): Query<PageQuery>,
) -> ApiResult<Json<serde_json::Value>> {
    let (offset, limit) = q.bounds();
    let page = svc.store().list_transformations(offset, limit);
    Ok(Json(json!({ "total": page.total, "items": page.items })))
}

async fn get_transformation(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> ApiResult<Json<crate::store::TransformationRecord>> {
    Ok(Json(svc.store().get_transformation(&id)?))
}

async fn upload_model(State(svc): State<Arc<Service>>, body: Bytes) -> ApiResult<Response> {
    let summary = validate_model(&body).map_err(|v| ApiError::bad_request(v.join("; ")))?;
    let store = Arc::clone(svc.store());
    let id = blocking(move || Ok(store.put_model(&body, &summary.name)?)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "model_id": id }))).into_response())
}

async fn list_models(
    State(svc): State<Arc<Service>>,
    Query(q): Query<PageQuery>,
) -> ApiResult<Json<serde_json::Value>> {
    let (offset, limit) = q.bounds();
    let page = svc.store().list_models(offset, limit);
    Ok(Json(json!({ "total": page.total, "items": page.items })))
}

/// Returns the stored Model JSON exactly as uploaded.
async fn get_model(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Response> {
    let asset = svc.store().get_model(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], asset.payload).into_response())
}

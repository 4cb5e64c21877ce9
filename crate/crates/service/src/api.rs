//! REST routes. Every error body is `{"error": code, "message": text}`.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crisis_mt_core::leaderboard::{render_report, ReportFormat};
use crisis_mt_core::ReviewStatus;

use crate::service::{ApiError, Principal, ReviewRequest, Service, SubmitRequest};
use crate::state::ExportOptions;

const DEFAULT_PAGE: usize = 50;
const MAX_PAGE: usize = 500;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<Service>>;

fn principal(service: &Service, headers: &HeaderMap) -> ApiResult<Principal> {
    let value = headers.get(header::AUTHORIZATION).map(|v| v.to_str().unwrap_or(""));
    service.authenticate(value)
}

/// JSON body extractor whose rejections use the API error shape.
struct Body<T>(T);

impl<S, T> axum::extract::FromRequest<S> for Body<T>
where
    T: serde::de::DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(rejection) => Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", rejection.body_text())),
        }
    }
}

pub fn router(service: Arc<Service>) -> Router {
    let origins: Vec<HeaderValue> = service
        .config()
        .cors_origins
        .iter()
        .filter_map(|o| HeaderValue::from_str(o).ok())
        .collect();
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::AUTHORIZATION, header::CONTENT_TYPE]);

    Router::new()
        .route("/api/session", get(session))
        .route("/api/pairs", get(pairs))
        .route("/api/pairs/{pair}/segments", post(submit).get(list))
        .route("/api/pairs/{pair}/stats", get(stats))
        .route("/api/pairs/{pair}/phase", post(advance_phase))
        .route("/api/pairs/{pair}/exports", post(create_export))
        .route("/api/segments/{id}", get(segment))
        .route("/api/segments/{id}/review", post(review))
        .route("/api/exports/{id}", get(export))
        .route("/api/exports/{id}/files/{name}", get(export_file))
        .route("/api/leaderboards/{direction}", get(leaderboard))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .layer(cors)
        .with_state(service)
}

async fn session(State(svc): Shared, headers: HeaderMap) -> ApiResult<impl IntoResponse> {
    Ok(Json(principal(&svc, &headers)?))
}

async fn pairs(State(svc): Shared) -> impl IntoResponse {
    Json(svc.pairs())
}

async fn submit(
    State(svc): Shared,
    Path(pair): Path<String>,
    headers: HeaderMap,
    Body(req): Body<SubmitRequest>,
) -> ApiResult<impl IntoResponse> {
    let who = principal(&svc, &headers)?;
    let stored = svc.submit(&who, &pair, req)?;
    Ok((StatusCode::CREATED, Json(stored)))
}

#[derive(Deserialize)]
struct ListQuery {
    status: Option<ReviewStatus>,
    #[serde(default)]
    offset: usize,
    limit: Option<usize>,
}

async fn list(
    State(svc): Shared,
    Path(pair): Path<String>,
    headers: HeaderMap,
    query: Result<Query<ListQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let who = principal(&svc, &headers)?;
    let Query(q) = query.map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", e.body_text()))?;
    let limit = q.limit.unwrap_or(DEFAULT_PAGE).min(MAX_PAGE);
    Ok(Json(svc.list(&who, &pair, q.status, q.offset, limit)?))
}

async fn stats(State(svc): Shared, Path(pair): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(svc.stats(&pair)?))
}

async fn advance_phase(State(svc): Shared, Path(pair): Path<String>, headers: HeaderMap) -> ApiResult<impl IntoResponse> {
    let who = principal(&svc, &headers)?;
    Ok(Json(svc.advance_phase(&who, &pair)?))
}

async fn create_export(
    State(svc): Shared,
    Path(pair): Path<String>,
    headers: HeaderMap,
    body: axum::body::Bytes,
) -> ApiResult<impl IntoResponse> {
    let who = principal(&svc, &headers)?;
    let options: ExportOptions = if body.iter().all(u8::is_ascii_whitespace) {
        ExportOptions::default()
    } else {
        serde_json::from_slice(&body)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", format!("export options: {e}")))?
    };
    let record = svc.create_export(&who, &pair, options)?;
    let location = format!("/api/exports/{}", record.id);
    Ok((StatusCode::CREATED, [(header::LOCATION, location)], Json(record)))
}

async fn segment(State(svc): Shared, Path(id): Path<String>, headers: HeaderMap) -> ApiResult<impl IntoResponse> {
    let who = principal(&svc, &headers)?;
    Ok(Json(svc.segment(&who, &id)?))
}

async fn review(
    State(svc): Shared,
    Path(id): Path<String>,
    headers: HeaderMap,
    Body(req): Body<ReviewRequest>,
) -> ApiResult<impl IntoResponse> {
    let who = principal(&svc, &headers)?;
    Ok(Json(svc.review(&who, &id, req)?))
}

async fn export(State(svc): Shared, Path(id): Path<String>, headers: HeaderMap) -> ApiResult<impl IntoResponse> {
    let who = principal(&svc, &headers)?;
    Ok(Json(svc.export(&who, &id)?))
}

async fn export_file(
    State(svc): Shared,
    Path((id, name)): Path<(String, String)>,
    headers: HeaderMap,
) -> ApiResult<impl IntoResponse> {
    let who = principal(&svc, &headers)?;
    let bytes = svc.export_file(&who, &id, &name)?;
    let kind = if name.ends_with(".json") || name.ends_with(".jsonl") {
        "application/json"
    } else {
        "text/plain; charset=utf-8"
    };
    Ok(([(header::CONTENT_TYPE, kind)], bytes))
}

#[derive(Deserialize)]
struct BoardQuery {
    reference: Option<String>,
    #[serde(default)]
    format: Option<String>,
}

async fn leaderboard(
    State(svc): Shared,
    Path(direction): Path<String>,
    Query(q): Query<BoardQuery>,
) -> ApiResult<Response> {
    let board = svc.leaderboard(&direction, q.reference.as_deref())?;
    Ok(match q.format.as_deref() {
        None | Some("json") => Json(board).into_response(),
        Some("markdown") => (
            [(header::CONTENT_TYPE, "text/markdown; charset=utf-8")],
            render_report(&board, ReportFormat::Markdown),
        )
            .into_response(),
        Some(other) => {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_input",
                format!("unknown format {other:?} (json or markdown)"),
            ))
        }
    })
}

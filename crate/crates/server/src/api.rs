//! JSON-over-HTTP interface.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | GET | `/projects` | | project summaries |
//! | POST | `/projects` | `{name, sourceLang, targetLang}` | summary (201) |
//! | GET | `/projects/{id}` | | summary |
//! | GET | `/projects/{id}/segments` | | `[{id, text}]` |
//! | POST | `/projects/{id}/segments` | `{segments: [{id, text}]}` | `{added}` |
//! | POST | `/projects/{id}/tm` | TM file text | `{added, warnings}` |
//! | POST | `/projects/{id}/external/{origin}` | `segmentId TAB text` lines | `{stored, warnings}` |
//! | GET | `/projects/{id}/segments/{sid}/suggestions` | | suggestion set |
//! | POST | `/projects/{id}/sessions` | `{translatorId}` | `{sessionId}` (201) |
//! | POST | `/projects/{id}/sessions/{sid}/records` | post-edit | record (201) |
//! | GET | `/projects/{id}/sessions/{sid}/log.xml` | | XML log |
//!
//! Errors are `{"error": kind, "message": ..}` plus the offending
//! `projectId` / `segmentId` / `sessionId` where one applies.

use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use postedit_core::Origin;

use crate::error::ServiceError;
use crate::store::{PostEdit, SegmentRow};
use crate::workbench::Workbench;

/// Upload size cap for TM and suggestion tables.
pub const MAX_BODY_BYTES: usize = 64 * 1024 * 1024;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self.kind() {
            "notFound" => StatusCode::NOT_FOUND,
            "conflict" => StatusCode::CONFLICT,
            "invalid" => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut body = json!({ "error": self.kind(), "message": self.to_string() });
        match &self {
            ServiceError::ProjectNotFound(p) => body["projectId"] = json!(p),
            ServiceError::SegmentNotFound { project, segment } => {
                body["projectId"] = json!(project);
                body["segmentId"] = json!(segment);
            }
            ServiceError::SessionNotFound { project, session } => {
                body["projectId"] = json!(project);
                body["sessionId"] = json!(session);
            }
            _ => {}
        }
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ServiceError>;
type Shared = State<Arc<Workbench>>;

/// Runs store work (fsync, scoring) off the async worker threads.
async fn blocking<T: Send + 'static>(
    wb: Arc<Workbench>,
    f: impl FnOnce(&Workbench) -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(move || f(&wb))
        .await
        .map_err(|e| ServiceError::Storage(e.to_string()))?
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct NewProject {
    name: String,
    source_lang: String,
    target_lang: String,
}

#[derive(Deserialize)]
struct NewSegments {
    segments: Vec<SegmentRow>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct NewSession {
    translator_id: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionCreated {
    session_id: String,
    translator_id: String,
}

pub fn router(workbench: Arc<Workbench>) -> Router {
    Router::new()
        .route("/projects", get(list_projects).post(create_project))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/segments", get(list_segments).post(add_segments))
        .route("/projects/{id}/tm", post(upload_tm))
        .route("/projects/{id}/external/{origin}", post(ingest_external))
        .route("/projects/{id}/segments/{sid}/suggestions", get(suggestions))
        .route("/projects/{id}/sessions", post(create_session))
        .route("/projects/{id}/sessions/{sid}/records", post(submit_record))
        .route("/projects/{id}/sessions/{sid}/log.xml", get(download_log))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(workbench)
}

async fn list_projects(State(wb): Shared) -> impl IntoResponse {
    Json(wb.projects())
}

async fn create_project(State(wb): Shared, Json(req): Json<NewProject>) -> ApiResult<impl IntoResponse> {
    let summary = blocking(wb, move |wb| wb.create_project(&req.name, &req.source_lang, &req.target_lang)).await?;
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn get_project(State(wb): Shared, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(wb.project(&id)?))
}

async fn list_segments(State(wb): Shared, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(wb.segments(&id)?))
}

async fn add_segments(
    State(wb): Shared,
    Path(id): Path<String>,
    Json(req): Json<NewSegments>,
) -> ApiResult<impl IntoResponse> {
    let added = blocking(wb, move |wb| wb.add_segments(&id, req.segments)).await?;
    Ok(Json(json!({ "added": added })))
}

async fn upload_tm(State(wb): Shared, Path(id): Path<String>, body: String) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(wb, move |wb| wb.upload_tm(&id, &body)).await?))
}

async fn ingest_external(
    State(wb): Shared,
    Path((id, origin)): Path<(String, String)>,
    body: String,
) -> ApiResult<impl IntoResponse> {
    let origin: Origin = origin.parse().map_err(ServiceError::Invalid)?;
    Ok(Json(blocking(wb, move |wb| wb.ingest_external(&id, origin, &body)).await?))
}

async fn suggestions(State(wb): Shared, Path((id, sid)): Path<(String, String)>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(wb, move |wb| wb.suggestions(&id, &sid)).await?))
}

async fn create_session(
    State(wb): Shared,
    Path(id): Path<String>,
    Json(req): Json<NewSession>,
) -> ApiResult<impl IntoResponse> {
    let translator_id = req.translator_id.trim().to_string();
    let session_id = blocking(wb, move |wb| wb.create_session(&id, &req.translator_id)).await?;
    let body = SessionCreated {
        session_id,
        translator_id,
    };
    Ok((StatusCode::CREATED, Json(body)))
}

async fn submit_record(
    State(wb): Shared,
    Path((id, sid)): Path<(String, String)>,
    Json(edit): Json<PostEdit>,
) -> ApiResult<impl IntoResponse> {
    let record = blocking(wb, move |wb| wb.submit_postedit(&id, &sid, &edit)).await?;
    Ok((StatusCode::CREATED, Json(record)))
}

async fn download_log(State(wb): Shared, Path((id, sid)): Path<(String, String)>) -> ApiResult<impl IntoResponse> {
    let xml = wb.log_xml(&id, &sid)?;
    Ok(([(header::CONTENT_TYPE, "application/xml; charset=utf-8")], xml))
}


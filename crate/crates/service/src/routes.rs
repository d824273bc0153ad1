use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tactile_core::analysis::{analyze_csv, cohort_report, observations_from_sessions, PropertySelection};
use tactile_core::device::format_command;
use tactile_core::experiment::{
    build_condition_grid, Condition, CRITERIA_CLOTHS, FABRIC_CATALOG, LIKERT_MAX, LIKERT_MIN,
};
use uuid::Uuid;

use crate::error::ApiError;
use crate::lab::{safety_sweep, simulate, sweep_csv, TraceRequest};
use crate::state::{AppState, ResponseSubmission, SessionView};

type ApiResult<T> = Result<T, ApiError>;

pub fn api() -> Router<AppState> {
    Router::new()
        .route("/api/conditions", get(conditions))
        .route("/api/catalog", get(catalog))
        .route("/api/sessions", get(list_sessions).post(create_session))
        .route("/api/sessions/{id}", get(session))
        .route("/api/sessions/{id}/next", get(next))
        .route("/api/sessions/{id}/present", post(present))
        .route("/api/sessions/{id}/release", post(release))
        .route("/api/sessions/{id}/responses", post(respond))
        .route("/api/sessions/{id}/distinct", post(distinct))
        .route("/api/sessions/{id}/export", get(export))
        .route("/api/sessions/{id}/analysis", get(analysis))
        .route("/api/trace", get(trace))
        .route("/api/safety", get(safety))
        .route("/api/device", get(device))
        .route("/api/device/audit", get(audit))
        .route("/api/device/command", post(device_command))
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::new(e.status(), "BAD_REQUEST", e.body_text()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(v)| v).map_err(|e| ApiError::validation(e.body_text()))
}

fn session_id(raw: &str) -> ApiResult<Uuid> {
    raw.parse().map_err(|_| ApiError::not_found(format!("session {raw}")))
}

fn csv(text: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], text).into_response()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Serialize)]
struct ConditionInfo {
    index: usize,
    label: String,
    condition: Condition,
    commands: Vec<String>,
}

async fn conditions() -> Json<Vec<ConditionInfo>> {
    Json(
        build_condition_grid()
            .into_iter()
            .map(|c| ConditionInfo {
                index: c.index(),
                label: c.label(),
                condition: c,
                commands: c.device_commands().iter().map(format_command).collect(),
            })
            .collect(),
    )
}

async fn catalog() -> Json<serde_json::Value> {
    let fabrics: Vec<_> = FABRIC_CATALOG
        .iter()
        .enumerate()
        .map(|(i, name)| serde_json::json!({ "index": i + 1, "name": name }))
        .collect();
    let criteria: Vec<_> = CRITERIA_CLOTHS
        .iter()
        .map(|(scale, anchors)| {
            let anchors: Vec<_> =
                anchors.iter().map(|(pole, cloth)| serde_json::json!({ "pole": pole, "cloth": cloth })).collect();
            serde_json::json!({ "scale": scale, "anchors": anchors })
        })
        .collect();
    Json(serde_json::json!({
        "fabrics": fabrics,
        "criteria": criteria,
        "likert": { "min": LIKERT_MIN, "max": LIKERT_MAX },
    }))
}

async fn list_sessions(State(app): State<AppState>) -> Json<Vec<SessionView>> {
    Json(app.sessions())
}

#[derive(Deserialize)]
struct NewSession {
    participant_id: String,
    seed: u64,
}

async fn create_session(
    State(app): State<AppState>,
    payload: Result<Json<NewSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let req = body(payload)?;
    Ok((StatusCode::CREATED, Json(app.create_session(&req.participant_id, req.seed)?)))
}

#[derive(Serialize)]
struct SessionDetail {
    #[serde(flatten)]
    view: SessionView,
    live: bool,
}

fn is_live(app: &AppState, id: Uuid) -> bool {
    app.device().live.is_some_and(|l| l.session == id)
}

async fn session(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionDetail>> {
    let id = session_id(&id)?;
    Ok(Json(SessionDetail { view: app.session(id)?, live: is_live(&app, id) }))
}

#[derive(Deserialize, Default)]
struct NextQuery {
    #[serde(default)]
    view: Option<String>,
}

/// Participant-facing step: no hint of the applied voltage or frequency.
#[derive(Serialize)]
struct BlindedStep {
    session_id: Uuid,
    step: usize,
    total: usize,
    done: bool,
    live: bool,
}

#[derive(Serialize)]
struct ExperimenterStep {
    #[serde(flatten)]
    step: BlindedStep,
    condition: Option<Condition>,
    label: Option<String>,
    commands: Vec<String>,
}

async fn next(
    State(app): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<NextQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let id = session_id(&id)?;
    let q = query(q)?;
    let view = app.session(id)?;
    let current = view.current();
    let step = BlindedStep { session_id: id, step: view.cursor, total: view.total, done: current.is_none(), live: is_live(&app, id) };
    match q.view.as_deref() {
        None | Some("participant") | Some("blinded") => Ok(Json(step).into_response()),
        Some("experimenter") => Ok(Json(ExperimenterStep {
            step,
            condition: current,
            label: current.map(|c| c.label()),
            commands: current.map(|c| c.device_commands().iter().map(format_command).collect()).unwrap_or_default(),
        })
        .into_response()),
        Some(other) => Err(ApiError::validation(format!("unknown view '{other}'; use participant or experimenter"))),
    }
}

async fn present(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(app.present(session_id(&id)?).await?).into_response())
}

async fn release(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(app.release(session_id(&id)?).await?).into_response())
}

async fn respond(
    State(app): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<ResponseSubmission>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let id = session_id(&id)?;
    app.ensure_session(id).await?;
    let sub = body(payload)?;
    Ok((StatusCode::CREATED, Json(app.record_response(id, sub).await?)))
}

#[derive(Deserialize)]
struct DistinctCount {
    count: u8,
}

async fn distinct(
    State(app): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<DistinctCount>, JsonRejection>,
) -> ApiResult<Json<SessionView>> {
    let id = session_id(&id)?;
    app.ensure_session(id).await?;
    let req = body(payload)?;
    Ok(Json(app.record_distinct(id, req.count).await?))
}

async fn export(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let text = app.export(session_id(&id)?).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

#[derive(Deserialize, Default)]
struct FormatQuery {
    #[serde(default)]
    format: Format,
}

async fn analysis(
    State(app): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<FormatQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let id = session_id(&id)?;
    app.ensure_session(id).await?;
    let q = query(q)?;
    let logs = app.complete_logs().await;
    if logs.len() < 2 {
        return Err(ApiError::conflict(
            "TOO_FEW_SESSIONS",
            format!("analysis needs at least 2 complete sessions, have {}", logs.len()),
        ));
    }
    match q.format {
        Format::Json => Ok(Json(cohort_report(&logs)?).into_response()),
        Format::Csv => Ok(csv(analyze_csv(&observations_from_sessions(&logs)?, &PropertySelection::All)?)),
    }
}

#[derive(Deserialize)]
struct TraceQuery {
    v: f64,
    f: Option<f64>,
    ms: f64,
    rate: Option<f64>,
    #[serde(default)]
    format: Format,
}

async fn trace(State(app): State<AppState>, q: Result<Query<TraceQuery>, QueryRejection>) -> ApiResult<Response> {
    let q = query(q)?;
    let config = app.config();
    let req = TraceRequest { voltage: q.v, frequency: q.f, duration_ms: q.ms, sample_rate: q.rate };
    let result = simulate(&config.limits, &config.booster, &req)?;
    Ok(match q.format {
        Format::Json => Json(result).into_response(),
        Format::Csv => csv(result.to_csv()),
    })
}

async fn safety(State(app): State<AppState>, q: Result<Query<FormatQuery>, QueryRejection>) -> ApiResult<Response> {
    let q = query(q)?;
    let rows = safety_sweep(&app.config().limits)?;
    Ok(match q.format {
        Format::Json => Json(rows).into_response(),
        Format::Csv => csv(sweep_csv(&rows)),
    })
}

async fn device(State(app): State<AppState>) -> Response {
    Json(app.device()).into_response()
}

async fn audit(State(app): State<AppState>) -> Response {
    Json(app.audit().await).into_response()
}

#[derive(Deserialize)]
struct CommandLine {
    line: String,
}

async fn device_command(
    State(app): State<AppState>,
    payload: Result<Json<CommandLine>, JsonRejection>,
) -> ApiResult<Response> {
    let req = body(payload)?;
    Ok(Json(app.device_command(&req.line).await?).into_response())
}

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use taa_core::graph::FrontierPair;
use taa_core::language::{AttemptRecord, Expr};
use taa_core::semantics::{Configuration, Scene, SceneWire};
use taa_core::tutor::SceneIntervention;
use taa_core::Error as CoreError;
use taa_harness::{ExperimentConfig, MetricsRecord, StepMode, Trainer};

use crate::session::{GraphView, Session, SessionGuard, StateView};
use crate::AppState;

/// A JSON error body with a status code.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.body[key] = value;
        self
    }

    pub(crate) fn not_found() -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown session")
    }

    fn busy() -> Self {
        Self::new(StatusCode::CONFLICT, "session is busy")
    }

    fn unprocessable(e: &CoreError) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Every malformed body is a 400, including well-formed JSON of the wrong shape.
fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    let text = if body.iter().all(u8::is_ascii_whitespace) { &b"{}"[..] } else { &body[..] };
    serde_json::from_slice(text).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed JSON: {e}")))
}

fn session(state: &AppState, id: &str) -> ApiResult<Arc<Session>> {
    state.sessions.get(id).ok_or_else(ApiError::not_found)
}

fn writer(session: &Session) -> ApiResult<SessionGuard> {
    session.try_writer().ok_or_else(ApiError::busy)
}

#[derive(Serialize)]
pub struct Created {
    pub id: String,
    pub state: StateView,
}

pub async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<Created>)> {
    let config: ExperimentConfig = parse(&body)?;
    let trainer = Trainer::new(config).map_err(|e| {
        ApiError::new(StatusCode::BAD_REQUEST, e.to_string()).with("field", Value::from(e.field))
    })?;
    let trainer = trainer.with_events();
    let view = StateView::of(&trainer);
    let id = state.sessions.insert(Session::new(trainer));
    log::info!("created session {id}");
    Ok((StatusCode::CREATED, Json(Created { id, state: view })))
}

pub async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.sessions.remove(&id).ok_or_else(ApiError::not_found)?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn get_state(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<StateView>> {
    let session = session(&state, &id)?;
    let trainer = session.reader().await;
    Ok(Json(StateView::of(&trainer)))
}

#[derive(Deserialize)]
pub struct GraphQuery {
    #[serde(default)]
    full: bool,
}

pub async fn get_graph(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<GraphQuery>,
) -> ApiResult<Json<GraphView>> {
    let session = session(&state, &id)?;
    let trainer = session.reader().await;
    Ok(Json(GraphView::of(&trainer, q.full)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodesRequest {
    #[serde(default)]
    pub mode: StepMode,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

#[derive(Serialize)]
pub struct EpisodesResponse {
    pub episodes: Vec<MetricsRecord>,
    pub social_episodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<&'static str>,
    pub state: StateView,
}

pub async fn post_episodes(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<EpisodesResponse>> {
    let request: EpisodesRequest = parse(&body)?;
    let session = session(&state, &id)?;
    let mut guard = writer(&session)?;
    let response = tokio::task::spawn_blocking(move || {
        let mut episodes = Vec::with_capacity(request.count);
        let mut reason = None;
        for _ in 0..request.count {
            match guard.step(request.mode) {
                Ok(Some(record)) => episodes.push(record),
                Ok(None) => {
                    reason = Some("space fully discovered");
                    break;
                }
                Err(e) => {
                    session.publish(&mut guard);
                    return Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()));
                }
            }
            session.publish(&mut guard);
        }
        let social_episodes = episodes.iter().filter(|r| r.mode == taa_harness::RecordMode::Social).count();
        Ok(EpisodesResponse { episodes, social_episodes, reason, state: StateView::of(&guard) })
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(response))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRequest {
    pub scene: Option<SceneWire>,
    pub intervention: Option<SceneIntervention>,
}

#[derive(Serialize)]
pub struct SceneResponse {
    pub configuration: Configuration,
    pub state: StateView,
}

pub async fn post_scene(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<SceneResponse>> {
    let request: SceneRequest = parse(&body)?;
    let session = session(&state, &id)?;
    let mut trainer = writer(&session)?;
    let world = trainer.graph().world();
    let result = match (request.scene, request.intervention) {
        (Some(wire), None) => Scene::from_wire(world, &wire).and_then(|scene| trainer.place_scene(scene)),
        (None, Some(intervention)) => trainer.intervene(&intervention),
        _ => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "expected exactly one of `scene` or `intervention`"))
        }
    };
    result.map_err(|e| ApiError::unprocessable(&e))?;
    session.publish(&mut trainer);
    Ok(Json(SceneResponse { configuration: trainer.current(), state: StateView::of(&trainer) }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstructionRequest {
    pub expression: Expr,
    #[serde(default = "one")]
    pub attempts: usize,
}

#[derive(Serialize)]
pub struct InstructionResponse {
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<&'static str>,
    pub attempts: Vec<AttemptRecord>,
    pub state: StateView,
}

pub async fn post_instruction(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<InstructionResponse>> {
    let request: InstructionRequest = parse(&body)?;
    if request.attempts == 0 {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "attempts must be at least 1"));
    }
    let session = session(&state, &id)?;
    let mut trainer = writer(&session)?;
    let outcome = trainer.instruct(&request.expression, request.attempts);
    session.publish(&mut trainer);
    let outcome = outcome.map_err(|e| match &e {
        CoreError::UnknownSentence(text) => ApiError::unprocessable(&e).with(
            "nearest",
            Value::from(trainer.inventory().nearest(text, 3).into_iter().map(String::from).collect::<Vec<_>>()),
        ),
        CoreError::NotYetGrounded(text) => {
            ApiError::new(StatusCode::CONFLICT, "not yet grounded").with("sentence", Value::from(text.as_str()))
        }
        _ => ApiError::unprocessable(&e),
    })?;
    Ok(Json(InstructionResponse {
        success: outcome.success,
        reason: outcome.reason(),
        attempts: outcome.attempts,
        state: StateView::of(&trainer),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProposeRequest {
    /// Run the proposed (or given) pair as a social episode right away.
    #[serde(default)]
    pub accept: bool,
    /// A pair picked by a human tutor instead of the synthetic one.
    pub pair: Option<FrontierPair>,
}

#[derive(Serialize)]
pub struct ProposeResponse {
    pub pair: Option<FrontierPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episode: Option<MetricsRecord>,
}

pub async fn post_propose(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<ProposeResponse>> {
    let request: ProposeRequest = parse(&body)?;
    let session = session(&state, &id)?;
    let mut trainer = writer(&session)?;
    let pair = match request.pair {
        Some(pair) => Some(pair),
        None => trainer.propose(),
    };
    let Some(pair) = pair else {
        return Ok(Json(ProposeResponse { pair: None, reason: Some("space fully discovered"), episode: None }));
    };
    let episode = if request.accept || request.pair.is_some() {
        let record = trainer.run_pair(pair).map_err(|e| ApiError::unprocessable(&e))?;
        session.publish(&mut trainer);
        Some(record)
    } else {
        None
    };
    Ok(Json(ProposeResponse { pair: Some(pair), reason: None, episode }))
}

//! HTTP API over a loaded scenario and its precomputed map set.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use reachvox::collision::robot_collides;
use reachvox::kinematics::{solve_ik, IkOptions, IkSolution, JointVector};
use reachvox::scenario::{submit_attempt, MapSet, Scenario, Trial, WorkpieceConfig};
use reachvox::{Error, Vec3};

use crate::api::*;

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            code: status.as_u16(),
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidState(_) => StatusCode::CONFLICT,
            e if e.is_user_error() => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

/// Immutable scenario and maps plus one lock per trial.
pub struct AppState {
    scenario: Scenario,
    maps: MapSet,
    summary: ScenarioSummary,
    trials: BTreeMap<String, Mutex<Trial>>,
}

impl AppState {
    /// Pairs a scenario with a map set computed for the same crane.
    pub fn new(scenario: Scenario, maps: MapSet) -> reachvox::Result<Self> {
        maps.check_complete()?;
        let (a, b) = (&scenario.crane, &maps.crane);
        if a.rotation_count != b.rotation_count
            || a.height_count != b.height_count
            || a.rotation_step_deg != b.rotation_step_deg
            || a.height_step != b.height_step
        {
            return Err(Error::InvalidArgument(format!(
                "map set crane {}×{} (step {}°, {} m) does not match scenario crane {}×{} (step {}°, {} m)",
                b.rotation_count, b.height_count, b.rotation_step_deg, b.height_step,
                a.rotation_count, a.height_count, a.rotation_step_deg, a.height_step
            )));
        }
        let trials = scenario
            .trials
            .iter()
            .map(|t| (t.id.clone(), Mutex::new(t.clone())))
            .collect();
        Ok(Self {
            summary: ScenarioSummary::new(&scenario),
            scenario,
            maps,
            trials,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }
}

/// Offsets (radians, sign alternating per joint) for IK restarts, so a
/// singular seed such as a fully stretched arm does not stall the check.
const RESTART_OFFSETS: [f64; 5] = [0.0, 0.5, -0.5, 1.0, -1.0];

/// Live IK plus collision verdict with the workpiece at `(rot, height)`.
/// Among the restarts, a converged collision-free solution wins, then any
/// converged one, then the smallest residual.
pub fn ik_check(scenario: &Scenario, req: &IkCheckRequest) -> reachvox::Result<IkCheckResponse> {
    let cfg = WorkpieceConfig::new(req.rot, req.height);
    let scene = scenario.scene_for(&cfg)?;
    let robot = &scenario.robot;
    let target = Vec3::from(req.target);
    if !target.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("target must be finite".into()));
    }
    let seed = match &req.seed {
        Some(angles) => JointVector::clamped(robot, angles)?,
        None => robot.rest_configuration(),
    };
    let opts = IkOptions::default()
        .with_tolerance(IK_TOLERANCE)
        .with_max_iters(IK_MAX_ITERS);
    let mut best: Option<(u8, IkSolution, bool)> = None;
    for offset in RESTART_OFFSETS {
        let start: Vec<f64> = seed
            .angles()
            .iter()
            .enumerate()
            .map(|(i, a)| if i % 2 == 0 { a + offset } else { a - offset })
            .collect();
        let start = JointVector::clamped(robot, &start)?;
        let sol = solve_ik(robot, &target, &start, &opts)?;
        let collides = robot_collides(robot, &sol.joints, &scene)?;
        let rank = match (sol.converged, collides) {
            (true, false) => 0,
            (true, true) => 1,
            _ => 2,
        };
        let better = match &best {
            None => true,
            Some((r, b, _)) => rank < *r || (rank == *r && rank == 2 && sol.residual < b.residual),
        };
        if better {
            best = Some((rank, sol, collides));
        }
        if rank == 0 {
            break;
        }
    }
    let (_, sol, collides) = best.expect("at least one restart");
    let tip = reachvox::kinematics::tooltip_position(robot, &sol.joints)?;
    Ok(IkCheckResponse {
        reachable: sol.converged,
        collides,
        joints: sol.joints.angles().to_vec(),
        residual: sol.residual,
        iterations: sol.iterations,
        tooltip: [tip.x, tip.y, tip.z],
    })
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<Json<T>, ApiError>;

async fn scenario_summary(State(state): State<Shared>) -> Json<ScenarioSummary> {
    Json(state.summary.clone())
}

#[derive(Debug, Deserialize)]
struct MapQuery {
    rot: i64,
    height: i64,
}

fn bad_request(message: impl Into<String>) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, message)
}

fn config_from(state: &AppState, rot: i64, height: i64) -> Result<WorkpieceConfig, ApiError> {
    let crane = &state.scenario.crane;
    if !(0..crane.rotation_count as i64).contains(&rot) || !(0..crane.height_count as i64).contains(&height) {
        return Err(bad_request(format!(
            "configuration (rot {rot}, height {height}) outside {}×{}",
            crane.rotation_count, crane.height_count
        )));
    }
    Ok(WorkpieceConfig::new(rot as u32, height as u32))
}

async fn map(
    State(state): State<Shared>,
    query: Result<Query<MapQuery>, QueryRejection>,
) -> ApiResult<MapResponse> {
    let Query(q) = query.map_err(|e| bad_request(e.body_text()))?;
    let cfg = config_from(&state, q.rot, q.height)?;
    let map = state
        .maps
        .get(&cfg)
        .ok_or_else(|| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "map set is missing a configuration"))?;
    Ok(Json(MapResponse::new(cfg.rot_index, cfg.height_index, map)))
}

async fn ik(
    State(state): State<Shared>,
    body: Result<Json<IkCheckRequest>, JsonRejection>,
) -> ApiResult<IkCheckResponse> {
    let Json(req) = body.map_err(|e| bad_request(e.body_text()))?;
    config_from(&state, req.rot as i64, req.height as i64)?;
    Ok(Json(ik_check(&state.scenario, &req)?))
}

fn trial_lock<'a>(state: &'a AppState, id: &str) -> Result<&'a Mutex<Trial>, ApiError> {
    state
        .trials
        .get(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown trial {id:?}")))
}

async fn trial(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Trial> {
    let lock = trial_lock(&state, &id)?;
    let trial = lock.lock().unwrap_or_else(|p| p.into_inner()).clone();
    Ok(Json(trial))
}

async fn attempt(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<AttemptRequest>, JsonRejection>,
) -> ApiResult<AttemptResponse> {
    let lock = trial_lock(&state, &id)?;
    let Json(req) = body.map_err(|e| bad_request(e.body_text()))?;
    let cfg = config_from(&state, req.rot as i64, req.height as i64)?;
    let mut trial = lock.lock().unwrap_or_else(|p| p.into_inner());
    let evaluation = submit_attempt(&mut trial, &state.maps, &state.scenario.crane, &cfg)?;
    Ok(Json(AttemptResponse {
        remaining_attempts: trial.remaining_attempts(),
        trial: trial.clone(),
        evaluation,
    }))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such route")
}

/// API routes under `/api`, and the viewer's static files under `/` when
/// `static_dir` is given.
pub fn router(state: Shared, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/scenario", get(scenario_summary))
        .route("/map", get(map))
        .route("/ik-check", post(ik))
        .route("/trial/{id}", get(trial))
        .route("/trial/{id}/attempt", post(attempt))
        .fallback(not_found)
        .with_state(state);
    let app = Router::new().nest("/api", api);
    let app = match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(not_found),
    };
    app.layer(CorsLayer::permissive())
}

pub async fn serve(state: AppState, port: u16, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let app = router(Arc::new(state), static_dir);
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        })
        .await
}

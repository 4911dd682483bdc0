//! JSON-over-HTTP service around the solver.
//!
//! Games are uploaded as source text, solved on a blocking worker, and
//! replayed through sessions that store only their owned play state.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use alpaga_core::{
    parse_game, solve_game, Choice, CpreKind, GameStructure, ParseReport, PlayError, Session, SessionState,
    Solution, SolveOptions,
};
use axum::extract::{DefaultBodyLimit, Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

#[derive(Clone, Debug)]
pub struct Config {
    pub addr: SocketAddr,
    pub data_dir: Option<PathBuf>,
    pub static_dir: PathBuf,
    pub solve_timeout: Duration,
    pub max_body_bytes: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: None,
            static_dir: PathBuf::from("web/dist"),
            solve_timeout: Duration::from_secs(30),
            max_body_bytes: 1 << 20,
        }
    }
}

impl Config {
    /// Reads `ALPAGA_ADDR`, `ALPAGA_DATA`, `ALPAGA_STATIC` and
    /// `ALPAGA_SOLVE_TIMEOUT_MS`, keeping defaults for unset variables.
    pub fn from_env() -> Result<Self, String> {
        let mut cfg = Config::default();
        if let Ok(addr) = std::env::var("ALPAGA_ADDR") {
            cfg.addr = addr.parse().map_err(|e| format!("ALPAGA_ADDR: {e}"))?;
        }
        if let Ok(dir) = std::env::var("ALPAGA_DATA") {
            cfg.data_dir = Some(PathBuf::from(dir));
        }
        if let Ok(dir) = std::env::var("ALPAGA_STATIC") {
            cfg.static_dir = PathBuf::from(dir);
        }
        if let Ok(ms) = std::env::var("ALPAGA_SOLVE_TIMEOUT_MS") {
            let ms: u64 = ms.parse().map_err(|e| format!("ALPAGA_SOLVE_TIMEOUT_MS: {e}"))?;
            cfg.solve_timeout = Duration::from_millis(ms);
        }
        Ok(cfg)
    }
}

enum SolveState {
    Idle,
    Running,
    Done(Arc<Solution>),
    Failed(String),
}

struct StoredGame {
    game: GameStructure,
    warnings: Vec<String>,
    solve: Mutex<SolveState>,
}

struct StoredSession {
    solution: Arc<Solution>,
    state: SessionState,
}

struct AppState {
    config: Config,
    games: Mutex<HashMap<String, Arc<StoredGame>>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<StoredSession>>>>,
}

type Shared = Arc<AppState>;

fn fresh_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

fn persisted_name(id: &str, totalize: bool) -> String {
    if totalize {
        format!("{id}.game")
    } else {
        format!("{id}.raw.game")
    }
}

fn load_persisted(dir: &Path) -> HashMap<String, Arc<StoredGame>> {
    let mut games = HashMap::new();
    let Ok(entries) = std::fs::read_dir(dir) else {
        return games;
    };
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        let (id, totalize) = if let Some(id) = name.strip_suffix(".raw.game") {
            (id.to_string(), false)
        } else if let Some(id) = name.strip_suffix(".game") {
            (id.to_string(), true)
        } else {
            continue;
        };
        match std::fs::read_to_string(entry.path()).map_err(|e| e.to_string()).and_then(|text| {
            parse_game(&text, totalize).map_err(|e| e.to_string())
        }) {
            Ok(report) => {
                games.insert(id, Arc::new(stored(report)));
            }
            Err(e) => log::warn!("skipping persisted game {name}: {e}"),
        }
    }
    games
}

fn stored(report: ParseReport) -> StoredGame {
    StoredGame { game: report.game, warnings: report.warnings, solve: Mutex::new(SolveState::Idle) }
}

/// Builds the router. Persisted games under the data directory are loaded
/// eagerly.
pub fn app(config: Config) -> Router {
    let games = config.data_dir.as_deref().map(load_persisted).unwrap_or_default();
    let static_dir = config.static_dir.clone();
    let limit = config.max_body_bytes;
    let state = Arc::new(AppState { config, games: Mutex::new(games), sessions: Mutex::new(HashMap::new()) });
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/solve", post(solve))
        .route("/games/{id}/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/step", post(step))
        .layer(DefaultBodyLimit::max(limit))
        .fallback_service(ServeDir::new(static_dir))
        .with_state(state)
}

pub async fn serve(config: Config) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app(config)).await
}

struct ApiError(StatusCode, Value);

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError(status, json!({ "message": message.into() }))
    }

    fn not_found(what: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown {what} id"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn game_summary(id: &str, g: &StoredGame) -> Value {
    let game = &g.game;
    let observations: Vec<Value> = game
        .observations()
        .iter()
        .map(|o| json!({ "id": o.id, "members": game.cell_names(&o.members), "priority": o.priority }))
        .collect();
    json!({
        "id": id,
        "locations": game.locations(),
        "actions": game.actions(),
        "observations": observations,
        "warnings": g.warnings,
    })
}

/// The solve result in the shape shared with the command-line output.
pub fn solution_json(solution: &Solution) -> Value {
    let g = &solution.game;
    let cells: Vec<Vec<String>> = solution.reported_cells().into_iter().map(|c| g.cell_names(c)).collect();
    let strategy: Vec<Value> = solution
        .reported_triples()
        .into_iter()
        .map(|t| json!({ "cell": g.cell_names(&t.cell), "rank": t.rank, "action": g.actions()[t.action] }))
        .collect();
    let stats = &solution.result.stats;
    json!({
        "winning": solution.initial_winning,
        "maxWinningCells": cells,
        "strategy": strategy,
        "stats": {
            "iterations": stats.iterations,
            "cpreCalls": stats.cpre_calls,
            "encodeMs": stats.encode_time.as_secs_f64() * 1e3,
            "solveMs": stats.solve_time.as_secs_f64() * 1e3,
            "simplifyMs": stats.simplify_time.as_secs_f64() * 1e3,
        },
    })
}

#[derive(Deserialize)]
struct CreateGameQuery {
    totalize: Option<bool>,
}

async fn create_game(
    State(state): State<Shared>,
    Query(q): Query<CreateGameQuery>,
    body: String,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let totalize = q.totalize.unwrap_or(true);
    let report = parse_game(&body, totalize)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, json!({ "line": e.line(), "message": e.to_string() })))?;
    let id = fresh_id();
    if let Some(dir) = &state.config.data_dir {
        let path = dir.join(persisted_name(&id, totalize));
        let written = tokio::fs::create_dir_all(dir).await.and(tokio::fs::write(&path, &body).await);
        if let Err(e) = written {
            log::warn!("could not persist {}: {e}", path.display());
        }
    }
    let entry = Arc::new(stored(report));
    let summary = game_summary(&id, &entry);
    state.games.lock().unwrap().insert(id, entry);
    Ok((StatusCode::CREATED, Json(summary)))
}

fn lookup_game(state: &AppState, id: &str) -> Result<Arc<StoredGame>, ApiError> {
    state.games.lock().unwrap().get(id).cloned().ok_or_else(|| ApiError::not_found("game"))
}

async fn get_game(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    let g = lookup_game(&state, &id)?;
    let mut summary = game_summary(&id, &g);
    let solve = match &*g.solve.lock().unwrap() {
        SolveState::Idle => json!({ "status": "idle" }),
        SolveState::Running => json!({ "status": "running" }),
        SolveState::Done(s) => json!({ "status": "done", "result": solution_json(s) }),
        SolveState::Failed(e) => json!({ "status": "failed", "message": e }),
    };
    summary["solve"] = solve;
    Ok(Json(summary))
}

#[derive(Deserialize)]
struct SolveQuery {
    cpre: Option<String>,
    simplify: Option<bool>,
}

async fn solve(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<SolveQuery>,
) -> Result<Response, ApiError> {
    let g = lookup_game(&state, &id)?;
    let cpre = match q.cpre.as_deref() {
        None | Some("symbolic") => CpreKind::Symbolic,
        Some("enumerative") => CpreKind::Enumerative,
        Some(other) => return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("unknown cpre `{other}`"))),
    };
    let options = SolveOptions { cpre, simplify: q.simplify.unwrap_or(true), ..Default::default() };
    {
        let mut slot = g.solve.lock().unwrap();
        if matches!(*slot, SolveState::Running) {
            return Err(ApiError::new(StatusCode::CONFLICT, "a solve for this game is already running"));
        }
        *slot = SolveState::Running;
    }
    let worker = Arc::clone(&g);
    let task = tokio::task::spawn_blocking(move || {
        let outcome = solve_game(&worker.game, options);
        let mut slot = worker.solve.lock().unwrap();
        match outcome {
            Ok(s) => {
                let s = Arc::new(s);
                *slot = SolveState::Done(Arc::clone(&s));
                Ok(s)
            }
            Err(e) => {
                *slot = SolveState::Failed(e.to_string());
                Err(e)
            }
        }
    });
    match tokio::time::timeout(state.config.solve_timeout, task).await {
        Ok(Ok(Ok(s))) => Ok(Json(solution_json(&s)).into_response()),
        Ok(Ok(Err(e))) => Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())),
        Ok(Err(join)) => {
            *g.solve.lock().unwrap() = SolveState::Failed(join.to_string());
            Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "solver task failed"))
        }
        Err(_) => Ok((StatusCode::ACCEPTED, Json(json!({ "status": "running", "poll": format!("/games/{id}") })))
            .into_response()),
    }
}

#[derive(Deserialize, Default)]
struct CreateSessionBody {
    seed: Option<u64>,
}

#[derive(Serialize)]
struct HistoryJson {
    action: String,
    observation: String,
    knowledge: Vec<String>,
}

fn session_json(id: &str, s: &Session<'_>) -> Value {
    let g = s.game();
    let (action, compatible) = match s.proposed_move() {
        Ok((a, obs)) => (
            Some(g.actions()[a].clone()),
            obs.into_iter().map(|o| g.observations()[o].id.clone()).collect(),
        ),
        Err(_) => (None, Vec::new()),
    };
    let history: Vec<HistoryJson> = s
        .history()
        .iter()
        .map(|h| HistoryJson {
            action: g.actions()[h.action].clone(),
            observation: g.observations()[h.observation].id.clone(),
            knowledge: g.cell_names(&h.knowledge),
        })
        .collect();
    json!({
        "id": id,
        "knowledge": g.cell_names(s.knowledge()),
        "action": action,
        "compatible": compatible,
        "status": s.status().as_str(),
        "history": history,
        "seed": s.seed(),
    })
}

async fn create_session(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: axum::body::Bytes,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let g = lookup_game(&state, &id)?;
    let body: CreateSessionBody = if body.iter().all(u8::is_ascii_whitespace) {
        CreateSessionBody::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?
    };
    let solution = match &*g.solve.lock().unwrap() {
        SolveState::Done(s) => Arc::clone(s),
        _ => return Err(ApiError::new(StatusCode::CONFLICT, "game has not been solved")),
    };
    if !solution.initial_winning {
        return Err(ApiError::new(StatusCode::CONFLICT, "initial cell is losing"));
    }
    let seed = body.seed.unwrap_or_else(rand::random);
    let session = Session::new(&solution.game, &solution.result.strategy, seed);
    let sid = fresh_id();
    let out = session_json(&sid, &session);
    let state_only = session.into_state();
    state
        .sessions
        .lock()
        .unwrap()
        .insert(sid, Arc::new(Mutex::new(StoredSession { solution, state: state_only })));
    Ok((StatusCode::CREATED, Json(out)))
}

fn lookup_session(state: &AppState, id: &str) -> Result<Arc<Mutex<StoredSession>>, ApiError> {
    state.sessions.lock().unwrap().get(id).cloned().ok_or_else(|| ApiError::not_found("session"))
}

async fn get_session(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    let entry = lookup_session(&state, &id)?;
    let stored = entry.lock().unwrap();
    let s = Session::from_state(&stored.solution.game, &stored.solution.result.strategy, stored.state.clone());
    Ok(Json(session_json(&id, &s)))
}

#[derive(Deserialize)]
struct StepBody {
    observation: Option<String>,
    #[serde(default)]
    random: bool,
}

async fn step(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<StepBody>,
) -> Result<Json<Value>, ApiError> {
    let entry = lookup_session(&state, &id)?;
    let mut stored = entry.lock().unwrap();
    let solution = Arc::clone(&stored.solution);
    let game = &solution.game;
    let choice = match (body.observation, body.random) {
        (Some(o), false) => match game.observation_index(&o) {
            Some(ix) => Choice::Observation(ix),
            None => {
                return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("unknown observation `{o}`")))
            }
        },
        (None, true) => Choice::Random,
        _ => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "give exactly one of `observation` or `random: true`"))
        }
    };
    let mut session = Session::from_state(game, &solution.result.strategy, stored.state.clone());
    match session.step(choice) {
        Ok(_) | Err(PlayError::NoCoveringTriple) => {}
        Err(PlayError::IncompatibleObservation) => {
            return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, PlayError::IncompatibleObservation.to_string()))
        }
        Err(e @ PlayError::IllegalState) => return Err(ApiError::new(StatusCode::CONFLICT, e.to_string())),
    }
    let out = session_json(&id, &session);
    stored.state = session.into_state();
    Ok(Json(out))
}

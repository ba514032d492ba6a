//! Routes. Reads of graphs and results are public; everything that changes
//! state needs a bearer token.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use sdg_core::analytics::{graph_query, summary_stats, synthesize, SynthesisConfig};
use sdg_core::catalog::{GoalId, TargetPair, CATALOG_VERSION};
use sdg_core::evaluation::Method;
use sdg_core::report::{pair_listing, targets_document, to_json_bytes, Sign};
use sdg_core::survey::{AssignmentState, Experience, Profile, RespondentId, SurveyError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::app::App;
use crate::error::ApiError;

pub type Shared = Arc<Mutex<App>>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/signup", post(signup))
        .route("/api/login", post(login))
        .route("/api/users/pending", get(pending))
        .route("/api/users/{id}/approve", post(approve))
        .route("/api/goals/select", post(select_goals))
        .route("/api/batch", post(batch))
        .route("/api/assignments", get(assignments))
        .route("/api/answers", post(answer))
        .route("/api/answers/finalize", post(finalize))
        .route("/api/graph", get(graph))
        .route("/api/results/positive", get(results_positive))
        .route("/api/results/negative", get(results_negative))
        .route("/api/results/targets", get(results_targets))
        .route("/api/results/synthesis", get(results_synthesis))
        .route("/api/stats", get(stats))
        .route("/api/import/indicator", post(import_indicator))
        .route("/api/config", get(config))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such endpoint") })
        .with_state(state)
}

type ApiResult = Result<Response, ApiError>;

fn lock(state: &Shared) -> MutexGuard<'_, App> {
    // a panicking handler never leaves a half-applied transaction behind
    state.lock().unwrap_or_else(|p| p.into_inner())
}

/// Serializes through the same renderer the CLI exporters use.
pub fn json_response<T: Serialize>(status: StatusCode, doc: &T) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        to_json_bytes(doc),
    )
        .into_response()
}

fn ok<T: Serialize>(doc: &T) -> ApiResult {
    Ok(json_response(StatusCode::OK, doc))
}

fn token(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let bytes: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) {
        b"{}"
    } else {
        bytes
    };
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request("MalformedBody", e.to_string()))
}

fn method_param(q: &HashMap<String, String>) -> Result<Method, ApiError> {
    q.get("method")
        .ok_or_else(|| ApiError::bad_request("InvalidQuery", "method is required"))?
        .parse()
        .map_err(|e: String| ApiError::bad_request("InvalidQuery", e))
}

fn goal_param(q: &HashMap<String, String>, key: &str) -> Result<GoalId, ApiError> {
    let raw = q
        .get(key)
        .ok_or_else(|| ApiError::bad_request("InvalidQuery", format!("{key} is required")))?;
    raw.trim()
        .parse::<u32>()
        .ok()
        .and_then(|n| GoalId::new(n).ok())
        .ok_or_else(|| {
            ApiError::bad_request("UnknownGoal", format!("{key}={raw:?} is not a goal 1..=17"))
        })
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct SignupBody {
    username: String,
    password: String,
    name: String,
    primary_affiliation: String,
    secondary_affiliation: Option<String>,
    education_level: String,
    experience: Option<Experience>,
    /// Username of the inviting administrator.
    curator: Option<String>,
    consent: bool,
}

#[derive(Serialize)]
struct UserView<'a> {
    id: RespondentId,
    username: &'a str,
    status: sdg_core::survey::Status,
    is_admin: bool,
    profile: &'a Profile,
}

fn user_view(app: &App, id: RespondentId) -> UserView<'_> {
    let r = app.engine().respondent(id).expect("known respondent");
    UserView {
        id,
        username: app.username(id),
        status: r.status,
        is_admin: r.is_admin,
        profile: &r.profile,
    }
}

async fn signup(State(state): State<Shared>, bytes: Bytes) -> ApiResult {
    let b: SignupBody = body(&bytes)?;
    let mut app = lock(&state);
    if b.username.trim().is_empty() {
        return Err(SurveyError::MissingField("username").into());
    }
    if b.password.is_empty() {
        return Err(SurveyError::MissingField("password").into());
    }
    if app.user_id(b.username.trim()).is_some() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "UsernameTaken",
            "username already registered",
        ));
    }
    let curator = match b
        .curator
        .as_deref()
        .map(str::trim)
        .filter(|c| !c.is_empty())
    {
        None => None,
        Some(name) => Some(app.user_id(name).ok_or_else(|| {
            ApiError::unprocessable("UnknownCurator", format!("{name} is not an administrator"))
                .with_detail(json!({ "curator": name }))
        })?),
    };
    let profile = Profile {
        name: b.name,
        primary_affiliation: b.primary_affiliation,
        secondary_affiliation: b.secondary_affiliation.filter(|s| !s.trim().is_empty()),
        education_level: b.education_level,
        experience: b.experience,
        curator,
        consent: b.consent,
    };
    let username = b.username.trim().to_string();
    let id = app.transact(|app| {
        let id = app.engine_mut().register(profile)?.id;
        app.add_account(id, &username, &b.password);
        Ok(id)
    })?;
    Ok(json_response(StatusCode::CREATED, &user_view(&app, id)))
}

#[derive(Deserialize)]
struct LoginBody {
    username: String,
    password: String,
}

async fn login(State(state): State<Shared>, bytes: Bytes) -> ApiResult {
    let b: LoginBody = body(&bytes)?;
    let mut app = lock(&state);
    let (token, id) = app.login(b.username.trim(), &b.password)?;
    let ttl = app.config.session_ttl.as_secs();
    ok(&json!({ "token": token, "expires_in": ttl, "user": user_view(&app, id) }))
}

async fn pending(State(state): State<Shared>, headers: HeaderMap) -> ApiResult {
    let app = lock(&state);
    app.require_admin(token(&headers))?;
    let users: Vec<UserView> = app
        .engine()
        .pending()
        .iter()
        .map(|r| user_view(&app, r.id))
        .collect();
    ok(&json!({ "users": users }))
}

async fn approve(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    headers: HeaderMap,
) -> ApiResult {
    let mut app = lock(&state);
    let caller = app.authenticate(token(&headers))?;
    let id = RespondentId(id);
    app.transact(|app| {
        app.engine_mut()
            .approve(caller, id)
            .map(|_| ())
            .map_err(Into::into)
    })?;
    ok(&user_view(&app, id))
}

#[derive(Deserialize)]
struct GoalsBody {
    goals: Vec<u32>,
}

async fn select_goals(State(state): State<Shared>, headers: HeaderMap, bytes: Bytes) -> ApiResult {
    let b: GoalsBody = body(&bytes)?;
    let goals = b
        .goals
        .iter()
        .map(|&n| GoalId::new(n).map_err(|e| ApiError::unprocessable("UnknownGoal", e.to_string())))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let mut app = lock(&state);
    let me = app.authenticate(token(&headers))?;
    let selection = app.transact(|app| Ok(app.engine_mut().select_goals(me, goals)?.clone()))?;
    ok(&selection)
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct BatchBody {
    size: Option<usize>,
}

async fn batch(State(state): State<Shared>, headers: HeaderMap, bytes: Bytes) -> ApiResult {
    let b: BatchBody = body(&bytes)?;
    let mut app = lock(&state);
    let me = app.authenticate(token(&headers))?;
    let size = b.size.unwrap_or(app.config.batch_size);
    if size == 0 {
        return Err(ApiError::unprocessable(
            "InvalidSize",
            "batch size must be positive",
        ));
    }
    let outcome = app.transact(|app| Ok(app.engine_mut().generate_batch(me, size)?))?;
    ok(&outcome)
}

async fn assignments(State(state): State<Shared>, headers: HeaderMap) -> ApiResult {
    let app = lock(&state);
    let me = app.authenticate(token(&headers))?;
    let mine = app.engine().assignments_of(me);
    let count = |f: fn(&AssignmentState) -> bool| mine.iter().filter(|a| f(&a.state)).count();
    let open: Vec<_> = mine.iter().filter(|a| a.state.is_open()).collect();
    ok(&json!({
        "total": open.len(),
        "answered": open.iter().filter(|a| matches!(a.state, AssignmentState::Answered(_))).count(),
        "skipped": count(|s| matches!(s, AssignmentState::Skipped)),
        "unanswered": count(|s| matches!(s, AssignmentState::Unanswered)),
        "finalized": count(|s| matches!(s, AssignmentState::Finalized(_))),
        "assignments": mine,
    }))
}

#[derive(Deserialize)]
struct AnswerBody {
    a: String,
    b: String,
    score: Option<i64>,
    explanation: Option<String>,
    #[serde(default)]
    skip: bool,
}

async fn answer(State(state): State<Shared>, headers: HeaderMap, bytes: Bytes) -> ApiResult {
    let b: AnswerBody = body(&bytes)?;
    let pair = TargetPair::parse(&b.a, &b.b)
        .map_err(|e| ApiError::unprocessable("UnknownTarget", e.to_string()))?;
    let mut app = lock(&state);
    let me = app.authenticate(token(&headers))?;
    let assignment = app.transact(|app| {
        let e = app.engine_mut();
        let a = if b.skip {
            e.skip(me, pair)?
        } else {
            let score = b.score.ok_or(SurveyError::MissingField("score"))?;
            e.submit_score(me, pair, score, b.explanation.as_deref())?
        };
        Ok(a.clone())
    })?;
    ok(&assignment)
}

async fn finalize(State(state): State<Shared>, headers: HeaderMap) -> ApiResult {
    let mut app = lock(&state);
    let me = app.authenticate(token(&headers))?;
    let n = app.transact(|app| Ok(app.engine_mut().finalize(me)?))?;
    ok(&json!({ "finalized": n }))
}

async fn graph(State(state): State<Shared>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let method = method_param(&q)?;
    let (a, b) = (goal_param(&q, "a")?, goal_param(&q, "b")?);
    let app = lock(&state);
    ok(&graph_query(&app.store(method), app.catalog, a, b))
}

async fn results_positive(
    State(state): State<Shared>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult {
    let method = method_param(&q)?;
    let app = lock(&state);
    ok(&pair_listing(
        &app.store(method),
        app.catalog,
        Sign::Positive,
    ))
}

async fn results_negative(
    State(state): State<Shared>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult {
    let method = method_param(&q)?;
    let app = lock(&state);
    ok(&pair_listing(
        &app.store(method),
        app.catalog,
        Sign::Negative,
    ))
}

async fn results_targets(State(state): State<Shared>) -> ApiResult {
    let app = lock(&state);
    ok(&targets_document(
        &app.expert_store(),
        &app.indicator_store(),
        app.catalog,
    ))
}

async fn results_synthesis(State(state): State<Shared>) -> ApiResult {
    let app = lock(&state);
    let report = synthesize(
        &app.expert_store(),
        &app.indicator_store(),
        app.catalog,
        &SynthesisConfig::default(),
    )
    .expect("one store per method");
    ok(&report)
}

async fn stats(State(state): State<Shared>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let method = method_param(&q)?;
    let app = lock(&state);
    ok(&summary_stats(&app.store(method), app.catalog))
}

async fn import_indicator(
    State(state): State<Shared>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult {
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| ApiError::bad_request("MalformedBody", "body is not UTF-8"))?;
    let mut app = lock(&state);
    app.require_admin(token(&headers))?;
    let record = app.import_indicator(text)?;
    ok(&json!({ "loaded": record.rows, "version": record.version }))
}

async fn config(State(state): State<Shared>) -> ApiResult {
    let app = lock(&state);
    ok(&json!({
        "batch_size": app.config.batch_size,
        "goal_min": app.config.goal_min,
        "catalog": CATALOG_VERSION,
        "indicator_version": app.indicator_record().map(|r| r.version.clone()),
    }))
}

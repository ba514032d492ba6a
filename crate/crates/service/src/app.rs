//! Service state: the survey engine, accounts, sessions and the imported
//! indicator results. Every mutation runs as a transaction: the new state is
//! committed to the repository before it becomes visible, and rolled back if
//! the commit fails.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use axum::http::StatusCode;
use rand::Rng;
use sdg_core::catalog::Catalog;
use sdg_core::correlation::{
    run_indicator_method, CorrelationConfig, IndicatorResults, RESULTS_HEADER,
};
use sdg_core::evaluation::{read_expert_answers, EvaluationStore, Method};
use sdg_core::ingest::load_indicators;
use sdg_core::survey::{Profile, RespondentId, SurveyEngine};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{AdminSeed, ServiceConfig};
use crate::error::ApiError;
use crate::store::{IndicatorRecord, Repository, StoreError, StoreSnapshot};

pub fn hash_password(password: &str) -> String {
    let salt: [u8; 16] = rand::rng().random();
    let salt = hex::encode(salt);
    format!("{salt}${}", digest(&salt, password))
}

pub fn verify_password(credentials: &str, password: &str) -> bool {
    match credentials.split_once('$') {
        Some((salt, hash)) => digest(salt, password) == hash,
        None => false,
    }
}

fn digest(salt: &str, password: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt.as_bytes());
    h.update(password.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone)]
struct Session {
    user: RespondentId,
    expires: Instant,
}

#[derive(Debug, Clone)]
pub struct IndicatorData {
    pub record: IndicatorRecord,
    pub results: Arc<IndicatorResults>,
}

impl IndicatorData {
    fn from_results(results: IndicatorResults, rows: usize) -> Self {
        let csv = results.to_csv_string();
        let version = hex::encode(Sha256::digest(csv.as_bytes()));
        IndicatorData {
            record: IndicatorRecord { version, rows, csv },
            results: Arc::new(results),
        }
    }
}

/// Parses an indicator upload: a results table in the exchange format, or raw
/// indicator observations that are run through the correlation pipeline.
pub fn parse_indicator_upload(
    text: &str,
    catalog: &Catalog,
) -> Result<(IndicatorResults, usize), ApiError> {
    let first = text.lines().next().unwrap_or("").trim();
    let is_results = first
        .split(',')
        .map(str::trim)
        .eq(RESULTS_HEADER.iter().copied());
    if is_results {
        IndicatorResults::read_csv(text.as_bytes(), catalog).map_err(|e| {
            ApiError::unprocessable("FormatError", e.to_string())
                .with_detail(json!({ "line": e.line }))
        })
    } else {
        let loaded = load_indicators(text.as_bytes())
            .map_err(|e| ApiError::unprocessable("FormatError", e.to_string()))?;
        let results = run_indicator_method(&loaded.series, catalog, &CorrelationConfig::default());
        let rows = results.iter().filter(|r| !r.tally.is_empty()).count();
        Ok((results, rows))
    }
}

pub struct App {
    pub config: ServiceConfig,
    pub catalog: &'static Catalog,
    engine: SurveyEngine,
    /// id -> (username, credentials)
    accounts: BTreeMap<RespondentId, (String, String)>,
    indicator: Option<IndicatorData>,
    sessions: HashMap<String, Session>,
    repo: Box<dyn Repository + Sync>,
}

/// Mutable parts of the state, copied for rollback.
struct Saved {
    engine: SurveyEngine,
    accounts: BTreeMap<RespondentId, (String, String)>,
    indicator: Option<IndicatorData>,
}

impl App {
    /// Loads the stored state (or starts empty), creates configured
    /// administrators and applies the seed files when their data is absent.
    pub fn open(config: ServiceConfig, repo: Box<dyn Repository + Sync>) -> Result<App, ApiError> {
        let catalog = Catalog::bundled();
        let mut app = App {
            engine: SurveyEngine::new(config.survey()),
            config,
            catalog,
            accounts: BTreeMap::new(),
            indicator: None,
            sessions: HashMap::new(),
            repo,
        };
        if let Some(snapshot) = app.repo.load()? {
            let (survey, accounts, indicator) = snapshot.split()?;
            app.engine = SurveyEngine::restore(app.config.survey(), survey)?;
            app.accounts = accounts;
            if let Some(record) = indicator {
                let (results, _) = IndicatorResults::read_csv(record.csv.as_bytes(), catalog)
                    .map_err(|e| ApiError::from(StoreError::Corrupt(e.to_string())))?;
                app.indicator = Some(IndicatorData {
                    record,
                    results: Arc::new(results),
                });
            }
        }
        let admins = app.config.admins.clone();
        let expert_seed = app.config.expert_seed.clone();
        let indicator_seed = app.config.indicator_seed.clone();
        app.transact(|app| {
            for AdminSeed { username, password } in &admins {
                if app.user_id(username).is_none() {
                    let id = app.engine.add_admin(Profile {
                        name: username.clone(),
                        ..Profile::default()
                    });
                    app.accounts
                        .insert(id, (username.clone(), hash_password(password)));
                }
            }
            if let Some(path) = &expert_seed {
                if app.engine.finalized_answers().is_empty() {
                    let answers = read_expert_answers(open(path)?).map_err(|e| {
                        ApiError::unprocessable("FormatError", format!("{}: {e}", path.display()))
                    })?;
                    app.engine.import_finalized(&answers)?;
                }
            }
            if let Some(path) = &indicator_seed {
                if app.indicator.is_none() {
                    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
                    let (results, rows) = parse_indicator_upload(&text, app.catalog)?;
                    app.indicator = Some(IndicatorData::from_results(results, rows));
                }
            }
            Ok(())
        })?;
        Ok(app)
    }

    fn save(&self) -> Saved {
        Saved {
            engine: self.engine.clone(),
            accounts: self.accounts.clone(),
            indicator: self.indicator.clone(),
        }
    }

    fn restore(&mut self, saved: Saved) {
        self.engine = saved.engine;
        self.accounts = saved.accounts;
        self.indicator = saved.indicator;
    }

    pub fn snapshot(&self) -> StoreSnapshot {
        StoreSnapshot::build(
            self.engine.snapshot(),
            &self.accounts,
            self.indicator.as_ref().map(|d| d.record.clone()),
            self.catalog,
        )
    }

    /// Runs `f`; commits on success, restores the previous state if `f` or the
    /// commit fails.
    pub fn transact<T>(
        &mut self,
        f: impl FnOnce(&mut App) -> Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let saved = self.save();
        let result = f(self).and_then(|value| {
            self.repo.commit(&self.snapshot())?;
            Ok(value)
        });
        if result.is_err() {
            self.restore(saved);
        }
        result
    }

    pub fn engine(&self) -> &SurveyEngine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut SurveyEngine {
        &mut self.engine
    }

    pub fn user_id(&self, username: &str) -> Option<RespondentId> {
        self.accounts
            .iter()
            .find(|(_, (name, _))| name == username)
            .map(|(&id, _)| id)
    }

    pub fn username(&self, id: RespondentId) -> &str {
        self.accounts.get(&id).map_or("", |(n, _)| n.as_str())
    }

    pub fn add_account(&mut self, id: RespondentId, username: &str, password: &str) {
        self.accounts
            .insert(id, (username.to_string(), hash_password(password)));
    }

    pub fn login(
        &mut self,
        username: &str,
        password: &str,
    ) -> Result<(String, RespondentId), ApiError> {
        let invalid = || {
            ApiError::new(
                StatusCode::UNAUTHORIZED,
                "InvalidCredentials",
                "unknown user or wrong password",
            )
        };
        let id = self.user_id(username).ok_or_else(invalid)?;
        if !verify_password(&self.accounts[&id].1, password) {
            return Err(invalid());
        }
        let respondent = self.engine.respondent(id).ok_or_else(invalid)?;
        if respondent.status != sdg_core::survey::Status::Approved {
            return Err(sdg_core::survey::SurveyError::NotApproved(id).into());
        }
        let token = hex::encode(rand::rng().random::<[u8; 32]>());
        let now = Instant::now();
        self.sessions.retain(|_, s| s.expires > now);
        self.sessions.insert(
            token.clone(),
            Session {
                user: id,
                expires: now + self.config.session_ttl,
            },
        );
        Ok((token, id))
    }

    pub fn authenticate(&self, token: Option<&str>) -> Result<RespondentId, ApiError> {
        let session = token
            .and_then(|t| self.sessions.get(t))
            .ok_or_else(ApiError::unauthenticated)?;
        if session.expires <= Instant::now() {
            return Err(ApiError::unauthenticated());
        }
        Ok(session.user)
    }

    pub fn require_admin(&self, token: Option<&str>) -> Result<RespondentId, ApiError> {
        let id = self.authenticate(token)?;
        match self.engine.respondent(id) {
            Some(r) if r.is_admin => Ok(id),
            _ => Err(sdg_core::survey::SurveyError::NotAuthorized.into()),
        }
    }

    pub fn expert_store(&self) -> EvaluationStore {
        self.engine.expert_store()
    }

    /// Empty until indicator results have been imported.
    pub fn indicator_store(&self) -> EvaluationStore {
        match &self.indicator {
            Some(d) => EvaluationStore::indicator(&d.results),
            None => EvaluationStore::empty(Method::Indicator),
        }
    }

    pub fn store(&self, method: Method) -> EvaluationStore {
        match method {
            Method::Expert => self.expert_store(),
            Method::Indicator => self.indicator_store(),
        }
    }

    pub fn indicator_record(&self) -> Option<&IndicatorRecord> {
        self.indicator.as_ref().map(|d| &d.record)
    }

    /// Replaces the indicator results atomically.
    pub fn import_indicator(&mut self, text: &str) -> Result<IndicatorRecord, ApiError> {
        let (results, rows) = parse_indicator_upload(text, self.catalog)?;
        self.transact(|app| {
            app.indicator = Some(IndicatorData::from_results(results, rows));
            Ok(app.indicator_record().cloned().expect("just set"))
        })
    }
}

fn io_error(path: &Path, e: std::io::Error) -> ApiError {
    ApiError::from(StoreError::Unavailable(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<std::fs::File, ApiError> {
    std::fs::File::open(path).map_err(|e| io_error(path, e))
}

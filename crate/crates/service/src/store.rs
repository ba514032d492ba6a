//! Persistence: the four record tables (users, SDG targets, user goal
//! selections, survey answers) plus bookkeeping, stored as one snapshot
//! behind a small repository interface.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use sdg_core::catalog::{Catalog, GoalId, TargetId, TargetPair};
use sdg_core::evaluation::ExpertScore;
use sdg_core::survey::{
    Assignment, AssignmentState, Counters, GoalSelection, Notification, Profile, Respondent,
    RespondentId, Status, SurveySnapshot,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store unavailable: {0}")]
    Unavailable(String),
    #[error("store is corrupt: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Admin,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub id: RespondentId,
    pub username: String,
    pub profile: Profile,
    /// `salt$sha256(salt || password)`, hex encoded
    pub credentials: String,
    pub role: Role,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdgRecord {
    pub target: TargetId,
    pub goal: GoalId,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserToSdgRecord {
    pub user: RespondentId,
    pub goals: BTreeSet<GoalId>,
    pub locked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyAnswerRecord {
    pub a: TargetId,
    pub b: TargetId,
    pub user: Option<RespondentId>,
    pub state: String,
    pub score: Option<ExpertScore>,
    pub explanation: Option<String>,
    pub created: u64,
    pub updated: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorRecord {
    /// sha256 of the canonical results table
    pub version: String,
    pub rows: usize,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreSnapshot {
    pub schema: u32,
    pub users: Vec<UserRecord>,
    pub sdgs: Vec<SdgRecord>,
    pub user_to_sdg: Vec<UserToSdgRecord>,
    pub survey_answers: Vec<SurveyAnswerRecord>,
    pub notifications: Vec<Notification>,
    pub counters: Counters,
    pub indicator: Option<IndicatorRecord>,
}

impl StoreSnapshot {
    /// Splits survey state into the record tables. `accounts` maps user ids
    /// to (username, credentials).
    pub fn build(
        survey: SurveySnapshot,
        accounts: &BTreeMap<RespondentId, (String, String)>,
        indicator: Option<IndicatorRecord>,
        catalog: &Catalog,
    ) -> Self {
        let users = survey
            .respondents
            .into_iter()
            .map(|r| {
                let (username, credentials) = accounts.get(&r.id).cloned().unwrap_or_default();
                UserRecord {
                    id: r.id,
                    username,
                    profile: r.profile,
                    credentials,
                    role: if r.is_admin { Role::Admin } else { Role::User },
                    status: r.status,
                }
            })
            .collect();
        let sdgs = catalog
            .targets()
            .iter()
            .map(|t| SdgRecord {
                target: t.id,
                goal: t.id.goal(),
                description: t.description.clone(),
            })
            .collect();
        let user_to_sdg = survey
            .selections
            .into_iter()
            .map(|s| UserToSdgRecord {
                user: s.respondent,
                goals: s.goals,
                locked: s.locked,
            })
            .collect();
        let survey_answers = survey
            .assignments
            .into_iter()
            .map(|a| {
                let (state, score) = match a.state {
                    AssignmentState::Unanswered => ("unanswered", None),
                    AssignmentState::Skipped => ("skipped", None),
                    AssignmentState::Answered(s) => ("answered", Some(s)),
                    AssignmentState::Finalized(s) => ("finalized", Some(s)),
                };
                SurveyAnswerRecord {
                    a: a.pair.a(),
                    b: a.pair.b(),
                    user: a.respondent,
                    state: state.to_string(),
                    score,
                    explanation: a.explanation,
                    created: a.created,
                    updated: a.updated,
                }
            })
            .collect();
        StoreSnapshot {
            schema: SCHEMA_VERSION,
            users,
            sdgs,
            user_to_sdg,
            survey_answers,
            notifications: survey.notifications,
            counters: survey.counters,
            indicator,
        }
    }

    /// Inverse of [`StoreSnapshot::build`], checking referential integrity.
    #[allow(clippy::type_complexity)]
    pub fn split(
        self,
    ) -> Result<
        (
            SurveySnapshot,
            BTreeMap<RespondentId, (String, String)>,
            Option<IndicatorRecord>,
        ),
        StoreError,
    > {
        let corrupt = |m: String| StoreError::Corrupt(m);
        if self.schema != SCHEMA_VERSION {
            return Err(corrupt(format!(
                "schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let mut accounts = BTreeMap::new();
        let mut names = BTreeSet::new();
        let mut respondents = Vec::new();
        for u in self.users {
            if !names.insert(u.username.clone()) {
                return Err(corrupt(format!("username {} used twice", u.username)));
            }
            accounts.insert(u.id, (u.username, u.credentials));
            respondents.push(Respondent {
                id: u.id,
                profile: u.profile,
                status: u.status,
                is_admin: u.role == Role::Admin,
            });
        }
        let selections = self
            .user_to_sdg
            .into_iter()
            .map(|s| GoalSelection {
                respondent: s.user,
                goals: s.goals,
                locked: s.locked,
            })
            .collect();
        let mut assignments = Vec::new();
        for r in self.survey_answers {
            let pair = TargetPair::new(r.a, r.b).map_err(|e| corrupt(e.to_string()))?;
            let state = match (r.state.as_str(), r.score) {
                ("unanswered", None) => AssignmentState::Unanswered,
                ("skipped", None) => AssignmentState::Skipped,
                ("answered", Some(s)) => AssignmentState::Answered(s),
                ("finalized", Some(s)) => AssignmentState::Finalized(s),
                (s, _) => return Err(corrupt(format!("answer {pair}: bad state {s:?}"))),
            };
            assignments.push(Assignment {
                pair,
                respondent: r.user,
                state,
                explanation: r.explanation,
                created: r.created,
                updated: r.updated,
            });
        }
        let survey = SurveySnapshot {
            respondents,
            selections,
            assignments,
            notifications: self.notifications,
            counters: self.counters,
        };
        Ok((survey, accounts, self.indicator))
    }
}

pub trait Repository: Send {
    fn load(&self) -> Result<Option<StoreSnapshot>, StoreError>;
    /// Either the whole snapshot is stored or nothing is.
    fn commit(&self, snapshot: &StoreSnapshot) -> Result<(), StoreError>;
}

/// JSON snapshot on disk, replaced atomically through a temporary file.
pub struct FileRepository {
    path: PathBuf,
}

impl FileRepository {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FileRepository { path: path.into() }
    }
}

impl Repository for FileRepository {
    fn load(&self) -> Result<Option<StoreSnapshot>, StoreError> {
        match fs::read(&self.path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| StoreError::Corrupt(format!("{}: {e}", self.path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(StoreError::Unavailable(format!(
                "{}: {e}",
                self.path.display()
            ))),
        }
    }

    fn commit(&self, snapshot: &StoreSnapshot) -> Result<(), StoreError> {
        let unavailable =
            |e: std::io::Error| StoreError::Unavailable(format!("{}: {e}", self.path.display()));
        let mut tmp = self.path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let bytes = serde_json::to_vec(snapshot).expect("snapshot serializes");
        let mut file = fs::File::create(&tmp).map_err(unavailable)?;
        file.write_all(&bytes).map_err(unavailable)?;
        file.sync_all().map_err(unavailable)?;
        fs::rename(&tmp, &self.path).map_err(unavailable)
    }
}

/// In-memory repository. `fail_commits` makes every commit fail, to exercise
/// rollback.
#[derive(Default)]
pub struct MemoryRepository {
    stored: Mutex<Option<StoreSnapshot>>,
    pub fail_commits: std::sync::atomic::AtomicBool,
}

impl Repository for MemoryRepository {
    fn load(&self) -> Result<Option<StoreSnapshot>, StoreError> {
        Ok(self.stored.lock().expect("not poisoned").clone())
    }

    fn commit(&self, snapshot: &StoreSnapshot) -> Result<(), StoreError> {
        if self.fail_commits.load(std::sync::atomic::Ordering::SeqCst) {
            return Err(StoreError::Unavailable("commit refused".into()));
        }
        *self.stored.lock().expect("not poisoned") = Some(snapshot.clone());
        Ok(())
    }
}

impl<R: Repository + Sync> Repository for std::sync::Arc<R> {
    fn load(&self) -> Result<Option<StoreSnapshot>, StoreError> {
        (**self).load()
    }

    fn commit(&self, snapshot: &StoreSnapshot) -> Result<(), StoreError> {
        (**self).commit(snapshot)
    }
}

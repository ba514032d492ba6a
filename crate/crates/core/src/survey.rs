//! Expert-evaluation workflow: registration and approval, goal selection,
//! batch assignment of target pairs, scoring, skipping and finalization.
//!
//! Every pair is bound to at most one respondent for good. Time is a logical
//! revision counter bumped by each successful mutation, so replaying the same
//! operations always yields the same state.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, GoalId, TargetPair};
use crate::evaluation::{EvaluationStore, ExpertAnswer, ExpertScore};

pub const DEFAULT_BATCH_SIZE: usize = 20;
pub const DEFAULT_GOAL_MIN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RespondentId(pub u64);

impl std::fmt::Display for RespondentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experience {
    #[serde(rename = "5-10")]
    FiveToTen,
    #[serde(rename = ">10")]
    OverTen,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    pub primary_affiliation: String,
    #[serde(default)]
    pub secondary_affiliation: Option<String>,
    pub education_level: String,
    pub experience: Option<Experience>,
    /// Administrator who invited the respondent.
    pub curator: Option<RespondentId>,
    pub consent: bool,
}

impl Profile {
    fn check(&self) -> Result<(), SurveyError> {
        let blank = |s: &str| s.trim().is_empty();
        if blank(&self.name) {
            return Err(SurveyError::MissingField("name"));
        }
        if blank(&self.primary_affiliation) {
            return Err(SurveyError::MissingField("primary_affiliation"));
        }
        if blank(&self.education_level) {
            return Err(SurveyError::MissingField("education_level"));
        }
        if self.experience.is_none() {
            return Err(SurveyError::MissingField("experience"));
        }
        if self.curator.is_none() {
            return Err(SurveyError::MissingField("curator"));
        }
        if !self.consent {
            return Err(SurveyError::MissingField("consent"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Approved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Respondent {
    pub id: RespondentId,
    pub profile: Profile,
    pub status: Status,
    pub is_admin: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalSelection {
    pub respondent: RespondentId,
    pub goals: BTreeSet<GoalId>,
    /// Set once the first batch has been generated.
    pub locked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "score", rename_all = "lowercase")]
pub enum AssignmentState {
    Unanswered,
    Skipped,
    Answered(ExpertScore),
    Finalized(ExpertScore),
}

impl AssignmentState {
    pub fn is_open(self) -> bool {
        !matches!(self, AssignmentState::Finalized(_))
    }

    /// Whether the state machine allows moving from `self` to `next`.
    pub fn can_become(self, next: AssignmentState) -> bool {
        use AssignmentState::*;
        matches!(
            (self, next),
            (Unanswered, Skipped)
                | (Unanswered, Answered(_))
                | (Skipped, Answered(_))
                | (Answered(_), Answered(_))
                | (Answered(_), Finalized(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub pair: TargetPair,
    /// None for answers imported as already final.
    pub respondent: Option<RespondentId>,
    #[serde(flatten)]
    pub state: AssignmentState,
    pub explanation: Option<String>,
    pub created: u64,
    pub updated: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub curator: RespondentId,
    pub respondent: RespondentId,
    pub revision: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurveyConfig {
    pub batch_size: usize,
    pub goal_min: usize,
    pub seed: u64,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        SurveyConfig {
            batch_size: DEFAULT_BATCH_SIZE,
            goal_min: DEFAULT_GOAL_MIN,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurveyError {
    #[error("missing profile field {0}")]
    MissingField(&'static str),
    #[error("curator {0} is not an administrator")]
    UnknownCurator(RespondentId),
    #[error("unknown respondent {0}")]
    UnknownRespondent(RespondentId),
    #[error("respondent {0} is not pending")]
    NotPending(RespondentId),
    #[error("respondent {0} is not approved")]
    NotApproved(RespondentId),
    #[error("caller is not an administrator")]
    NotAuthorized,
    #[error("at least {min} goals must be selected, got {got}")]
    TooFewGoals { min: usize, got: usize },
    #[error("goal selection is locked once a batch has been generated")]
    SelectionLocked,
    #[error("no goals selected")]
    NoGoalsSelected,
    #[error("finalize the current batch before requesting another")]
    BatchOpen,
    #[error("a negative score needs an explanation")]
    ExplanationRequired,
    #[error("pair {0} is not assigned to this respondent")]
    NotYourAssignment(TargetPair),
    #[error("pair {0} is already finalized")]
    AlreadyFinalized(TargetPair),
    #[error("pair {0} is already answered")]
    AlreadyAnswered(TargetPair),
    #[error("score {0} is outside -3..=3")]
    ScoreOutOfRange(i64),
    #[error("{} pairs still unanswered", .0.len())]
    UnansweredRemaining(Vec<TargetPair>),
    #[error("pair {0} is already assigned")]
    PairTaken(TargetPair),
    #[error("inconsistent survey snapshot: {0}")]
    CorruptSnapshot(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchOutcome {
    pub assignments: Vec<Assignment>,
    pub requested: usize,
    /// Fewer pairs than requested were left in the pool.
    pub exhausted: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub next_id: u64,
    pub revision: u64,
    pub batches: u64,
}

/// Plain-data form of the engine, used for persistence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveySnapshot {
    pub respondents: Vec<Respondent>,
    pub selections: Vec<GoalSelection>,
    pub assignments: Vec<Assignment>,
    pub notifications: Vec<Notification>,
    pub counters: Counters,
}

#[derive(Debug, Clone)]
pub struct SurveyEngine {
    config: SurveyConfig,
    catalog: &'static Catalog,
    respondents: BTreeMap<RespondentId, Respondent>,
    selections: BTreeMap<RespondentId, GoalSelection>,
    assignments: BTreeMap<TargetPair, Assignment>,
    notifications: Vec<Notification>,
    counters: Counters,
}

impl SurveyEngine {
    pub fn new(config: SurveyConfig) -> Self {
        SurveyEngine {
            config,
            catalog: Catalog::bundled(),
            respondents: BTreeMap::new(),
            selections: BTreeMap::new(),
            assignments: BTreeMap::new(),
            notifications: Vec::new(),
            counters: Counters {
                next_id: 1,
                ..Counters::default()
            },
        }
    }

    pub fn config(&self) -> &SurveyConfig {
        &self.config
    }

    pub fn revision(&self) -> u64 {
        self.counters.revision
    }

    fn tick(&mut self) -> u64 {
        self.counters.revision += 1;
        self.counters.revision
    }

    /// Creates an approved administrator. Administrators are the curators
    /// respondents name when registering.
    pub fn add_admin(&mut self, profile: Profile) -> RespondentId {
        let id = RespondentId(self.counters.next_id);
        self.counters.next_id += 1;
        self.tick();
        self.respondents.insert(
            id,
            Respondent {
                id,
                profile,
                status: Status::Approved,
                is_admin: true,
            },
        );
        id
    }

    pub fn register(&mut self, profile: Profile) -> Result<&Respondent, SurveyError> {
        profile.check()?;
        let curator = profile.curator.expect("checked");
        if !self.respondents.get(&curator).is_some_and(|r| r.is_admin) {
            return Err(SurveyError::UnknownCurator(curator));
        }
        let id = RespondentId(self.counters.next_id);
        self.counters.next_id += 1;
        let revision = self.tick();
        self.notifications.push(Notification {
            curator,
            respondent: id,
            revision,
        });
        self.respondents.insert(
            id,
            Respondent {
                id,
                profile,
                status: Status::Pending,
                is_admin: false,
            },
        );
        Ok(&self.respondents[&id])
    }

    pub fn approve(
        &mut self,
        curator: RespondentId,
        respondent: RespondentId,
    ) -> Result<&Respondent, SurveyError> {
        if !self.respondents.get(&curator).is_some_and(|r| r.is_admin) {
            return Err(SurveyError::NotAuthorized);
        }
        let r = self
            .respondents
            .get(&respondent)
            .ok_or(SurveyError::UnknownRespondent(respondent))?;
        if r.status != Status::Pending {
            return Err(SurveyError::NotPending(respondent));
        }
        self.tick();
        let r = self.respondents.get_mut(&respondent).expect("present");
        r.status = Status::Approved;
        Ok(r)
    }

    fn approved(&self, id: RespondentId) -> Result<&Respondent, SurveyError> {
        let r = self
            .respondents
            .get(&id)
            .ok_or(SurveyError::UnknownRespondent(id))?;
        if r.status != Status::Approved {
            return Err(SurveyError::NotApproved(id));
        }
        Ok(r)
    }

    pub fn select_goals(
        &mut self,
        respondent: RespondentId,
        goals: BTreeSet<GoalId>,
    ) -> Result<&GoalSelection, SurveyError> {
        self.approved(respondent)?;
        if self.selections.get(&respondent).is_some_and(|s| s.locked) {
            return Err(SurveyError::SelectionLocked);
        }
        if goals.len() < self.config.goal_min {
            return Err(SurveyError::TooFewGoals {
                min: self.config.goal_min,
                got: goals.len(),
            });
        }
        self.tick();
        self.selections.insert(
            respondent,
            GoalSelection {
                respondent,
                goals,
                locked: false,
            },
        );
        Ok(&self.selections[&respondent])
    }

    /// Pairs with both endpoints in the selected goals that nobody holds yet,
    /// in canonical order.
    fn pool(&self, goals: &BTreeSet<GoalId>) -> Vec<TargetPair> {
        let targets: Vec<_> = goals
            .iter()
            .flat_map(|&g| self.catalog.targets_of(g).iter().map(|t| t.id))
            .collect();
        crate::catalog::pairs_of(&targets)
            .into_iter()
            .filter(|p| !self.assignments.contains_key(p))
            .collect()
    }

    /// Draws up to `size` unassigned pairs uniformly at random and binds them
    /// to the respondent. The draw depends only on the seed, the number of
    /// batches issued so far and the current pool, so it replays exactly.
    pub fn generate_batch(
        &mut self,
        respondent: RespondentId,
        size: usize,
    ) -> Result<BatchOutcome, SurveyError> {
        self.approved(respondent)?;
        let goals = match self.selections.get(&respondent) {
            Some(s) => s.goals.clone(),
            None => return Err(SurveyError::NoGoalsSelected),
        };
        if self
            .assignments
            .values()
            .any(|a| a.respondent == Some(respondent) && a.state.is_open())
        {
            return Err(SurveyError::BatchOpen);
        }
        let pool = self.pool(&goals);
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(self.counters.batches);
        let mut drawn: Vec<TargetPair> = pool.choose_multiple(&mut rng, size).copied().collect();
        drawn.sort_unstable();

        self.counters.batches += 1;
        let revision = self.tick();
        self.selections
            .get_mut(&respondent)
            .expect("present")
            .locked = true;
        let mut assignments = Vec::with_capacity(drawn.len());
        for pair in drawn {
            let a = Assignment {
                pair,
                respondent: Some(respondent),
                state: AssignmentState::Unanswered,
                explanation: None,
                created: revision,
                updated: revision,
            };
            self.assignments.insert(pair, a.clone());
            assignments.push(a);
        }
        Ok(BatchOutcome {
            exhausted: assignments.len() < size,
            assignments,
            requested: size,
        })
    }

    fn owned_mut(
        &mut self,
        respondent: RespondentId,
        pair: TargetPair,
    ) -> Result<&mut Assignment, SurveyError> {
        match self.assignments.get_mut(&pair) {
            Some(a) if a.respondent == Some(respondent) => Ok(a),
            _ => Err(SurveyError::NotYourAssignment(pair)),
        }
    }

    pub fn submit_score(
        &mut self,
        respondent: RespondentId,
        pair: TargetPair,
        score: i64,
        explanation: Option<&str>,
    ) -> Result<&Assignment, SurveyError> {
        let current = self.owned_mut(respondent, pair)?.state;
        if !current.is_open() {
            return Err(SurveyError::AlreadyFinalized(pair));
        }
        let score = ExpertScore::new(score).ok_or(SurveyError::ScoreOutOfRange(score))?;
        let explanation = explanation
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        if score.is_negative() && explanation.is_none() {
            return Err(SurveyError::ExplanationRequired);
        }
        let revision = self.tick();
        let a = self.owned_mut(respondent, pair)?;
        a.state = AssignmentState::Answered(score);
        a.explanation = explanation;
        a.updated = revision;
        Ok(a)
    }

    /// Skipping an already skipped pair is a no-op.
    pub fn skip(
        &mut self,
        respondent: RespondentId,
        pair: TargetPair,
    ) -> Result<&Assignment, SurveyError> {
        let current = self.owned_mut(respondent, pair)?.state;
        match current {
            AssignmentState::Unanswered => {
                let revision = self.tick();
                let a = self.owned_mut(respondent, pair)?;
                a.state = AssignmentState::Skipped;
                a.updated = revision;
                Ok(a)
            }
            AssignmentState::Skipped => self.owned_mut(respondent, pair).map(|a| &*a),
            AssignmentState::Answered(_) => Err(SurveyError::AlreadyAnswered(pair)),
            AssignmentState::Finalized(_) => Err(SurveyError::AlreadyFinalized(pair)),
        }
    }

    /// Finalizes every answered assignment of the respondent. Fails, changing
    /// nothing, while any assignment is unanswered or skipped.
    pub fn finalize(&mut self, respondent: RespondentId) -> Result<usize, SurveyError> {
        self.approved(respondent)?;
        let mine: Vec<TargetPair> = self
            .assignments
            .values()
            .filter(|a| a.respondent == Some(respondent) && a.state.is_open())
            .map(|a| a.pair)
            .collect();
        let blocking: Vec<TargetPair> = mine
            .iter()
            .copied()
            .filter(|p| {
                matches!(
                    self.assignments[p].state,
                    AssignmentState::Unanswered | AssignmentState::Skipped
                )
            })
            .collect();
        if !blocking.is_empty() {
            return Err(SurveyError::UnansweredRemaining(blocking));
        }
        if mine.is_empty() {
            return Ok(0);
        }
        let revision = self.tick();
        for p in &mine {
            let a = self.assignments.get_mut(p).expect("present");
            if let AssignmentState::Answered(s) = a.state {
                a.state = AssignmentState::Finalized(s);
                a.updated = revision;
            }
        }
        Ok(mine.len())
    }

    /// Loads answers that are final from the outset (earlier survey rounds).
    /// They belong to no respondent and take their pairs out of the pool.
    pub fn import_finalized(&mut self, answers: &[ExpertAnswer]) -> Result<usize, SurveyError> {
        let mut seen = BTreeSet::new();
        for a in answers {
            if self.assignments.contains_key(&a.pair) || !seen.insert(a.pair) {
                return Err(SurveyError::PairTaken(a.pair));
            }
            if a.score.is_negative() && a.explanation.as_deref().is_none_or(|e| e.trim().is_empty())
            {
                return Err(SurveyError::ExplanationRequired);
            }
        }
        let revision = self.tick();
        for a in answers {
            self.assignments.insert(
                a.pair,
                Assignment {
                    pair: a.pair,
                    respondent: None,
                    state: AssignmentState::Finalized(a.score),
                    explanation: a.explanation.clone(),
                    created: revision,
                    updated: revision,
                },
            );
        }
        Ok(answers.len())
    }

    pub fn respondent(&self, id: RespondentId) -> Option<&Respondent> {
        self.respondents.get(&id)
    }

    pub fn respondents(&self) -> impl Iterator<Item = &Respondent> {
        self.respondents.values()
    }

    pub fn pending(&self) -> Vec<&Respondent> {
        self.respondents
            .values()
            .filter(|r| r.status == Status::Pending)
            .collect()
    }

    pub fn selection(&self, id: RespondentId) -> Option<&GoalSelection> {
        self.selections.get(&id)
    }

    pub fn notifications(&self) -> &[Notification] {
        &self.notifications
    }

    pub fn assignment(&self, pair: TargetPair) -> Option<&Assignment> {
        self.assignments.get(&pair)
    }

    pub fn assignments(&self) -> impl Iterator<Item = &Assignment> {
        self.assignments.values()
    }

    pub fn assignments_of(&self, respondent: RespondentId) -> Vec<&Assignment> {
        self.assignments
            .values()
            .filter(|a| a.respondent == Some(respondent))
            .collect()
    }

    /// Finalized answers, in canonical pair order.
    pub fn finalized_answers(&self) -> Vec<ExpertAnswer> {
        self.assignments
            .values()
            .filter_map(|a| match a.state {
                AssignmentState::Finalized(score) => Some(ExpertAnswer {
                    pair: a.pair,
                    score,
                    explanation: a.explanation.clone(),
                }),
                _ => None,
            })
            .collect()
    }

    /// Only finalized scores are visible to the analytics.
    pub fn expert_store(&self) -> EvaluationStore {
        EvaluationStore::expert(
            self.finalized_answers()
                .into_iter()
                .map(|a| (a.pair, a.score)),
        )
    }

    pub fn snapshot(&self) -> SurveySnapshot {
        SurveySnapshot {
            respondents: self.respondents.values().cloned().collect(),
            selections: self.selections.values().cloned().collect(),
            assignments: self.assignments.values().cloned().collect(),
            notifications: self.notifications.clone(),
            counters: self.counters,
        }
    }

    /// Rebuilds an engine, checking referential integrity and the
    /// assignment invariants.
    pub fn restore(config: SurveyConfig, snapshot: SurveySnapshot) -> Result<Self, SurveyError> {
        let corrupt = |m: String| Err(SurveyError::CorruptSnapshot(m));
        let mut engine = SurveyEngine::new(config);
        engine.counters = snapshot.counters;
        for r in snapshot.respondents {
            if r.id.0 >= engine.counters.next_id {
                return corrupt(format!("respondent id {} beyond counter", r.id));
            }
            if engine.respondents.insert(r.id, r.clone()).is_some() {
                return corrupt(format!("duplicate respondent {}", r.id));
            }
        }
        let known = |id: &RespondentId| engine.respondents.contains_key(id);
        for s in &snapshot.selections {
            if !known(&s.respondent) {
                return corrupt(format!("selection for unknown respondent {}", s.respondent));
            }
        }
        for a in &snapshot.assignments {
            if let Some(r) = &a.respondent {
                if !known(r) {
                    return corrupt(format!("assignment {} for unknown respondent {r}", a.pair));
                }
            }
            if let AssignmentState::Answered(s) | AssignmentState::Finalized(s) = a.state {
                if s.is_negative() && a.explanation.is_none() {
                    return corrupt(format!("negative score for {} without explanation", a.pair));
                }
            }
        }
        for n in &snapshot.notifications {
            if !known(&n.curator) || !known(&n.respondent) {
                return corrupt("notification references unknown respondent".into());
            }
        }
        engine.selections = snapshot
            .selections
            .into_iter()
            .map(|s| (s.respondent, s))
            .collect();
        for a in snapshot.assignments {
            let pair = a.pair;
            if engine.assignments.insert(pair, a).is_some() {
                return corrupt(format!("pair {pair} assigned twice"));
            }
        }
        engine.notifications = snapshot.notifications;
        Ok(engine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(curator: RespondentId) -> Profile {
        Profile {
            name: "R. Santos".into(),
            primary_affiliation: "UP Diliman".into(),
            secondary_affiliation: None,
            education_level: "PhD".into(),
            experience: Some(Experience::OverTen),
            curator: Some(curator),
            consent: true,
        }
    }

    fn goals(ns: &[u32]) -> BTreeSet<GoalId> {
        ns.iter().map(|&n| GoalId::new(n).unwrap()).collect()
    }

    fn setup(seed: u64) -> (SurveyEngine, RespondentId, RespondentId) {
        let mut e = SurveyEngine::new(SurveyConfig {
            seed,
            ..SurveyConfig::default()
        });
        let admin = e.add_admin(Profile::default());
        let r = e.register(profile(admin)).unwrap().id;
        e.approve(admin, r).unwrap();
        (e, admin, r)
    }

    #[test]
    fn registration_and_approval() {
        let mut e = SurveyEngine::new(SurveyConfig::default());
        let admin = e.add_admin(Profile::default());
        let r = e.register(profile(admin)).unwrap();
        assert_eq!(r.status, Status::Pending);
        let r = r.id;
        assert_eq!(e.notifications()[0].curator, admin);

        let mut missing = profile(admin);
        missing.experience = None;
        assert_eq!(
            e.register(missing),
            Err(SurveyError::MissingField("experience"))
        );
        assert_eq!(
            e.register(profile(RespondentId(99))),
            Err(SurveyError::UnknownCurator(RespondentId(99)))
        );
        assert_eq!(e.register(profile(r)), Err(SurveyError::UnknownCurator(r)));

        assert_eq!(e.approve(r, r).unwrap_err(), SurveyError::NotAuthorized);
        assert_eq!(e.approve(admin, r).unwrap().status, Status::Approved);
        assert_eq!(e.approve(admin, r).unwrap_err(), SurveyError::NotPending(r));
    }

    #[test]
    fn goal_selection_rules() {
        let (mut e, _, r) = setup(1);
        assert_eq!(
            e.select_goals(r, goals(&[4])).unwrap_err(),
            SurveyError::TooFewGoals { min: 2, got: 1 }
        );
        assert_eq!(
            e.generate_batch(r, 20).unwrap_err(),
            SurveyError::NoGoalsSelected
        );
        e.select_goals(r, goals(&[3, 6])).unwrap();
        e.select_goals(r, goals(&[3, 6])).unwrap();
        let batch = e.generate_batch(r, 20).unwrap();
        assert_eq!(batch.assignments.len(), 20);
        assert!(!batch.exhausted);
        for a in &batch.assignments {
            for t in a.pair.endpoints() {
                assert!([3, 6].contains(&t.goal().number()));
            }
        }
        assert_eq!(
            e.select_goals(r, goals(&[1, 2])).unwrap_err(),
            SurveyError::SelectionLocked
        );
    }

    #[test]
    fn scoring_skip_and_finalize() {
        let (mut e, _, r) = setup(2);
        e.select_goals(r, goals(&[3, 6])).unwrap();
        let pairs: Vec<TargetPair> = e
            .generate_batch(r, 20)
            .unwrap()
            .assignments
            .iter()
            .map(|a| a.pair)
            .collect();
        let (first, second) = (pairs[0], pairs[1]);

        assert_eq!(
            e.submit_score(r, first, -1, Some("  ")).unwrap_err(),
            SurveyError::ExplanationRequired
        );
        assert_eq!(
            e.submit_score(r, first, 4, None).unwrap_err(),
            SurveyError::ScoreOutOfRange(4)
        );
        let a = e
            .submit_score(r, first, -2, Some("budget conflict"))
            .unwrap();
        assert_eq!(
            a.state,
            AssignmentState::Answered(ExpertScore::new(-2).unwrap())
        );
        assert_eq!(
            e.skip(r, first).unwrap_err(),
            SurveyError::AlreadyAnswered(first)
        );

        assert_eq!(e.skip(r, second).unwrap().state, AssignmentState::Skipped);
        assert_eq!(e.skip(r, second).unwrap().state, AssignmentState::Skipped);
        for &p in &pairs[2..] {
            e.submit_score(r, p, 3, None).unwrap();
        }
        assert_eq!(
            e.finalize(r),
            Err(SurveyError::UnansweredRemaining(vec![second]))
        );
        assert_eq!(e.generate_batch(r, 5).unwrap_err(), SurveyError::BatchOpen);
        e.submit_score(r, second, 0, None).unwrap();
        assert_eq!(e.finalize(r), Ok(20));
        assert_eq!(e.finalize(r), Ok(0));
        assert_eq!(
            e.submit_score(r, first, 1, None).unwrap_err(),
            SurveyError::AlreadyFinalized(first)
        );
        assert_eq!(e.expert_store().evaluated_count(Catalog::bundled()), 20);

        let other = e.register(profile(RespondentId(1))).unwrap().id;
        e.approve(RespondentId(1), other).unwrap();
        assert_eq!(
            e.skip(other, first).unwrap_err(),
            SurveyError::NotYourAssignment(first)
        );
    }

    #[test]
    fn pool_exhaustion_is_flagged() {
        let (mut e, _, r) = setup(3);
        // goals 7 and 13 have 5 targets each: 45 pairs
        e.select_goals(r, goals(&[7, 13])).unwrap();
        let first = e.generate_batch(r, 40).unwrap();
        for a in &first.assignments {
            e.submit_score(r, a.pair, 1, None).unwrap();
        }
        e.finalize(r).unwrap();
        let rest = e.generate_batch(r, 20).unwrap();
        assert_eq!(rest.assignments.len(), 5);
        assert!(rest.exhausted);
    }

    #[test]
    fn batches_replay_and_snapshot_roundtrip() {
        let run = || {
            let (mut e, _, r) = setup(42);
            e.select_goals(r, goals(&[3, 6])).unwrap();
            let b = e.generate_batch(r, 20).unwrap();
            (e, b)
        };
        let (e1, b1) = run();
        let (_, b2) = run();
        assert_eq!(b1, b2);
        let restored = SurveyEngine::restore(*e1.config(), e1.snapshot()).unwrap();
        assert_eq!(restored.snapshot(), e1.snapshot());

        let mut bad = e1.snapshot();
        bad.assignments.push(bad.assignments[0].clone());
        assert!(matches!(
            SurveyEngine::restore(*e1.config(), bad),
            Err(SurveyError::CorruptSnapshot(_))
        ));
    }

    #[test]
    fn imported_answers_leave_the_pool() {
        let (mut e, _, r) = setup(5);
        let pair = TargetPair::parse("7.1", "13.1").unwrap();
        let answer = ExpertAnswer {
            pair,
            score: ExpertScore::new(2).unwrap(),
            explanation: None,
        };
        assert_eq!(e.import_finalized(std::slice::from_ref(&answer)), Ok(1));
        assert_eq!(
            e.import_finalized(&[answer]),
            Err(SurveyError::PairTaken(pair))
        );
        e.select_goals(r, goals(&[7, 13])).unwrap();
        let b = e.generate_batch(r, 100).unwrap();
        assert_eq!(b.assignments.len(), 44);
        assert!(b.assignments.iter().all(|a| a.pair != pair));
    }

    #[test]
    fn assignment_json_shape() {
        let a = Assignment {
            pair: TargetPair::parse("3.8", "6.5").unwrap(),
            respondent: Some(RespondentId(2)),
            state: AssignmentState::Answered(ExpertScore::new(-2).unwrap()),
            explanation: Some("budget conflict".into()),
            created: 3,
            updated: 4,
        };
        let json = serde_json::to_value(&a).unwrap();
        assert_eq!(json["state"], "answered");
        assert_eq!(json["score"], -2);
        let back: Assignment = serde_json::from_value(json).unwrap();
        assert_eq!(back, a);
    }
}

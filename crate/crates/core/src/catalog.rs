//! The 17 goals and 169 targets, identifier grammar and pair enumeration.
//!
//! The bundled catalog lives in `data/catalog.csv`. The file starts with a
//! version line (`# sdg-catalog v1`) followed by a header row and one record
//! per target:
//!
//! ```text
//! target,goal,goal_name,goal_color,description
//! 1.1,1,No Poverty,#E5243B,Eradicate extreme poverty
//! ```
//!
//! Records must appear in catalog order (goal, then numeric suffixes, then
//! letter suffixes). Goal name and color must agree across all targets of a
//! goal.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const GOAL_COUNT: usize = 17;
pub const TARGET_COUNT: usize = 169;
/// `169 * 168 / 2`
pub const PAIR_COUNT: usize = TARGET_COUNT * (TARGET_COUNT - 1) / 2;

pub const CATALOG_VERSION: &str = "sdg-catalog v1";

static BUNDLED_CSV: &str = include_str!("../data/catalog.csv");

static BUNDLED: LazyLock<Catalog> =
    LazyLock::new(|| Catalog::from_csv_str(BUNDLED_CSV).expect("bundled catalog is valid"));

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("malformed identifier {0:?}")]
    MalformedId(String),
    #[error("unknown target {0:?}")]
    UnknownTarget(String),
    #[error("unknown goal {0}")]
    UnknownGoal(u32),
    #[error("a pair needs two distinct targets, got {0} twice")]
    SameTarget(TargetId),
    #[error("catalog file: {0}")]
    InvalidCatalog(String),
}

/// One of the 17 goals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GoalId(u8);

impl GoalId {
    pub fn new(number: u32) -> Result<Self, CatalogError> {
        if (1..=GOAL_COUNT as u32).contains(&number) {
            Ok(GoalId(number as u8))
        } else {
            Err(CatalogError::UnknownGoal(number))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = GoalId> {
        (1..=GOAL_COUNT as u8).map(GoalId)
    }
}

impl fmt::Display for GoalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for GoalId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for GoalId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = u32::deserialize(d)?;
        GoalId::new(n).map_err(serde::de::Error::custom)
    }
}

/// Numeric suffixes sort before letter suffixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetSuffix {
    Number(u8),
    Letter(char),
}

impl fmt::Display for TargetSuffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSuffix::Number(n) => write!(f, "{n}"),
            TargetSuffix::Letter(c) => write!(f, "{c}"),
        }
    }
}

/// A catalog target such as `4.B` or `8.10`.
///
/// Values obtained through [`TargetId::parse`] are always members of the
/// bundled catalog. The derived ordering is the catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TargetId {
    goal: GoalId,
    suffix: TargetSuffix,
}

impl TargetId {
    /// Parses and checks membership in the bundled catalog. Letter suffixes
    /// are accepted in either case.
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let id = parse_grammar(text)?;
        if Catalog::bundled().contains(id) {
            Ok(id)
        } else {
            Err(CatalogError::UnknownTarget(text.trim().to_string()))
        }
    }

    pub fn goal(self) -> GoalId {
        self.goal
    }

    pub fn suffix(self) -> TargetSuffix {
        self.suffix
    }
}

/// Grammar only: `<goal>.<number|letter>`, goal in 1..=17.
fn parse_grammar(text: &str) -> Result<TargetId, CatalogError> {
    let malformed = || CatalogError::MalformedId(text.to_string());
    let trimmed = text.trim();
    let (goal_part, suffix_part) = trimmed.split_once('.').ok_or_else(malformed)?;
    if goal_part.is_empty() || goal_part.len() > 2 || !goal_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(malformed());
    }
    let goal_number: u32 = goal_part.parse().map_err(|_| malformed())?;
    let suffix = match suffix_part.as_bytes() {
        [c] if c.is_ascii_alphabetic() => TargetSuffix::Letter(c.to_ascii_uppercase() as char),
        digits
            if !digits.is_empty() && digits.len() <= 2 && digits.iter().all(u8::is_ascii_digit) =>
        {
            let n: u8 = suffix_part.parse().map_err(|_| malformed())?;
            if n == 0 {
                return Err(malformed());
            }
            TargetSuffix::Number(n)
        }
        _ => return Err(malformed()),
    };
    let goal =
        GoalId::new(goal_number).map_err(|_| CatalogError::UnknownTarget(trimmed.to_string()))?;
    Ok(TargetId { goal, suffix })
}

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.goal, self.suffix)
    }
}

impl FromStr for TargetId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TargetId::parse(s)
    }
}

impl Serialize for TargetId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TargetId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        TargetId::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Catalog ordering of two targets.
pub fn compare_targets(x: TargetId, y: TargetId) -> Ordering {
    x.cmp(&y)
}

/// Unordered pair of distinct targets, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TargetPair {
    a: TargetId,
    b: TargetId,
}

impl TargetPair {
    pub fn new(x: TargetId, y: TargetId) -> Result<Self, CatalogError> {
        match x.cmp(&y) {
            Ordering::Less => Ok(TargetPair { a: x, b: y }),
            Ordering::Greater => Ok(TargetPair { a: y, b: x }),
            Ordering::Equal => Err(CatalogError::SameTarget(x)),
        }
    }

    pub fn parse(x: &str, y: &str) -> Result<Self, CatalogError> {
        TargetPair::new(TargetId::parse(x)?, TargetId::parse(y)?)
    }

    pub fn a(self) -> TargetId {
        self.a
    }

    pub fn b(self) -> TargetId {
        self.b
    }

    pub fn contains(self, t: TargetId) -> bool {
        self.a == t || self.b == t
    }

    pub fn is_intra_goal(self) -> bool {
        self.a.goal == self.b.goal
    }

    pub fn endpoints(self) -> [TargetId; 2] {
        [self.a, self.b]
    }
}

impl fmt::Display for TargetPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

impl<'de> Deserialize<'de> for TargetPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            a: TargetId,
            b: TargetId,
        }
        let raw = Raw::deserialize(d)?;
        TargetPair::new(raw.a, raw.b).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Goal {
    pub id: GoalId,
    pub name: String,
    /// `#RRGGBB`
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Target {
    pub id: TargetId,
    pub description: String,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    goals: Vec<Goal>,
    targets: Vec<Target>,
    index: HashMap<TargetId, usize>,
    // targets[goal_ranges[g - 1].0 .. goal_ranges[g - 1].1] belong to goal g
    goal_ranges: Vec<(usize, usize)>,
}

impl Catalog {
    pub fn bundled() -> &'static Catalog {
        &BUNDLED
    }

    pub fn from_csv_str(text: &str) -> Result<Catalog, CatalogError> {
        let invalid = |msg: String| CatalogError::InvalidCatalog(msg);
        let first = text.lines().next().unwrap_or_default();
        if first.trim_start_matches('#').trim() != CATALOG_VERSION {
            return Err(invalid(format!(
                "expected version line '# {CATALOG_VERSION}'"
            )));
        }

        #[derive(Deserialize)]
        struct Record {
            target: String,
            goal: u32,
            goal_name: String,
            goal_color: String,
            description: String,
        }

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut goals: Vec<Goal> = Vec::new();
        let mut targets: Vec<Target> = Vec::new();
        for (line, record) in reader.deserialize::<Record>().enumerate() {
            let record = record.map_err(|e| invalid(format!("record {}: {e}", line + 1)))?;
            let id = parse_grammar(&record.target)?;
            let goal = GoalId::new(record.goal)?;
            if id.goal != goal {
                return Err(invalid(format!(
                    "{} listed under goal {goal}",
                    record.target
                )));
            }
            if record.description.trim().is_empty() {
                return Err(invalid(format!("{id} has an empty description")));
            }
            if !is_hex_color(&record.goal_color) {
                return Err(invalid(format!(
                    "bad color {:?} for goal {goal}",
                    record.goal_color
                )));
            }
            if let Some(prev) = targets.last() {
                if prev.id >= id {
                    return Err(invalid(format!(
                        "{id} out of catalog order after {}",
                        prev.id
                    )));
                }
            }
            match goals.iter().find(|g| g.id == goal) {
                Some(g) if g.name != record.goal_name || g.color != record.goal_color => {
                    return Err(invalid(format!(
                        "goal {goal} name/color differ between records"
                    )));
                }
                Some(_) => {}
                None => goals.push(Goal {
                    id: goal,
                    name: record.goal_name,
                    color: record.goal_color,
                }),
            }
            targets.push(Target {
                id,
                description: record.description,
            });
        }

        if goals.len() != GOAL_COUNT {
            return Err(invalid(format!(
                "{} goals, expected {GOAL_COUNT}",
                goals.len()
            )));
        }
        if targets.len() != TARGET_COUNT {
            return Err(invalid(format!(
                "{} targets, expected {TARGET_COUNT}",
                targets.len()
            )));
        }

        let index = targets.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
        let mut goal_ranges = Vec::with_capacity(GOAL_COUNT);
        for g in GoalId::all() {
            let start = targets.partition_point(|t| t.id.goal < g);
            let end = targets.partition_point(|t| t.id.goal <= g);
            goal_ranges.push((start, end));
        }
        Ok(Catalog {
            goals,
            targets,
            index,
            goal_ranges,
        })
    }

    pub fn goals(&self) -> &[Goal] {
        &self.goals
    }

    pub fn goal(&self, id: GoalId) -> &Goal {
        &self.goals[id.0 as usize - 1]
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn targets_of(&self, goal: GoalId) -> &[Target] {
        let (start, end) = self.goal_ranges[goal.0 as usize - 1];
        &self.targets[start..end]
    }

    pub fn contains(&self, id: TargetId) -> bool {
        self.index.contains_key(&id)
    }

    /// Position of `id` in catalog order.
    pub fn index_of(&self, id: TargetId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn target(&self, id: TargetId) -> Option<&Target> {
        self.index_of(id).map(|i| &self.targets[i])
    }

    pub fn description(&self, id: TargetId) -> &str {
        self.target(id)
            .map(|t| t.description.as_str())
            .unwrap_or_default()
    }

    pub fn goal_color(&self, goal: GoalId) -> &str {
        &self.goal(goal).color
    }

    /// Every unordered pair of distinct targets, in canonical order.
    pub fn all_pairs(&self) -> Vec<TargetPair> {
        let ids: Vec<TargetId> = self.targets.iter().map(|t| t.id).collect();
        pairs_of(&ids)
    }

    /// Pairs with both endpoints under `goal`.
    pub fn intra_goal_pairs(&self, goal: GoalId) -> Vec<TargetPair> {
        let ids: Vec<TargetId> = self.targets_of(goal).iter().map(|t| t.id).collect();
        pairs_of(&ids)
    }
}

/// All unordered pairs over a sorted, duplicate-free slice of targets.
pub fn pairs_of(targets: &[TargetId]) -> Vec<TargetPair> {
    let n = targets.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for (i, &x) in targets.iter().enumerate() {
        for &y in &targets[i + 1..] {
            if let Ok(pair) = TargetPair::new(x, y) {
                out.push(pair);
            }
        }
    }
    out.sort_unstable();
    out
}

fn is_hex_color(s: &str) -> bool {
    s.len() == 7 && s.starts_with('#') && s[1..].bytes().all(|b| b.is_ascii_hexdigit())
}

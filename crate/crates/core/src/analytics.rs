//! Interaction graphs, edge styling, intra-goal reports, ugly/beautiful
//! verdicts, summary statistics and the two-method synthesis.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, GoalId, TargetId, TargetPair, PAIR_COUNT};
use crate::evaluation::{EdgeValue, EvaluationStore, Method, Polarity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("synthesis needs one expert and one indicator store, got {0} twice")]
    SameMethod(Method),
}

impl Serialize for EdgeValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            EdgeValue::Expert(score) => s.serialize_i8(score.value()),
            EdgeValue::Indicator(class) => s.serialize_str(class.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hue {
    Blue,
    Red,
    Black,
    Gray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStatus {
    Evaluated,
    Unevaluated,
}

/// One interaction edge as seen by a method; `value` is `None` when the pair
/// has not been evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub pair: TargetPair,
    pub method: Method,
    pub value: Option<EdgeValue>,
}

impl Edge {
    pub fn status(&self) -> EdgeStatus {
        if self.value.is_some() {
            EdgeStatus::Evaluated
        } else {
            EdgeStatus::Unevaluated
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeStyle {
    pub hue: Hue,
    /// 1..=3 for expert scores (|score|); darker is higher. None otherwise.
    pub shade: Option<u8>,
}

pub fn style_edge(edge: &Edge) -> EdgeStyle {
    let Some(value) = edge.value else {
        return EdgeStyle {
            hue: Hue::Gray,
            shade: None,
        };
    };
    let hue = match value.polarity() {
        Polarity::Positive => Hue::Blue,
        Polarity::Negative => Hue::Red,
        Polarity::Neutral => Hue::Black,
    };
    let shade = match value {
        EdgeValue::Expert(s) if s.value() != 0 => Some(s.value().unsigned_abs()),
        _ => None,
    };
    EdgeStyle { hue, shade }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphNode {
    pub id: TargetId,
    pub label: String,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub a: TargetId,
    pub b: TargetId,
    pub hue: Hue,
    pub shade: Option<u8>,
    pub value: Option<EdgeValue>,
    pub status: EdgeStatus,
}

/// `{nodes: [{id, label, color}], edges: [{a, b, hue, shade, value, status}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphDocument {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// Graph of every interaction between the targets of two goals (all
/// intra-goal pairs when both goals are the same). Unevaluated edges are
/// included and styled gray.
pub fn graph_query(
    store: &EvaluationStore,
    catalog: &Catalog,
    goal_a: GoalId,
    goal_b: GoalId,
) -> GraphDocument {
    let (first, second) = if goal_a <= goal_b {
        (goal_a, goal_b)
    } else {
        (goal_b, goal_a)
    };
    let mut nodes: Vec<GraphNode> = catalog
        .targets_of(first)
        .iter()
        .map(|t| GraphNode {
            id: t.id,
            label: t.id.to_string(),
            color: catalog.goal_color(first).to_string(),
        })
        .collect();

    let pairs: Vec<TargetPair> = if first == second {
        catalog.intra_goal_pairs(first)
    } else {
        nodes.extend(catalog.targets_of(second).iter().map(|t| GraphNode {
            id: t.id,
            label: t.id.to_string(),
            color: catalog.goal_color(second).to_string(),
        }));
        let mut cross = Vec::new();
        for x in catalog.targets_of(first) {
            for y in catalog.targets_of(second) {
                cross.push(TargetPair::new(x.id, y.id).expect("different goals"));
            }
        }
        cross.sort_unstable();
        cross
    };

    let edges = pairs
        .into_iter()
        .map(|pair| {
            let edge = Edge {
                pair,
                method: store.method(),
                value: store.get(pair),
            };
            let style = style_edge(&edge);
            GraphEdge {
                a: pair.a(),
                b: pair.b(),
                hue: style.hue,
                shade: style.shade,
                value: edge.value,
                status: edge.status(),
            }
        })
        .collect();
    GraphDocument { nodes, edges }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoalIntraInteractions {
    pub goal: GoalId,
    pub negative_count: usize,
    pub positive_count: usize,
    pub negative: Vec<TargetPair>,
    pub positive: Vec<TargetPair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntraGoalReport {
    pub method: Method,
    pub goals: Vec<GoalIntraInteractions>,
}

impl IntraGoalReport {
    pub fn goal(&self, goal: GoalId) -> &GoalIntraInteractions {
        &self.goals[goal.number() as usize - 1]
    }

    pub fn negative_pairs(&self) -> BTreeSet<TargetPair> {
        self.goals
            .iter()
            .flat_map(|g| g.negative.iter().copied())
            .collect()
    }

    pub fn positive_pairs(&self) -> BTreeSet<TargetPair> {
        self.goals
            .iter()
            .flat_map(|g| g.positive.iter().copied())
            .collect()
    }
}

/// Evaluated intra-goal pairs of every goal split by sign. Zero scores and
/// Nonclassified pairs appear in neither list.
pub fn intra_goal_report(store: &EvaluationStore, catalog: &Catalog) -> IntraGoalReport {
    let goals = GoalId::all()
        .map(|goal| {
            let mut negative = Vec::new();
            let mut positive = Vec::new();
            for pair in catalog.intra_goal_pairs(goal) {
                match store.get(pair).map(EdgeValue::polarity) {
                    Some(Polarity::Negative) => negative.push(pair),
                    Some(Polarity::Positive) => positive.push(pair),
                    _ => {}
                }
            }
            GoalIntraInteractions {
                goal,
                negative_count: negative.len(),
                positive_count: positive.len(),
                negative,
                positive,
            }
        })
        .collect();
    IntraGoalReport {
        method: store.method(),
        goals,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Beautiful,
    Ugly,
    Unevaluated,
}

impl Bucket {
    /// Results-page color of a target description.
    pub fn color(self) -> &'static str {
        match self {
            Bucket::Beautiful => "blue",
            Bucket::Ugly => "red",
            Bucket::Unevaluated => "black",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TargetVerdict {
    pub target: TargetId,
    pub negatives: usize,
    pub positives: usize,
    /// zero scores, or Nonclassified pairs for the indicator method
    pub zeros: usize,
    pub bucket: Bucket,
}

impl TargetVerdict {
    pub fn evaluated(&self) -> usize {
        self.negatives + self.positives + self.zeros
    }
}

/// One verdict per catalog target, in catalog order.
pub fn verdicts(store: &EvaluationStore, catalog: &Catalog) -> Vec<TargetVerdict> {
    let n = catalog.targets().len();
    let mut counts = vec![[0usize; 3]; n];
    for (pair, value) in store.evaluated(catalog) {
        let slot = match value.polarity() {
            Polarity::Negative => 0,
            Polarity::Positive => 1,
            Polarity::Neutral => 2,
        };
        for t in pair.endpoints() {
            let i = catalog.index_of(t).expect("catalog target");
            counts[i][slot] += 1;
        }
    }
    catalog
        .targets()
        .iter()
        .zip(counts)
        .map(|(t, [negatives, positives, zeros])| {
            let bucket = if negatives > 0 {
                Bucket::Ugly
            } else if positives + zeros > 0 {
                Bucket::Beautiful
            } else {
                Bucket::Unevaluated
            };
            TargetVerdict {
                target: t.id,
                negatives,
                positives,
                zeros,
                bucket,
            }
        })
        .collect()
}

/// Ugly targets, ugliest first (ties in catalog order).
pub fn ugliness_ranking(verdicts: &[TargetVerdict]) -> Vec<TargetVerdict> {
    let mut ugly: Vec<TargetVerdict> = verdicts
        .iter()
        .filter(|v| v.bucket == Bucket::Ugly)
        .copied()
        .collect();
    ugly.sort_by(|x, y| y.negatives.cmp(&x.negatives).then(x.target.cmp(&y.target)));
    ugly
}

/// Beautiful targets, most positive interactions first. Zero scores mark a
/// target as evaluated but add nothing to its beauty.
pub fn beauty_ranking(verdicts: &[TargetVerdict]) -> Vec<TargetVerdict> {
    let mut beautiful: Vec<TargetVerdict> = verdicts
        .iter()
        .filter(|v| v.bucket == Bucket::Beautiful)
        .copied()
        .collect();
    beautiful.sort_by(|x, y| y.positives.cmp(&x.positives).then(x.target.cmp(&y.target)));
    beautiful
}

/// Percentage with two decimals, rounded half up. Stored in hundredths of a
/// percent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Percent(u64);

impl Percent {
    pub fn of(count: usize, denominator: usize) -> Percent {
        if denominator == 0 {
            return Percent(0);
        }
        let (c, d) = (count as u64, denominator as u64);
        Percent((c * 20_000 + d) / (2 * d))
    }

    pub fn hundredths(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0 as f64 / 100.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassShare {
    pub class: &'static str,
    pub count: usize,
    pub percent: Percent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryStats {
    pub method: Method,
    pub total_pairs: usize,
    pub evaluated: usize,
    pub evaluated_percent: Percent,
    /// What class percentages are relative to: `evaluated` or `all_pairs`.
    pub percent_of: &'static str,
    pub classes: Vec<ClassShare>,
}

impl SummaryStats {
    pub fn class(&self, name: &str) -> Option<&ClassShare> {
        self.classes.iter().find(|c| c.class == name)
    }
}

/// Expert shares are relative to evaluated edges, indicator shares to all
/// catalog pairs.
pub fn summary_stats(store: &EvaluationStore, catalog: &Catalog) -> SummaryStats {
    let total_pairs = catalog.all_pairs().len();
    debug_assert_eq!(total_pairs, PAIR_COUNT);
    let (mut negative, mut positive, mut neutral) = (0, 0, 0);
    for (_, value) in store.evaluated(catalog) {
        match value.polarity() {
            Polarity::Negative => negative += 1,
            Polarity::Positive => positive += 1,
            Polarity::Neutral => neutral += 1,
        }
    }
    let evaluated = negative + positive + neutral;
    let (percent_of, denominator, names) = match store.method() {
        Method::Expert => ("evaluated", evaluated, ["negative", "positive", "zero"]),
        Method::Indicator => (
            "all_pairs",
            total_pairs,
            ["tradeoff", "synergy", "nonclassified"],
        ),
    };
    let classes = names
        .into_iter()
        .zip([negative, positive, neutral])
        .map(|(class, count)| ClassShare {
            class,
            count,
            percent: Percent::of(count, denominator),
        })
        .collect();
    SummaryStats {
        method: store.method(),
        total_pairs,
        evaluated,
        evaluated_percent: Percent::of(evaluated, total_pairs),
        percent_of,
        classes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisConfig {
    /// Minimum negatives for an ugly target to enter the common-ugly set.
    pub multi_negative_min: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            multi_negative_min: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FocusTarget {
    pub target: TargetId,
    /// Same-goal targets it has a negative interaction with under either method.
    pub conflicts: Vec<TargetId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommonUgly {
    pub target: TargetId,
    pub expert_negatives: usize,
    pub indicator_negatives: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommonBeautiful {
    pub target: TargetId,
    pub expert_positives: usize,
    pub indicator_positives: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub item: String,
    pub conflicts_with: Vec<TargetId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NegativeAnswer {
    /// Goals with negative intra-goal interactions under both methods.
    pub common_goals: Vec<GoalId>,
    /// Targets involved in negative intra-goal pairs under both methods.
    pub focus_targets: Vec<FocusTarget>,
    /// Targets with multiple negatives under both methods.
    pub common_ugly: Vec<CommonUgly>,
    /// Union of focus and common-ugly targets.
    pub targets: Vec<TargetId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PositiveAnswer {
    pub common_goals: Vec<GoalId>,
    /// Positive intra-goal pairs found by both methods.
    pub common_pairs: Vec<TargetPair>,
    /// Beautiful under both methods with at least one positive interaction in each.
    pub common_beautiful: Vec<CommonBeautiful>,
    /// Targets to prioritize once anything touching the negative answer is removed.
    pub prioritized_targets: Vec<TargetId>,
    pub excluded: Vec<Exclusion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynthesisReport {
    pub multi_negative_min: usize,
    pub negative: NegativeAnswer,
    pub positive: PositiveAnswer,
}

/// Intersects the expert and indicator results. Argument order does not
/// matter; the stores are told apart by method.
pub fn synthesize(
    first: &EvaluationStore,
    second: &EvaluationStore,
    catalog: &Catalog,
    config: &SynthesisConfig,
) -> Result<SynthesisReport, AnalyticsError> {
    let (expert, indicator) = match (first.method(), second.method()) {
        (Method::Expert, Method::Indicator) => (first, second),
        (Method::Indicator, Method::Expert) => (second, first),
        (m, _) => return Err(AnalyticsError::SameMethod(m)),
    };
    let intra_e = intra_goal_report(expert, catalog);
    let intra_i = intra_goal_report(indicator, catalog);
    let verdicts_e = verdicts(expert, catalog);
    let verdicts_i = verdicts(indicator, catalog);

    let goals_with = |report: &IntraGoalReport, negative: bool| -> BTreeSet<GoalId> {
        report
            .goals
            .iter()
            .filter(|g| {
                if negative {
                    g.negative_count > 0
                } else {
                    g.positive_count > 0
                }
            })
            .map(|g| g.goal)
            .collect()
    };
    let endpoints = |pairs: &BTreeSet<TargetPair>| -> BTreeSet<TargetId> {
        pairs.iter().flat_map(|p| p.endpoints()).collect()
    };

    // negative answer
    let neg_e = intra_e.negative_pairs();
    let neg_i = intra_i.negative_pairs();
    let common_neg_goals: Vec<GoalId> = goals_with(&intra_e, true)
        .intersection(&goals_with(&intra_i, true))
        .copied()
        .collect();
    let focus: BTreeSet<TargetId> = endpoints(&neg_e)
        .intersection(&endpoints(&neg_i))
        .copied()
        .collect();
    let focus_targets = focus
        .iter()
        .map(|&t| {
            let conflicts: BTreeSet<TargetId> = neg_e
                .iter()
                .chain(&neg_i)
                .filter(|p| p.contains(t))
                .flat_map(|p| p.endpoints())
                .filter(|&u| u != t)
                .collect();
            FocusTarget {
                target: t,
                conflicts: conflicts.into_iter().collect(),
            }
        })
        .collect();
    let common_ugly: Vec<CommonUgly> = verdicts_e
        .iter()
        .zip(&verdicts_i)
        .filter(|(e, i)| {
            e.negatives >= config.multi_negative_min && i.negatives >= config.multi_negative_min
        })
        .map(|(e, i)| CommonUgly {
            target: e.target,
            expert_negatives: e.negatives,
            indicator_negatives: i.negatives,
        })
        .collect();
    let negative_targets: BTreeSet<TargetId> = focus
        .iter()
        .copied()
        .chain(common_ugly.iter().map(|u| u.target))
        .collect();

    // positive answer
    let common_pos_goals: Vec<GoalId> = goals_with(&intra_e, false)
        .intersection(&goals_with(&intra_i, false))
        .copied()
        .collect();
    let common_pairs: Vec<TargetPair> = intra_e
        .positive_pairs()
        .intersection(&intra_i.positive_pairs())
        .copied()
        .collect();
    let common_beautiful: Vec<CommonBeautiful> = verdicts_e
        .iter()
        .zip(&verdicts_i)
        .filter(|(e, i)| {
            e.bucket == Bucket::Beautiful
                && i.bucket == Bucket::Beautiful
                && e.positives > 0
                && i.positives > 0
        })
        .map(|(e, i)| CommonBeautiful {
            target: e.target,
            expert_positives: e.positives,
            indicator_positives: i.positives,
        })
        .collect();

    let mut prioritized = BTreeSet::new();
    let mut excluded = Vec::new();
    let conflicts_of = |ts: &[TargetId]| -> Vec<TargetId> {
        ts.iter()
            .copied()
            .filter(|t| negative_targets.contains(t))
            .collect()
    };
    for pair in &common_pairs {
        let conflicts = conflicts_of(&pair.endpoints());
        if conflicts.is_empty() {
            prioritized.extend(pair.endpoints());
        } else {
            excluded.push(Exclusion {
                item: pair.to_string(),
                conflicts_with: conflicts,
            });
        }
    }
    for b in &common_beautiful {
        let conflicts = conflicts_of(&[b.target]);
        if conflicts.is_empty() {
            prioritized.insert(b.target);
        } else {
            excluded.push(Exclusion {
                item: b.target.to_string(),
                conflicts_with: conflicts,
            });
        }
    }

    Ok(SynthesisReport {
        multi_negative_min: config.multi_negative_min,
        negative: NegativeAnswer {
            common_goals: common_neg_goals,
            focus_targets,
            common_ugly,
            targets: negative_targets.into_iter().collect(),
        },
        positive: PositiveAnswer {
            common_goals: common_pos_goals,
            common_pairs,
            common_beautiful,
            prioritized_targets: prioritized.into_iter().collect(),
            excluded,
        },
    })
}

//! Result documents shared by the CLI exporters and the HTTP service. Both
//! render through [`to_json_bytes`], so equal stores give equal bytes.

use serde::Serialize;

use crate::analytics::{
    beauty_ranking, intra_goal_report, summary_stats, ugliness_ranking, verdicts, Bucket,
    IntraGoalReport, SummaryStats, SynthesisReport, TargetVerdict,
};
use crate::catalog::{Catalog, TargetId, CATALOG_VERSION, TARGET_COUNT};
use crate::evaluation::{EdgeValue, EvaluationStore, Method, Polarity};

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(doc: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(doc).expect("documents always serialize");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl std::str::FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Sign::Positive),
            "negative" => Ok(Sign::Negative),
            other => Err(format!("unknown sign {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListedPair {
    pub a: TargetId,
    pub b: TargetId,
    pub value: EdgeValue,
    pub intra_goal: bool,
}

/// Evaluated positive (or negative) interactions of one method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairListing {
    pub method: Method,
    pub sign: Sign,
    pub count: usize,
    pub pairs: Vec<ListedPair>,
}

pub fn pair_listing(store: &EvaluationStore, catalog: &Catalog, sign: Sign) -> PairListing {
    let wanted = match sign {
        Sign::Positive => Polarity::Positive,
        Sign::Negative => Polarity::Negative,
    };
    let pairs: Vec<ListedPair> = store
        .evaluated(catalog)
        .filter(|(_, v)| v.polarity() == wanted)
        .map(|(p, value)| ListedPair {
            a: p.a(),
            b: p.b(),
            value,
            intra_goal: p.is_intra_goal(),
        })
        .collect();
    PairListing {
        method: store.method(),
        sign,
        count: pairs.len(),
        pairs,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListedTarget {
    pub target: TargetId,
    pub description: String,
    pub negatives: usize,
    pub positives: usize,
    pub zeros: usize,
    pub bucket: Bucket,
    pub color: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ranked {
    pub target: TargetId,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictListing {
    pub method: Method,
    pub beautiful: usize,
    pub ugly: usize,
    pub unevaluated: usize,
    /// Ugly targets by descending negatives.
    pub ugliness: Vec<Ranked>,
    /// Beautiful targets by descending positives.
    pub beauty: Vec<Ranked>,
    pub targets: Vec<ListedTarget>,
}

pub fn verdict_listing(store: &EvaluationStore, catalog: &Catalog) -> VerdictListing {
    listing_from(store.method(), &verdicts(store, catalog), catalog)
}

fn listing_from(method: Method, v: &[TargetVerdict], catalog: &Catalog) -> VerdictListing {
    let count = |b: Bucket| v.iter().filter(|x| x.bucket == b).count();
    VerdictListing {
        method,
        beautiful: count(Bucket::Beautiful),
        ugly: count(Bucket::Ugly),
        unevaluated: count(Bucket::Unevaluated),
        ugliness: ugliness_ranking(v)
            .into_iter()
            .map(|x| Ranked {
                target: x.target,
                count: x.negatives,
            })
            .collect(),
        beauty: beauty_ranking(v)
            .into_iter()
            .map(|x| Ranked {
                target: x.target,
                count: x.positives,
            })
            .collect(),
        targets: v
            .iter()
            .map(|x| ListedTarget {
                target: x.target,
                description: catalog.description(x.target).to_string(),
                negatives: x.negatives,
                positives: x.positives,
                zeros: x.zeros,
                bucket: x.bucket,
                color: x.bucket.color(),
            })
            .collect(),
    }
}

/// Verdicts of both methods, as served on the targets results page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetsDocument {
    pub expert: VerdictListing,
    pub indicator: VerdictListing,
}

pub fn targets_document(
    expert: &EvaluationStore,
    indicator: &EvaluationStore,
    catalog: &Catalog,
) -> TargetsDocument {
    TargetsDocument {
        expert: verdict_listing(expert, catalog),
        indicator: verdict_listing(indicator, catalog),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MethodReport {
    pub method: Method,
    pub stats: SummaryStats,
    pub intra_goal: IntraGoalReport,
    pub verdicts: VerdictListing,
}

pub fn method_report(store: &EvaluationStore, catalog: &Catalog) -> MethodReport {
    MethodReport {
        method: store.method(),
        stats: summary_stats(store, catalog),
        intra_goal: intra_goal_report(store, catalog),
        verdicts: verdict_listing(store, catalog),
    }
}

impl MethodReport {
    /// Cross-checks the parts against each other.
    pub fn check(&self) -> Result<(), String> {
        let v = &self.verdicts;
        if v.beautiful + v.ugly + v.unevaluated != TARGET_COUNT {
            return Err(format!(
                "{} method: verdict buckets do not cover every target",
                self.method
            ));
        }
        let negative_edges = self.stats.classes.first().map_or(0, |c| c.count);
        let negatives: usize = v.targets.iter().map(|t| t.negatives).sum();
        if negatives != 2 * negative_edges {
            return Err(format!(
                "{} method: {negatives} negative endpoints for {negative_edges} negative edges",
                self.method
            ));
        }
        let incident: usize = v
            .targets
            .iter()
            .map(|t| t.negatives + t.positives + t.zeros)
            .sum();
        if incident != 2 * self.stats.evaluated {
            return Err(format!(
                "{} method: incident edge counts disagree with stats",
                self.method
            ));
        }
        for g in &self.intra_goal.goals {
            if g.negative.len() != g.negative_count || g.positive.len() != g.positive_count {
                return Err(format!(
                    "{} method: goal {} counts disagree",
                    self.method, g.goal
                ));
            }
        }
        Ok(())
    }
}

/// Everything one analysis run produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportBundle {
    /// Supplied by the caller; left out by default so reruns are byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub catalog: &'static str,
    pub methods: Vec<MethodReport>,
    pub synthesis: Option<SynthesisReport>,
}

impl ReportBundle {
    pub fn new(stores: &[&EvaluationStore], catalog: &Catalog) -> Self {
        ReportBundle {
            generated_at: None,
            catalog: CATALOG_VERSION,
            methods: stores.iter().map(|s| method_report(s, catalog)).collect(),
            synthesis: None,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        self.methods.iter().try_for_each(MethodReport::check)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::TargetPair;
    use crate::evaluation::ExpertScore;

    fn store() -> EvaluationStore {
        EvaluationStore::expert(
            [("3.1", "3.6", -2), ("3.1", "8.2", 3), ("1.1", "1.2", 0)]
                .into_iter()
                .map(|(a, b, s)| {
                    (
                        TargetPair::parse(a, b).unwrap(),
                        ExpertScore::new(s).unwrap(),
                    )
                }),
        )
    }

    #[test]
    fn listings() {
        let cat = Catalog::bundled();
        let pos = pair_listing(&store(), cat, Sign::Positive);
        assert_eq!(pos.count, 1);
        assert!(!pos.pairs[0].intra_goal);
        let neg = pair_listing(&store(), cat, Sign::Negative);
        assert_eq!(neg.count, 1);
        let json = String::from_utf8(to_json_bytes(&neg)).unwrap();
        assert!(json.ends_with("}\n"));
        assert!(json.contains("\"value\": -2"));
    }

    #[test]
    fn bundle_is_consistent() {
        let cat = Catalog::bundled();
        let s = store();
        let bundle = ReportBundle::new(&[&s], cat);
        bundle.check().unwrap();
        let v = &bundle.methods[0].verdicts;
        assert_eq!((v.ugly, v.beautiful, v.unevaluated), (2, 3, 164));
        assert_eq!(v.ugliness[0].target.to_string(), "3.1");
        assert!(!String::from_utf8(to_json_bytes(&bundle))
            .unwrap()
            .contains("generated_at"));
    }
}

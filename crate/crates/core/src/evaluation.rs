//! Per-method evaluation stores: the classified edges the analytics run on.
//!
//! Expert answers are exchanged as CSV:
//!
//! ```text
//! target_a,target_b,score,explanation
//! 3.1,3.6,-2,budget conflict
//! 3.1,3.7,3,
//! ```
//!
//! Negative scores need a non-empty explanation.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, TargetPair};
use crate::correlation::{IndicatorResults, InteractionClass};

/// A score on the seven-point interaction scale, -3..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ExpertScore(i8);

impl ExpertScore {
    pub fn new(value: i64) -> Option<Self> {
        (-3..=3)
            .contains(&value)
            .then_some(ExpertScore(value as i8))
    }

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn label(self) -> ScaleLabel {
        ScaleLabel::ALL[(self.0 + 3) as usize]
    }
}

impl<'de> Deserialize<'de> for ExpertScore {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        ExpertScore::new(v)
            .ok_or_else(|| serde::de::Error::custom(format!("score {v} out of range")))
    }
}

impl fmt::Display for ExpertScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleLabel {
    Cancelling,
    Counteracting,
    Constraining,
    Consistent,
    Enabling,
    Reinforcing,
    Indivisible,
}

impl ScaleLabel {
    /// Indexed by score + 3.
    pub const ALL: [ScaleLabel; 7] = [
        ScaleLabel::Cancelling,
        ScaleLabel::Counteracting,
        ScaleLabel::Constraining,
        ScaleLabel::Consistent,
        ScaleLabel::Enabling,
        ScaleLabel::Reinforcing,
        ScaleLabel::Indivisible,
    ];

    pub fn score(self) -> ExpertScore {
        let i = ScaleLabel::ALL
            .iter()
            .position(|&l| l == self)
            .expect("label listed");
        ExpertScore(i as i8 - 3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Expert,
    Indicator,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Expert => "expert",
            Method::Indicator => "indicator",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expert" => Ok(Method::Expert),
            "indicator" => Ok(Method::Indicator),
            other => Err(format!(
                "unknown method {other:?} (expected expert or indicator)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeValue {
    Expert(ExpertScore),
    Indicator(InteractionClass),
}

/// Sign of an evaluated interaction, common to both methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

impl EdgeValue {
    pub fn polarity(self) -> Polarity {
        match self {
            EdgeValue::Expert(s) if s.value() < 0 => Polarity::Negative,
            EdgeValue::Expert(s) if s.value() > 0 => Polarity::Positive,
            EdgeValue::Expert(_) => Polarity::Neutral,
            EdgeValue::Indicator(InteractionClass::TradeOff) => Polarity::Negative,
            EdgeValue::Indicator(InteractionClass::Synergy) => Polarity::Positive,
            EdgeValue::Indicator(InteractionClass::Nonclassified) => Polarity::Neutral,
        }
    }
}

/// Evaluated edges for one method.
///
/// An indicator store built from results covers every pair (pairs without a
/// stored value are Nonclassified). An expert store only knows the pairs that
/// have a finalized score; the rest are unevaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationStore {
    method: Method,
    values: BTreeMap<TargetPair, EdgeValue>,
    fallback: Option<EdgeValue>,
}

impl EvaluationStore {
    pub fn empty(method: Method) -> Self {
        EvaluationStore {
            method,
            values: BTreeMap::new(),
            fallback: None,
        }
    }

    pub fn expert(answers: impl IntoIterator<Item = (TargetPair, ExpertScore)>) -> Self {
        EvaluationStore {
            method: Method::Expert,
            values: answers
                .into_iter()
                .map(|(p, s)| (p, EdgeValue::Expert(s)))
                .collect(),
            fallback: None,
        }
    }

    pub fn indicator(results: &IndicatorResults) -> Self {
        EvaluationStore {
            method: Method::Indicator,
            values: results
                .iter()
                .filter(|r| r.class != InteractionClass::Nonclassified)
                .map(|r| (r.pair, EdgeValue::Indicator(r.class)))
                .collect(),
            fallback: Some(EdgeValue::Indicator(InteractionClass::Nonclassified)),
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn get(&self, pair: TargetPair) -> Option<EdgeValue> {
        self.values.get(&pair).copied().or(self.fallback)
    }

    /// Every evaluated edge, in canonical pair order.
    pub fn evaluated<'a>(
        &'a self,
        catalog: &'a Catalog,
    ) -> Box<dyn Iterator<Item = (TargetPair, EdgeValue)> + 'a> {
        match self.fallback {
            None => Box::new(self.values.iter().map(|(&p, &v)| (p, v))),
            Some(_) => Box::new(
                catalog
                    .all_pairs()
                    .into_iter()
                    .map(move |p| (p, self.get(p).expect("fallback present"))),
            ),
        }
    }

    pub fn evaluated_count(&self, catalog: &Catalog) -> usize {
        match self.fallback {
            None => self.values.len(),
            Some(_) => catalog.all_pairs().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpertAnswer {
    pub pair: TargetPair,
    pub score: ExpertScore,
    pub explanation: Option<String>,
}

pub const EXPERT_HEADER: [&str; 4] = ["target_a", "target_b", "score", "explanation"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct AnswersFormatError {
    pub line: u64,
    pub message: String,
}

pub fn read_expert_answers<R: Read>(input: R) -> Result<Vec<ExpertAnswer>, AnswersFormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let err = |line: u64, message: String| AnswersFormatError { line, message };
    let headers = reader.headers().map_err(|e| err(1, e.to_string()))?;
    let names: Vec<&str> = headers.iter().collect();
    if names != EXPERT_HEADER[..3] && names != EXPERT_HEADER {
        return Err(err(
            1,
            format!("expected header {}", EXPERT_HEADER.join(",")),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < 3 {
            return Err(err(line, "expected at least 3 fields".into()));
        }
        let pair =
            TargetPair::parse(&record[0], &record[1]).map_err(|e| err(line, e.to_string()))?;
        let score = record[2]
            .parse::<i64>()
            .ok()
            .and_then(ExpertScore::new)
            .ok_or_else(|| err(line, format!("score {:?} not in -3..=3", &record[2])))?;
        let explanation = record.get(3).filter(|s| !s.is_empty()).map(str::to_string);
        if score.is_negative() && explanation.is_none() {
            return Err(err(
                line,
                format!("negative score for {pair} without explanation"),
            ));
        }
        if !seen.insert(pair) {
            return Err(err(line, format!("duplicate pair {pair}")));
        }
        out.push(ExpertAnswer {
            pair,
            score,
            explanation,
        });
    }
    Ok(out)
}

pub fn write_expert_answers<W: Write>(answers: &[ExpertAnswer], out: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(EXPERT_HEADER)?;
    let mut sorted: Vec<&ExpertAnswer> = answers.iter().collect();
    sorted.sort_by_key(|a| a.pair);
    for a in sorted {
        writer.write_record([
            a.pair.a().to_string(),
            a.pair.b().to_string(),
            a.score.to_string(),
            a.explanation.clone().unwrap_or_default(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

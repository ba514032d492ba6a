//! Tie-aware Spearman correlation, threshold classification and aggregation
//! of indicator-pair classes to target pairs.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, TargetId, TargetPair};
use crate::ingest::{align, AlignedPairSample, IndicatorSeries};

/// Coefficients at or above this value are synergies; at or below its
/// negation, trade-offs.
pub const CLASS_THRESHOLD: f64 = 0.6;
/// Slack on the threshold comparison so that values which are exactly
/// +-0.6 in real arithmetic are not lost to rounding.
const THRESHOLD_SLACK: f64 = 1e-12;
pub const DEFAULT_MIN_OVERLAP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelationConfig {
    /// Samples with fewer common years yield [`Coefficient::Undefined`].
    pub min_overlap: usize,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        CorrelationConfig {
            min_overlap: DEFAULT_MIN_OVERLAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Defined(f64),
    /// Too few observations or a constant vector.
    Undefined,
}

impl Coefficient {
    pub fn value(self) -> Option<f64> {
        match self {
            Coefficient::Defined(v) => Some(v),
            Coefficient::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionClass {
    Synergy,
    #[serde(rename = "tradeoff")]
    TradeOff,
    Nonclassified,
}

impl InteractionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            InteractionClass::Synergy => "synergy",
            InteractionClass::TradeOff => "tradeoff",
            InteractionClass::Nonclassified => "nonclassified",
        }
    }
}

impl fmt::Display for InteractionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InteractionClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "synergy" => Ok(InteractionClass::Synergy),
            "tradeoff" | "trade-off" => Ok(InteractionClass::TradeOff),
            "nonclassified" | "non-classified" => Ok(InteractionClass::Nonclassified),
            other => Err(format!("unknown interaction class {other:?}")),
        }
    }
}

/// Average (fractional) ranks, 1-based. Tied values share the mean of the
/// ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation; `None` when either vector has no variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mean_x, b - mean_y);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho of two equal-length vectors with no minimum-overlap gate.
pub fn spearman(x: &[f64], y: &[f64]) -> Coefficient {
    assert_eq!(x.len(), y.len(), "spearman needs equal-length vectors");
    match pearson(&average_ranks(x), &average_ranks(y)) {
        Some(r) => Coefficient::Defined(r),
        None => Coefficient::Undefined,
    }
}

pub fn spearman_rho(sample: &AlignedPairSample, config: &CorrelationConfig) -> Coefficient {
    if sample.len() < config.min_overlap.max(2) {
        return Coefficient::Undefined;
    }
    spearman(&sample.x, &sample.y)
}

pub fn classify(rho: Coefficient) -> InteractionClass {
    match rho {
        Coefficient::Defined(v) if v >= CLASS_THRESHOLD - THRESHOLD_SLACK => {
            InteractionClass::Synergy
        }
        Coefficient::Defined(v) if v <= -CLASS_THRESHOLD + THRESHOLD_SLACK => {
            InteractionClass::TradeOff
        }
        _ => InteractionClass::Nonclassified,
    }
}

/// Counts of indicator-pair classes behind one target pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub synergies: u32,
    pub tradeoffs: u32,
    pub nonclassified: u32,
}

impl Tally {
    pub fn add(&mut self, class: InteractionClass) {
        match class {
            InteractionClass::Synergy => self.synergies += 1,
            InteractionClass::TradeOff => self.tradeoffs += 1,
            InteractionClass::Nonclassified => self.nonclassified += 1,
        }
    }

    pub fn total(&self) -> u32 {
        self.synergies + self.tradeoffs + self.nonclassified
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Strict plurality; any tie for first place (or no data) is Nonclassified.
    pub fn plurality(&self) -> InteractionClass {
        let (s, t, n) = (self.synergies, self.tradeoffs, self.nonclassified);
        if s > t && s > n {
            InteractionClass::Synergy
        } else if t > s && t > n {
            InteractionClass::TradeOff
        } else {
            InteractionClass::Nonclassified
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TargetMethodResult {
    pub pair: TargetPair,
    pub class: InteractionClass,
    pub tally: Tally,
}

impl TargetMethodResult {
    pub fn unclassified(pair: TargetPair) -> Self {
        TargetMethodResult {
            pair,
            class: InteractionClass::Nonclassified,
            tally: Tally::default(),
        }
    }
}

pub fn aggregate_to_target(
    pair: TargetPair,
    indicator_classes: impl IntoIterator<Item = InteractionClass>,
) -> TargetMethodResult {
    let mut tally = Tally::default();
    for class in indicator_classes {
        tally.add(class);
    }
    TargetMethodResult {
        pair,
        class: tally.plurality(),
        tally,
    }
}

/// Target-level indicator results for every catalog pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorResults {
    results: BTreeMap<TargetPair, TargetMethodResult>,
}

impl IndicatorResults {
    /// All pairs Nonclassified with empty tallies.
    pub fn unclassified(catalog: &Catalog) -> Self {
        let results = catalog
            .all_pairs()
            .into_iter()
            .map(|p| (p, TargetMethodResult::unclassified(p)))
            .collect();
        IndicatorResults { results }
    }

    pub fn get(&self, pair: TargetPair) -> Option<&TargetMethodResult> {
        self.results.get(&pair)
    }

    pub fn class_of(&self, pair: TargetPair) -> InteractionClass {
        self.get(pair)
            .map_or(InteractionClass::Nonclassified, |r| r.class)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TargetMethodResult> {
        self.results.values()
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn count(&self, class: InteractionClass) -> usize {
        self.iter().filter(|r| r.class == class).count()
    }

    /// Rows worth exporting: anything with indicator data or a class.
    fn exported(&self) -> impl Iterator<Item = &TargetMethodResult> {
        self.iter()
            .filter(|r| !r.tally.is_empty() || r.class != InteractionClass::Nonclassified)
    }

    /// Writes the results table. Pairs with no indicator data are omitted
    /// and read back as Nonclassified.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(RESULTS_HEADER)?;
        for r in self.exported() {
            writer.write_record([
                r.pair.a().to_string(),
                r.pair.b().to_string(),
                r.class.to_string(),
                r.tally.synergies.to_string(),
                r.tally.tradeoffs.to_string(),
                r.tally.nonclassified.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads a results table; returns the full result set and the number of
    /// rows in the file.
    pub fn read_csv<R: Read>(
        input: R,
        catalog: &Catalog,
    ) -> Result<(IndicatorResults, usize), ResultsFormatError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| ResultsFormatError::new(1, e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != RESULTS_HEADER {
            return Err(ResultsFormatError::new(
                1,
                format!("expected header {}", RESULTS_HEADER.join(",")),
            ));
        }
        let mut results = IndicatorResults::unclassified(catalog);
        let mut seen = std::collections::HashSet::new();
        let mut rows = 0;
        for record in reader.records() {
            let record = record.map_err(|e| {
                ResultsFormatError::new(e.position().map_or(0, |p| p.line()), e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let err = |msg: String| ResultsFormatError::new(line, msg);
            let pair = TargetPair::parse(&record[0], &record[1]).map_err(|e| err(e.to_string()))?;
            let class: InteractionClass = record[2].parse().map_err(err)?;
            let count = |i: usize| -> Result<u32, ResultsFormatError> {
                record[i]
                    .parse()
                    .map_err(|_| err(format!("bad count {:?}", &record[i])))
            };
            let tally = Tally {
                synergies: count(3)?,
                tradeoffs: count(4)?,
                nonclassified: count(5)?,
            };
            if tally.plurality() != class {
                return Err(err(format!(
                    "class {class} disagrees with tally ({}, {}, {})",
                    tally.synergies, tally.tradeoffs, tally.nonclassified
                )));
            }
            if !seen.insert(pair) {
                return Err(err(format!("duplicate pair {pair}")));
            }
            results
                .results
                .insert(pair, TargetMethodResult { pair, class, tally });
            rows += 1;
        }
        Ok((results, rows))
    }
}

pub const RESULTS_HEADER: [&str; 6] = [
    "target_a",
    "target_b",
    "class",
    "synergies",
    "tradeoffs",
    "nonclassified",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ResultsFormatError {
    pub line: u64,
    pub message: String,
}

impl ResultsFormatError {
    fn new(line: u64, message: String) -> Self {
        ResultsFormatError { line, message }
    }
}

/// Runs the full indicator method: every cross-target indicator pair is
/// correlated, classified and aggregated onto its target pair. Pairs without
/// indicator data on both sides stay Nonclassified with an empty tally.
pub fn run_indicator_method(
    series: &[IndicatorSeries],
    catalog: &Catalog,
    config: &CorrelationConfig,
) -> IndicatorResults {
    let mut by_target: BTreeMap<TargetId, Vec<&IndicatorSeries>> = BTreeMap::new();
    for s in series {
        by_target.entry(s.id.target()).or_default().push(s);
    }
    let targets: Vec<TargetId> = by_target.keys().copied().collect();
    let work: Vec<(TargetId, TargetId)> = targets
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| targets[i + 1..].iter().map(move |&y| (x, y)))
        .collect();

    let computed: Vec<TargetMethodResult> = work
        .par_iter()
        .map(|&(x, y)| {
            let pair = TargetPair::new(x, y).expect("distinct targets");
            let classes = by_target[&x].iter().flat_map(|a| {
                by_target[&y]
                    .iter()
                    .map(move |b| classify(spearman_rho(&align(a, b), config)))
            });
            aggregate_to_target(pair, classes)
        })
        .collect();

    let mut results = IndicatorResults::unclassified(catalog);
    for r in computed {
        results.results.insert(r.pair, r);
    }
    results
}

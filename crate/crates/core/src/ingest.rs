//! Indicator time-series ingestion.
//!
//! Input is delimited text with a header containing `indicator_code`,
//! `year` and `value` columns (extra columns are ignored):
//!
//! ```text
//! indicator_code,year,value
//! 3.1.1,2000,120.0
//! 3.1.1,2001,118.0
//! ```
//!
//! Empty values and the markers `NA`, `N/A` and `...` are missing data and
//! the row is skipped. Rows that fail to parse are skipped and listed in the
//! [`LoadReport`]. A duplicate `(indicator, year)` or an indicator whose
//! target prefix is not in the catalog aborts the load.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::catalog::{CatalogError, TargetId};

pub const FIRST_YEAR: u16 = 1990;
pub const LAST_YEAR: u16 = 2018;

const MISSING_MARKERS: [&str; 4] = ["", "NA", "N/A", "..."];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed indicator id {0:?}")]
    MalformedId(String),
    #[error("indicator {code:?} has no catalog target{}", row.map(|r| format!(" (line {r})")).unwrap_or_default())]
    UnknownTargetPrefix { code: String, row: Option<u64> },
    #[error("line {row}: duplicate observation for {indicator} in {year}")]
    DuplicateObservation {
        row: u64,
        indicator: IndicatorId,
        year: u16,
    },
    #[error("header is missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// `goal.suffix.ordinal`, e.g. `3.1.1` or `4.B.1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndicatorId {
    target: TargetId,
    ordinal: u8,
}

impl IndicatorId {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let trimmed = text.trim();
        let malformed = || IngestError::MalformedId(text.to_string());
        let (prefix, ordinal) = trimmed.rsplit_once('.').ok_or_else(malformed)?;
        if ordinal.is_empty() || ordinal.len() > 2 || !ordinal.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let ordinal: u8 = ordinal.parse().map_err(|_| malformed())?;
        if ordinal == 0 {
            return Err(malformed());
        }
        let target = TargetId::parse(prefix).map_err(|e| match e {
            CatalogError::UnknownTarget(_) => IngestError::UnknownTargetPrefix {
                code: trimmed.to_string(),
                row: None,
            },
            _ => malformed(),
        })?;
        Ok(IndicatorId { target, ordinal })
    }

    pub fn target(self) -> TargetId {
        self.target
    }

    pub fn ordinal(self) -> u8 {
        self.ordinal
    }
}

impl fmt::Display for IndicatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.target, self.ordinal)
    }
}

impl Serialize for IndicatorId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IndicatorId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        IndicatorId::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Target an indicator code belongs to: the code minus its final ordinal.
pub fn indicator_to_target(code: &str) -> Result<TargetId, IngestError> {
    IndicatorId::parse(code).map(IndicatorId::target)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorSeries {
    pub id: IndicatorId,
    /// year -> value, years within `FIRST_YEAR..=LAST_YEAR`, values finite
    pub observations: BTreeMap<u16, f64>,
}

impl IndicatorSeries {
    pub fn new(id: IndicatorId) -> Self {
        IndicatorSeries {
            id,
            observations: BTreeMap::new(),
        }
    }

    /// Builder used by tests and synthetic fixtures. Panics on a year outside
    /// the supported range or a non-finite value.
    pub fn with(mut self, year: u16, value: f64) -> Self {
        assert!(
            (FIRST_YEAR..=LAST_YEAR).contains(&year),
            "year {year} out of range"
        );
        assert!(value.is_finite());
        self.observations.insert(year, value);
        self
    }
}

/// Pairwise-complete sample: only years observed in both series.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AlignedPairSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub years: Vec<u16>,
}

impl AlignedPairSample {
    pub fn from_vectors(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        let years = (0..x.len()).map(|i| FIRST_YEAR + i as u16).collect();
        AlignedPairSample { x, y, years }
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }
}

pub fn align(a: &IndicatorSeries, b: &IndicatorSeries) -> AlignedPairSample {
    let mut sample = AlignedPairSample::default();
    for (year, &x) in &a.observations {
        if let Some(&y) = b.observations.get(year) {
            sample.years.push(*year);
            sample.x.push(x);
            sample.y.push(y);
        }
    }
    sample
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    MissingValue,
    Malformed,
    YearOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowIssue {
    pub line: u64,
    pub reason: SkipReason,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub rows: u64,
    pub accepted: u64,
    pub skipped_missing_value: u64,
    pub skipped_malformed: u64,
    pub skipped_year_out_of_range: u64,
    pub issues: Vec<RowIssue>,
}

impl LoadReport {
    pub fn skipped(&self) -> u64 {
        self.skipped_missing_value + self.skipped_malformed + self.skipped_year_out_of_range
    }

    fn skip(&mut self, line: u64, reason: SkipReason, detail: String) {
        match reason {
            SkipReason::MissingValue => self.skipped_missing_value += 1,
            SkipReason::Malformed => self.skipped_malformed += 1,
            SkipReason::YearOutOfRange => self.skipped_year_out_of_range += 1,
        }
        self.issues.push(RowIssue {
            line,
            reason,
            detail,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedIndicators {
    /// One series per distinct indicator, in indicator order.
    pub series: Vec<IndicatorSeries>,
    pub report: LoadReport,
}

pub fn load_indicator_file(path: impl AsRef<Path>) -> Result<LoadedIndicators, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    load_indicators(file)
}

pub fn load_indicators<R: Read>(input: R) -> Result<LoadedIndicators, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let mut report = LoadReport::default();
    if headers.is_empty() {
        return Ok(LoadedIndicators {
            series: Vec::new(),
            report,
        });
    }
    let column = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(IngestError::MissingColumn(name))
    };
    let (code_col, year_col, value_col) =
        (column("indicator_code")?, column("year")?, column("value")?);

    let mut by_id: BTreeMap<IndicatorId, IndicatorSeries> = BTreeMap::new();
    for record in reader.records() {
        report.rows += 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                report.skip(line, SkipReason::Malformed, e.to_string());
                continue;
            }
        };
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let (Some(code), Some(year), Some(value)) = (
            record.get(code_col),
            record.get(year_col),
            record.get(value_col),
        ) else {
            report.skip(line, SkipReason::Malformed, "missing fields".into());
            continue;
        };

        let id = match IndicatorId::parse(code) {
            Ok(id) => id,
            Err(IngestError::UnknownTargetPrefix { code, .. }) => {
                return Err(IngestError::UnknownTargetPrefix {
                    code,
                    row: Some(line),
                })
            }
            Err(e) => {
                report.skip(line, SkipReason::Malformed, e.to_string());
                continue;
            }
        };
        let year: u16 = match year.parse() {
            Ok(y) => y,
            Err(_) => {
                report.skip(line, SkipReason::Malformed, format!("bad year {year:?}"));
                continue;
            }
        };
        if !(FIRST_YEAR..=LAST_YEAR).contains(&year) {
            report.skip(line, SkipReason::YearOutOfRange, format!("year {year}"));
            continue;
        }
        if MISSING_MARKERS
            .iter()
            .any(|m| value.eq_ignore_ascii_case(m))
        {
            report.skip(line, SkipReason::MissingValue, format!("{id} {year}"));
            continue;
        }
        let value: f64 = match value.parse() {
            Ok(v) if f64::is_finite(v) => v,
            _ => {
                report.skip(line, SkipReason::Malformed, format!("bad value {value:?}"));
                continue;
            }
        };

        let series = by_id.entry(id).or_insert_with(|| IndicatorSeries::new(id));
        match series.observations.entry(year) {
            Entry::Occupied(_) => {
                return Err(IngestError::DuplicateObservation {
                    row: line,
                    indicator: id,
                    year,
                })
            }
            Entry::Vacant(slot) => {
                slot.insert(value);
                report.accepted += 1;
            }
        }
    }
    Ok(LoadedIndicators {
        series: by_id.into_values().collect(),
        report,
    })
}

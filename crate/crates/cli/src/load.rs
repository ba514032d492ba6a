//! Input files, told apart by their header line.

use std::fs;
use std::path::Path;

use sdg_core::catalog::Catalog;
use sdg_core::correlation::IndicatorResults;
use sdg_core::evaluation::{read_expert_answers, EvaluationStore, Method, EXPERT_HEADER};
use sdg_service::app::parse_indicator_upload;

use crate::CliError;

pub enum Loaded {
    Expert(EvaluationStore),
    /// Results table, or raw indicator data already run through the pipeline.
    Indicator(IndicatorResults),
}

impl Loaded {
    pub fn method(&self) -> Method {
        match self {
            Loaded::Expert(_) => Method::Expert,
            Loaded::Indicator(_) => Method::Indicator,
        }
    }

    pub fn into_store(self) -> EvaluationStore {
        match self {
            Loaded::Expert(s) => s,
            Loaded::Indicator(r) => EvaluationStore::indicator(&r),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path, catalog: &Catalog) -> Result<Loaded, CliError> {
    let text = read_text(path)?;
    let header: Vec<&str> = text
        .lines()
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .collect();
    let invalid = |m: String| CliError::Invalid(format!("{}: {m}", path.display()));
    if header == EXPERT_HEADER || header == EXPERT_HEADER[..3] {
        let answers = read_expert_answers(text.as_bytes()).map_err(|e| invalid(e.to_string()))?;
        Ok(Loaded::Expert(EvaluationStore::expert(
            answers.iter().map(|a| (a.pair, a.score)),
        )))
    } else {
        let (results, _) =
            parse_indicator_upload(&text, catalog).map_err(|e| invalid(e.message))?;
        Ok(Loaded::Indicator(results))
    }
}

/// Loads a file that must hold data of the given method.
pub fn load_as(
    path: &Path,
    method: Method,
    catalog: &Catalog,
) -> Result<EvaluationStore, CliError> {
    let loaded = load(path, catalog)?;
    if loaded.method() != method {
        return Err(CliError::Invalid(format!(
            "{}: expected {method} data, found {}",
            path.display(),
            loaded.method()
        )));
    }
    Ok(loaded.into_store())
}

/// Stores for both methods; a missing file gives an empty store, as in the
/// service before anything has been loaded.
pub fn stores(
    expert: Option<&Path>,
    indicator: Option<&Path>,
    catalog: &Catalog,
) -> Result<(EvaluationStore, EvaluationStore), CliError> {
    let e = match expert {
        Some(p) => load_as(p, Method::Expert, catalog)?,
        None => EvaluationStore::empty(Method::Expert),
    };
    let i = match indicator {
        Some(p) => load_as(p, Method::Indicator, catalog)?,
        None => EvaluationStore::empty(Method::Indicator),
    };
    Ok((e, i))
}

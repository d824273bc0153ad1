//! End-to-end analysis of recorded sessions: ART-ANOVA per Likert property
//! plus the descriptive cohort aggregates.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::{
    acceptability_summary, check_unique_participants, cohort_observations, distinct_sensation_stats,
    fabric_choice_histogram, likert_condition_means, Acceptance, DistinctStats, ExperimentError, FabricHistogram,
    LikertMean, Property, SessionLog,
};
use crate::stats::{anova_csv, art_anova, read_observations_csv, AnovaRow, FactorialObservation, StatsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{property}: {source}")]
    Stats { property: String, source: StatsError },
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("no observations for property '{0}'")]
    MissingProperty(String),
}

impl AnalysisError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalysisError::Experiment(e) => e.code(),
            AnalysisError::Stats { source, .. } => source.code(),
            AnalysisError::Input { .. } => "INPUT",
            AnalysisError::Read { .. } => "IO",
            AnalysisError::MissingProperty(_) => "MISSING_PROPERTY",
        }
    }
}

/// Which Likert properties to analyze.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertySelection {
    All,
    One(String),
}

impl std::str::FromStr for PropertySelection {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(PropertySelection::All)
        } else {
            Ok(PropertySelection::One(s.to_ascii_lowercase()))
        }
    }
}

pub type ObservationsByProperty = BTreeMap<String, Vec<FactorialObservation>>;

/// Factorial observations of every Likert property across complete sessions.
pub fn observations_from_sessions(logs: &[SessionLog]) -> Result<ObservationsByProperty, AnalysisError> {
    check_unique_participants(logs)?;
    Ok(Property::ALL
        .iter()
        .map(|p| (p.name().to_string(), cohort_observations(logs, *p)))
        .collect())
}

/// Loads analysis inputs: `.csv` files in the `subject,voltage,frequency,property,score`
/// format, anything else as a JSONL session.
pub fn load_inputs(paths: &[impl AsRef<Path>]) -> Result<(ObservationsByProperty, Vec<SessionLog>), AnalysisError> {
    let mut sessions = Vec::new();
    let mut merged: ObservationsByProperty = BTreeMap::new();
    for path in paths {
        let path = path.as_ref();
        let input_err = |message: String| AnalysisError::Input { path: path.display().to_string(), message };
        let read_err = |message: String| AnalysisError::Read { path: path.display().to_string(), message };
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if is_csv {
            let text = std::fs::read_to_string(path).map_err(|e| read_err(e.to_string()))?;
            for (property, rows) in read_observations_csv(&text).map_err(|e| input_err(e.to_string()))? {
                merged.entry(property).or_default().extend(rows);
            }
        } else {
            sessions.push(SessionLog::load(path).map_err(|e| match e {
                ExperimentError::Io(m) => read_err(m),
                other => input_err(other.to_string()),
            })?);
        }
    }
    for (property, rows) in observations_from_sessions(&sessions)? {
        if !rows.is_empty() {
            merged.entry(property).or_default().extend(rows);
        }
    }
    Ok((merged, sessions))
}

/// Runs the ART ANOVA for the selected properties, in property-name order
/// for `All` (roughness, thickness, stiffness, warmth when present).
pub fn analyze(
    observations: &ObservationsByProperty,
    selection: &PropertySelection,
) -> Result<Vec<(String, Vec<AnovaRow>)>, AnalysisError> {
    let names: Vec<String> = match selection {
        PropertySelection::One(p) => vec![p.clone()],
        PropertySelection::All => {
            let mut known: Vec<String> = Property::ALL
                .iter()
                .map(|p| p.name().to_string())
                .filter(|p| observations.contains_key(p))
                .collect();
            known.extend(observations.keys().filter(|k| !known.contains(k)).cloned().collect::<Vec<_>>());
            known
        }
    };
    names
        .into_iter()
        .map(|name| {
            let rows = observations
                .get(&name)
                .filter(|r| !r.is_empty())
                .ok_or_else(|| AnalysisError::MissingProperty(name.clone()))?;
            let result = art_anova(rows).map_err(|source| AnalysisError::Stats { property: name.clone(), source })?;
            Ok((name, result))
        })
        .collect()
}

/// `analyze` rendered as the `property,term,df1,df2,F,p` report.
pub fn analyze_csv(observations: &ObservationsByProperty, selection: &PropertySelection) -> Result<String, AnalysisError> {
    Ok(anova_csv(&analyze(observations, selection)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyAnova {
    pub property: String,
    pub rows: Vec<AnovaRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub sessions: usize,
    pub anova: Vec<PropertyAnova>,
    pub acceptability: Vec<Acceptance>,
    pub likert_means: Vec<LikertMean>,
    pub distinct: DistinctStats,
    pub fabric_histogram: FabricHistogram,
}

/// Full report over complete sessions.
pub fn cohort_report(logs: &[SessionLog]) -> Result<CohortReport, AnalysisError> {
    let observations = observations_from_sessions(logs)?;
    let anova = analyze(&observations, &PropertySelection::All)?
        .into_iter()
        .map(|(property, rows)| PropertyAnova { property, rows })
        .collect();
    Ok(CohortReport {
        sessions: logs.len(),
        anova,
        acceptability: acceptability_summary(logs),
        likert_means: likert_condition_means(logs),
        distinct: distinct_sensation_stats(logs)?,
        fabric_histogram: fabric_choice_histogram(logs),
    })
}

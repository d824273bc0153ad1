//! Aligned Rank Transform with a two-way within-subject ANOVA.
//!
//! Factor A is voltage and factor B is frequency. Each term is tested against
//! its own term × subject interaction, and p-values come from the F
//! distribution evaluated through the regularized incomplete beta function.

mod anova;
mod art;
mod fdist;
mod rank;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use anova::{rm_anova, Design};
pub use art::{align_for_effect, art_anova, AlignedSet};
pub use fdist::{f_cdf, f_sf, ln_gamma, regularized_incomplete_beta};
pub use rank::midrank;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no observations")]
    Empty,
    #[error("non-finite response {0}")]
    NonFinite(f64),
    #[error("unbalanced design, missing cells: {0}")]
    Unbalanced(String),
    #[error("cell {0} has more than one observation")]
    DuplicateCell(String),
    #[error("need at least {needed} {what}, got {got}")]
    TooFew { what: &'static str, needed: usize, got: usize },
    #[error("invalid degrees of freedom ({df1}, {df2})")]
    InvalidDf { df1: f64, df2: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("input error at line {line}: {message}")]
    Input { line: usize, message: String },
}

impl StatsError {
    pub fn code(&self) -> &'static str {
        match self {
            StatsError::Unbalanced(_) | StatsError::DuplicateCell(_) => "UNBALANCED",
            StatsError::TooFew { .. } => "TOO_FEW",
            StatsError::Input { .. } => "INPUT",
            _ => "VALIDATION",
        }
    }
}

/// One response in a subjects × A × B within-subject design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorialObservation {
    pub subject: String,
    /// Level of factor A (voltage).
    pub level_a: String,
    /// Level of factor B (frequency).
    pub level_b: String,
    pub response: f64,
}

impl FactorialObservation {
    pub fn new(subject: impl Into<String>, level_a: impl Into<String>, level_b: impl Into<String>, response: f64) -> Self {
        FactorialObservation {
            subject: subject.into(),
            level_a: level_a.into(),
            level_b: level_b.into(),
            response,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    A,
    B,
    AxB,
}

impl Term {
    pub const ALL: [Term; 3] = [Term::A, Term::B, Term::AxB];

    /// Name used in reports, with A = voltage and B = frequency.
    pub fn label(&self) -> &'static str {
        match self {
            Term::A => "voltage",
            Term::B => "frequency",
            Term::AxB => "voltage:frequency",
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Term::A => "A",
            Term::B => "B",
            Term::AxB => "AxB",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub term: Term,
    pub df_num: usize,
    pub df_den: usize,
    /// F statistic; `+inf` when the error term vanishes but the effect does not.
    pub f_stat: f64,
    pub p_value: f64,
}

impl AnovaRow {
    pub fn for_term(rows: &[AnovaRow], term: Term) -> Option<&AnovaRow> {
        rows.iter().find(|r| r.term == term)
    }
}

/// Report CSV with header `property,term,df1,df2,F,p`.
pub fn anova_csv(results: &[(String, Vec<AnovaRow>)]) -> String {
    let mut out = String::from("property,term,df1,df2,F,p\n");
    for (property, rows) in results {
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                property,
                r.term.label(),
                r.df_num,
                r.df_den,
                r.f_stat,
                r.p_value
            ));
        }
    }
    out
}

/// Parses `subject,voltage,frequency,property,score` into observations per
/// property. Baseline rows (voltage 0) are rejected.
pub fn read_observations_csv(text: &str) -> Result<BTreeMap<String, Vec<FactorialObservation>>, StatsError> {
    #[derive(Deserialize)]
    struct Row {
        subject: String,
        voltage: String,
        frequency: String,
        property: String,
        score: f64,
    }

    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| StatsError::Input { line: 1, message: e.to_string() })?
        .clone();
    let expected = ["subject", "voltage", "frequency", "property", "score"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(StatsError::Input {
            line: 1,
            message: format!("expected header '{}'", expected.join(",")),
        });
    }
    let mut out: BTreeMap<String, Vec<FactorialObservation>> = BTreeMap::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| StatsError::Input { line, message: e.to_string() })?;
        let volts: f64 = row
            .voltage
            .parse()
            .map_err(|_| StatsError::Input { line, message: format!("bad voltage '{}'", row.voltage) })?;
        if volts == 0.0 {
            return Err(StatsError::Input {
                line,
                message: "baseline rows (voltage 0) are not part of the factorial analysis".into(),
            });
        }
        if !row.score.is_finite() {
            return Err(StatsError::Input { line, message: format!("non-finite score {}", row.score) });
        }
        out.entry(row.property.to_ascii_lowercase())
            .or_default()
            .push(FactorialObservation::new(row.subject, row.voltage, row.frequency, row.score));
    }
    if out.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(out)
}

//! Within-subject tactile experiment over the ten-condition grid. Sessions are
//! presented in randomized order and persisted as questionnaire records;
//! cohort aggregates summarize them.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::Command;
use crate::stats::FactorialObservation;

pub const LIKERT_MIN: u8 = 1;
pub const LIKERT_MAX: u8 = 5;
pub const FABRIC_COUNT: u8 = 16;
/// Energized states a participant can tell apart.
pub const ENERGIZED_CONDITIONS: usize = 9;
pub const GRID_SIZE: usize = ENERGIZED_CONDITIONS + 1;

/// Reference fabrics for the "most similar cloth" question, indexed 1..=16.
pub const FABRIC_CATALOG: [&str; 16] = [
    "Marquisette",
    "Cashmere",
    "Satin",
    "Milanese",
    "Faille",
    "Viyella",
    "Metallic Tone Cloth",
    "Georgette",
    "Dungaree",
    "Quilting",
    "Paisley",
    "Velveteen",
    "Chenille",
    "Cambric",
    "Cord Weave",
    "Blister Cloth",
];

/// Anchor cloths shown to the experimenter for each Likert scale, as
/// `(scale, [one extreme, neutral, other extreme])`. Rating aid only.
pub const CRITERIA_CLOTHS: [(&str, [(&str, &str); 3]); 4] = [
    ("roughness", [("rough", "Jeans"), ("neutral", "Voile"), ("smooth", "Gauze")]),
    ("stiffness", [("stiff", "Towelling"), ("neutral", "Gauze"), ("flexible", "Voile")]),
    ("thickness", [("thick", "Jeans"), ("neutral", "Towelling"), ("thin", "Gauze")]),
    ("warmth", [("warm", "Towelling"), ("neutral", "Jeans"), ("cool", "Voile")]),
];

pub fn fabric_name(index: u8) -> Option<&'static str> {
    FABRIC_CATALOG.get(usize::from(index).checked_sub(1)?).copied()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("condition {0} already has a response")]
    DuplicateResponse(Condition),
    #[error("condition {0} is not part of the plan")]
    NotInPlan(Condition),
    #[error("session incomplete: {answered} of {GRID_SIZE} conditions answered")]
    Incomplete { answered: usize },
    #[error("distinct-sensation count already recorded")]
    AlreadyRecorded,
    #[error("no sessions supplied")]
    NoSessions,
    #[error("session of {0} has no distinct-sensation count")]
    MissingDistinctCount(String),
    #[error("variance needs at least two sessions")]
    TooFewSessions,
    #[error("malformed session file at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    pub fn code(&self) -> &'static str {
        match self {
            ExperimentError::Validation(_) => "VALIDATION",
            ExperimentError::DuplicateResponse(_) => "DUPLICATE_RESPONSE",
            ExperimentError::NotInPlan(_) => "NOT_IN_PLAN",
            ExperimentError::Incomplete { .. } => "INCOMPLETE",
            ExperimentError::AlreadyRecorded => "ALREADY_RECORDED",
            ExperimentError::NoSessions => "NO_SESSIONS",
            ExperimentError::MissingDistinctCount(_) => "MISSING_DISTINCT_COUNT",
            ExperimentError::TooFewSessions => "TOO_FEW_SESSIONS",
            ExperimentError::Format { .. } => "FORMAT",
            ExperimentError::Io(_) => "IO",
        }
    }
}

impl From<io::Error> for ExperimentError {
    fn from(err: io::Error) -> Self {
        ExperimentError::Io(err.to_string())
    }
}

macro_rules! numeric_level {
    ($name:ident, $unit:literal, $($variant:ident = $value:literal),+) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(try_from = "u32", into = "u32")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: [$name; 3] = [$($name::$variant),+];

            pub fn value(self) -> u32 {
                match self {
                    $($name::$variant => $value),+
                }
            }
        }

        impl TryFrom<u32> for $name {
            type Error = String;

            fn try_from(v: u32) -> Result<Self, String> {
                match v {
                    $($value => Ok($name::$variant),)+
                    other => Err(format!("{} {} is not a grid level", other, $unit)),
                }
            }
        }

        impl From<$name> for u32 {
            fn from(level: $name) -> u32 {
                level.value()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", self.value(), $unit)
            }
        }
    };
}

numeric_level!(VoltageLevel, "V", V100 = 100, V200 = 200, V300 = 300);
numeric_level!(FrequencyLevel, "Hz", F50 = 50, F100 = 100, F200 = 200);

/// One presentation state of the cloth. Orders as the canonical grid:
/// baseline first, then voltage-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// Cloth touched with no voltage applied.
    Baseline,
    Energized { voltage: VoltageLevel, frequency: FrequencyLevel },
}

impl Condition {
    pub fn energized(voltage: u32, frequency: u32) -> Result<Self, ExperimentError> {
        Ok(Condition::Energized {
            voltage: VoltageLevel::try_from(voltage).map_err(ExperimentError::Validation)?,
            frequency: FrequencyLevel::try_from(frequency).map_err(ExperimentError::Validation)?,
        })
    }

    pub fn voltage(&self) -> Option<u32> {
        match self {
            Condition::Baseline => None,
            Condition::Energized { voltage, .. } => Some(voltage.value()),
        }
    }

    pub fn frequency(&self) -> Option<u32> {
        match self {
            Condition::Baseline => None,
            Condition::Energized { frequency, .. } => Some(frequency.value()),
        }
    }

    /// Position in the canonical grid.
    pub fn index(&self) -> usize {
        match self {
            Condition::Baseline => 0,
            Condition::Energized { voltage, frequency } => {
                1 + 3 * (*voltage as usize) + (*frequency as usize)
            }
        }
    }

    /// Short label used in CSV exports, e.g. `baseline` or `300V-200Hz`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Driver commands that put the cloth into this condition.
    pub fn device_commands(&self) -> Vec<Command> {
        match self {
            Condition::Baseline => vec![Command::off()],
            Condition::Energized { voltage, frequency } => vec![
                Command::set_voltage(f64::from(voltage.value())),
                Command::set_frequency(f64::from(frequency.value())),
                Command::on(),
            ],
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Baseline => f.write_str("baseline"),
            Condition::Energized { voltage, frequency } => write!(f, "{voltage}-{frequency}"),
        }
    }
}

/// Baseline followed by the 3×3 voltage-major grid.
pub fn build_condition_grid() -> Vec<Condition> {
    std::iter::once(Condition::Baseline)
        .chain(VoltageLevel::ALL.into_iter().flat_map(|voltage| {
            FrequencyLevel::ALL
                .into_iter()
                .map(move |frequency| Condition::Energized { voltage, frequency })
        }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub participant_id: String,
    pub seed: u64,
    pub order: Vec<Condition>,
}

impl SessionPlan {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.participant_id.trim().is_empty() {
            return Err(ExperimentError::Validation("participant id must not be empty".into()));
        }
        let mut sorted = self.order.clone();
        sorted.sort();
        if sorted != build_condition_grid() {
            return Err(ExperimentError::Validation(
                "plan order is not a permutation of the condition grid".into(),
            ));
        }
        Ok(())
    }
}

/// Randomized presentation order for one participant.
///
/// Shuffles the canonical grid with ChaCha8 seeded from `seed`, so a recorded
/// seed reproduces the order exactly.
pub fn plan_session(participant_id: &str, seed: u64) -> Result<SessionPlan, ExperimentError> {
    if participant_id.trim().is_empty() {
        return Err(ExperimentError::Validation("participant id must not be empty".into()));
    }
    let mut order = build_condition_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    Ok(SessionPlan { participant_id: participant_id.to_string(), seed, order })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Roughness,
    Thickness,
    Stiffness,
    Warmth,
}

impl Property {
    pub const ALL: [Property; 4] =
        [Property::Roughness, Property::Thickness, Property::Stiffness, Property::Warmth];

    pub fn name(&self) -> &'static str {
        match self {
            Property::Roughness => "roughness",
            Property::Thickness => "thickness",
            Property::Stiffness => "stiffness",
            Property::Warmth => "warmth",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Property {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ExperimentError::Validation(format!("unknown property '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Likert {
    pub roughness: u8,
    pub thickness: u8,
    pub stiffness: u8,
    pub warmth: u8,
}

impl Likert {
    pub fn uniform(score: u8) -> Self {
        Likert { roughness: score, thickness: score, stiffness: score, warmth: score }
    }

    pub fn get(&self, property: Property) -> u8 {
        match property {
            Property::Roughness => self.roughness,
            Property::Thickness => self.thickness,
            Property::Stiffness => self.stiffness,
            Property::Warmth => self.warmth,
        }
    }
}

/// Answers to the per-condition questionnaire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub condition: Condition,
    pub likert: Likert,
    /// Whether the sensation is still acceptable as cloth.
    pub acceptable: bool,
    pub free_text: String,
    /// 1-based index into [`FABRIC_CATALOG`].
    pub similar_fabric: u8,
    /// RFC 3339 / ISO-8601 timestamp.
    pub timestamp: String,
}

impl ResponseRecord {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        for property in Property::ALL {
            let score = self.likert.get(property);
            if !(LIKERT_MIN..=LIKERT_MAX).contains(&score) {
                return Err(ExperimentError::Validation(format!(
                    "{property} score {score} is outside {LIKERT_MIN}..={LIKERT_MAX}"
                )));
            }
        }
        if !(1..=FABRIC_COUNT).contains(&self.similar_fabric) {
            return Err(ExperimentError::Validation(format!(
                "similar fabric {} is outside 1..={FABRIC_COUNT}",
                self.similar_fabric
            )));
        }
        chrono::DateTime::parse_from_rfc3339(&self.timestamp).map_err(|e| {
            ExperimentError::Validation(format!("timestamp '{}' is not ISO-8601: {e}", self.timestamp))
        })?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionLog {
    pub plan: SessionPlan,
    pub responses: Vec<ResponseRecord>,
    pub distinct_sensation_count: Option<u8>,
}

impl SessionLog {
    pub fn new(plan: SessionPlan) -> Self {
        SessionLog { plan, responses: Vec::new(), distinct_sensation_count: None }
    }

    pub fn is_answered(&self, condition: &Condition) -> bool {
        self.responses.iter().any(|r| r.condition == *condition)
    }

    /// Next condition in presentation order without a response.
    pub fn next_condition(&self) -> Option<Condition> {
        self.plan.order.iter().find(|c| !self.is_answered(c)).copied()
    }

    pub fn all_answered(&self) -> bool {
        self.responses.len() == self.plan.order.len()
    }

    pub fn is_complete(&self) -> bool {
        self.all_answered() && self.distinct_sensation_count.is_some()
    }

    pub fn response_for(&self, condition: &Condition) -> Option<&ResponseRecord> {
        self.responses.iter().find(|r| r.condition == *condition)
    }

    /// Appends a response; on error the log is unchanged.
    pub fn record_response(&mut self, rec: ResponseRecord) -> Result<(), ExperimentError> {
        if !self.plan.order.contains(&rec.condition) {
            return Err(ExperimentError::NotInPlan(rec.condition));
        }
        if self.is_answered(&rec.condition) {
            return Err(ExperimentError::DuplicateResponse(rec.condition));
        }
        rec.validate()?;
        self.responses.push(rec);
        Ok(())
    }

    /// Records how many of the nine energized sensations felt distinct.
    pub fn set_distinct_count(&mut self, count: u8) -> Result<(), ExperimentError> {
        if self.distinct_sensation_count.is_some() {
            return Err(ExperimentError::AlreadyRecorded);
        }
        if !self.all_answered() {
            return Err(ExperimentError::Incomplete { answered: self.responses.len() });
        }
        if usize::from(count) > ENERGIZED_CONDITIONS {
            return Err(ExperimentError::Validation(format!(
                "distinct count {count} is outside 0..={ENERGIZED_CONDITIONS}"
            )));
        }
        self.distinct_sensation_count = Some(count);
        Ok(())
    }

    /// JSONL form: plan line, one line per response, then the distinct count.
    pub fn to_jsonl(&self) -> String {
        let mut out = SessionLine::Plan(self.plan.clone()).to_line();
        for r in &self.responses {
            out.push_str(&SessionLine::Response(r.clone()).to_line());
        }
        if let Some(count) = self.distinct_sensation_count {
            out.push_str(&SessionLine::Distinct { count }.to_line());
        }
        out
    }

    /// Replays a JSONL session, re-validating every record.
    pub fn from_jsonl(text: &str) -> Result<Self, ExperimentError> {
        Self::from_lines(text.lines().map(|l| Ok(l.to_string())))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let reader = BufReader::new(File::open(path)?);
        Self::from_lines(reader.lines())
    }

    fn from_lines<I>(lines: I) -> Result<Self, ExperimentError>
    where
        I: Iterator<Item = io::Result<String>>,
    {
        let mut log: Option<SessionLog> = None;
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 1;
            let format_err = |message: String| ExperimentError::Format { line: lineno, message };
            if line.trim().is_empty() {
                continue;
            }
            let parsed: SessionLine = serde_json::from_str(&line).map_err(|e| format_err(e.to_string()))?;
            match (&mut log, parsed) {
                (None, SessionLine::Plan(plan)) => {
                    plan.validate().map_err(|e| format_err(e.to_string()))?;
                    log = Some(SessionLog::new(plan));
                }
                (None, _) => return Err(format_err("first line must be the plan".into())),
                (Some(_), SessionLine::Plan(_)) => return Err(format_err("duplicate plan line".into())),
                (Some(log), SessionLine::Response(rec)) => {
                    if log.distinct_sensation_count.is_some() {
                        return Err(format_err("response after the distinct count".into()));
                    }
                    log.record_response(rec).map_err(|e| format_err(e.to_string()))?;
                }
                (Some(log), SessionLine::Distinct { count }) => {
                    log.set_distinct_count(count).map_err(|e| format_err(e.to_string()))?;
                }
            }
        }
        log.ok_or(ExperimentError::Format { line: 0, message: "empty session file".into() })
    }

    /// Rows for the factorial analysis of one property; baseline is excluded.
    pub fn factorial_observations(&self, property: Property) -> Vec<FactorialObservation> {
        self.responses
            .iter()
            .filter_map(|r| {
                let (v, f) = (r.condition.voltage()?, r.condition.frequency()?);
                Some(FactorialObservation {
                    subject: self.plan.participant_id.clone(),
                    level_a: v.to_string(),
                    level_b: f.to_string(),
                    response: f64::from(r.likert.get(property)),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum SessionLine {
    Plan(SessionPlan),
    Response(ResponseRecord),
    Distinct { count: u8 },
}

impl SessionLine {
    fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("session records always serialize");
        s.push('\n');
        s
    }
}

/// Append-only JSONL session on disk. Each record is validated against the
/// in-memory log before its line is written and flushed.
#[derive(Debug)]
pub struct SessionFile {
    log: SessionLog,
    file: File,
}

impl SessionFile {
    pub fn create(path: &Path, plan: SessionPlan) -> Result<Self, ExperimentError> {
        plan.validate()?;
        let mut file = OpenOptions::new().write(true).create_new(true).open(path)?;
        file.write_all(SessionLine::Plan(plan.clone()).to_line().as_bytes())?;
        file.sync_data()?;
        Ok(SessionFile { log: SessionLog::new(plan), file })
    }

    /// Reopens an interrupted session for further appends.
    pub fn resume(path: &Path) -> Result<Self, ExperimentError> {
        let log = SessionLog::load(path)?;
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(SessionFile { log, file })
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn record_response(&mut self, rec: ResponseRecord) -> Result<(), ExperimentError> {
        let line = SessionLine::Response(rec.clone()).to_line();
        self.log.record_response(rec)?;
        self.append(&line)
    }

    pub fn set_distinct_count(&mut self, count: u8) -> Result<(), ExperimentError> {
        self.log.set_distinct_count(count)?;
        self.append(&SessionLine::Distinct { count }.to_line())
    }

    fn append(&mut self, line: &str) -> Result<(), ExperimentError> {
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinctStats {
    pub sessions: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
}

pub fn distinct_sensation_stats(logs: &[SessionLog]) -> Result<DistinctStats, ExperimentError> {
    if logs.is_empty() {
        return Err(ExperimentError::NoSessions);
    }
    let counts = logs
        .iter()
        .map(|log| {
            log.distinct_sensation_count
                .map(f64::from)
                .ok_or_else(|| ExperimentError::MissingDistinctCount(log.plan.participant_id.clone()))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if counts.len() < 2 {
        return Err(ExperimentError::TooFewSessions);
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let variance = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(DistinctStats { sessions: counts.len(), mean, variance })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub condition: Condition,
    pub responses: usize,
    pub accept_fraction: f64,
}

/// Fraction of participants accepting each condition as cloth, in canonical
/// order. Logs lacking a condition do not count toward its denominator.
pub fn acceptability_summary(logs: &[SessionLog]) -> Vec<Acceptance> {
    let mut tally: BTreeMap<Condition, (usize, usize)> = BTreeMap::new();
    for rec in logs.iter().flat_map(|l| &l.responses) {
        let entry = tally.entry(rec.condition).or_default();
        entry.0 += 1;
        entry.1 += usize::from(rec.acceptable);
    }
    tally
        .into_iter()
        .map(|(condition, (n, yes))| Acceptance {
            condition,
            responses: n,
            accept_fraction: yes as f64 / n as f64,
        })
        .collect()
}

/// Counts of "most similar fabric" choices. Index 0 of each vector is fabric 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FabricHistogram {
    pub overall: Vec<u32>,
    /// Conditions in canonical order.
    pub per_condition: Vec<ConditionCounts>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionCounts {
    pub condition: Condition,
    pub counts: Vec<u32>,
}

impl FabricHistogram {
    pub fn count(&self, fabric: u8) -> u32 {
        self.overall[usize::from(fabric) - 1]
    }

    pub fn total(&self) -> u32 {
        self.overall.iter().sum()
    }

    /// Fabric indices ordered by descending count, ties by index.
    pub fn ranking(&self) -> Vec<u8> {
        let mut idx: Vec<u8> = (1..=FABRIC_COUNT).collect();
        idx.sort_by_key(|&i| (std::cmp::Reverse(self.count(i)), i));
        idx
    }
}

pub fn fabric_choice_histogram(logs: &[SessionLog]) -> FabricHistogram {
    let mut overall = vec![0u32; usize::from(FABRIC_COUNT)];
    let mut per_condition: BTreeMap<Condition, Vec<u32>> = BTreeMap::new();
    for rec in logs.iter().flat_map(|l| &l.responses) {
        let slot = usize::from(rec.similar_fabric) - 1;
        overall[slot] += 1;
        per_condition.entry(rec.condition).or_insert_with(|| vec![0; usize::from(FABRIC_COUNT)])[slot] += 1;
    }
    let per_condition =
        per_condition.into_iter().map(|(condition, counts)| ConditionCounts { condition, counts }).collect();
    FabricHistogram { overall, per_condition }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikertMean {
    pub condition: Condition,
    pub property: Property,
    pub mean: f64,
}

/// Mean score per (condition, property), canonical condition order then
/// property order.
pub fn likert_condition_means(logs: &[SessionLog]) -> Vec<LikertMean> {
    let mut sums: BTreeMap<Condition, ([u32; 4], u32)> = BTreeMap::new();
    for rec in logs.iter().flat_map(|l| &l.responses) {
        let entry = sums.entry(rec.condition).or_default();
        for (slot, property) in Property::ALL.iter().enumerate() {
            entry.0[slot] += u32::from(rec.likert.get(*property));
        }
        entry.1 += 1;
    }
    sums.into_iter()
        .flat_map(|(condition, (totals, n))| {
            Property::ALL.into_iter().enumerate().map(move |(slot, property)| LikertMean {
                condition,
                property,
                mean: f64::from(totals[slot]) / f64::from(n),
            })
        })
        .collect()
}

pub fn likert_means_csv(means: &[LikertMean]) -> String {
    let mut out = String::from("condition,property,mean\n");
    for m in means {
        let _ = writeln!(out, "{},{},{}", m.condition, m.property, m.mean);
    }
    out
}

pub fn acceptability_csv(rows: &[Acceptance]) -> String {
    let mut out = String::from("condition,accept_fraction\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", r.condition, r.accept_fraction);
    }
    out
}

/// Factorial rows of one property across a cohort of sessions.
pub fn cohort_observations(logs: &[SessionLog], property: Property) -> Vec<FactorialObservation> {
    logs.iter().flat_map(|l| l.factorial_observations(property)).collect()
}

/// Checks that every participant id is used by at most one session.
pub fn check_unique_participants(logs: &[SessionLog]) -> Result<(), ExperimentError> {
    let mut seen = HashSet::new();
    for log in logs {
        if !seen.insert(log.plan.participant_id.as_str()) {
            return Err(ExperimentError::Validation(format!(
                "participant '{}' appears in more than one session",
                log.plan.participant_id
            )));
        }
    }
    Ok(())
}

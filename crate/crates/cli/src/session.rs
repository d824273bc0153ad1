//! Terminal-driven session. Answers are read line by line from stdin, so a
//! session can be typed live or piped from a script. Each answer is appended
//! to the JSONL file as soon as it is accepted; rerunning the same command
//! resumes an interrupted session.

use std::io::{self, BufRead, Lines, StdinLock, Write};
use std::path::PathBuf;

use tactile_core::device::{format_command, Response, SimulatedDriver};
use tactile_core::experiment::{
    plan_session, ExperimentError, Likert, Property, ResponseRecord, SessionFile, ENERGIZED_CONDITIONS,
    FABRIC_CATALOG, FABRIC_COUNT, GRID_SIZE, LIKERT_MAX, LIKERT_MIN,
};

use crate::{CliError, SessionArgs};

fn experiment_err(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Io(m) => CliError::Runtime(m),
        other => CliError::Validation(other.to_string()),
    }
}

struct Prompter {
    lines: Lines<StdinLock<'static>>,
}

impl Prompter {
    fn line(&mut self, prompt: &str) -> Result<String, CliError> {
        print!("{prompt}");
        io::stdout().flush()?;
        match self.lines.next() {
            Some(line) => Ok(line?.trim().to_string()),
            None => Err(CliError::Runtime(
                "input ended before the session was complete; rerun the same command to resume".into(),
            )),
        }
    }

    fn number(&mut self, prompt: &str, lo: u8, hi: u8) -> Result<u8, CliError> {
        loop {
            match self.line(prompt)?.parse::<u8>() {
                Ok(n) if (lo..=hi).contains(&n) => return Ok(n),
                _ => println!("  enter a whole number from {lo} to {hi}"),
            }
        }
    }

    fn yes_no(&mut self, prompt: &str) -> Result<bool, CliError> {
        loop {
            match self.line(prompt)?.to_ascii_lowercase().as_str() {
                "y" | "yes" => return Ok(true),
                "n" | "no" => return Ok(false),
                _ => println!("  answer y or n"),
            }
        }
    }
}

fn default_path(a: &SessionArgs) -> Result<PathBuf, CliError> {
    if !a.participant.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(CliError::Validation(format!(
            "participant id '{}' is not usable as a file name; pass --out",
            a.participant
        )));
    }
    let name = format!("{}-{}.jsonl", a.participant, a.seed);
    Ok(a.data_dir.as_ref().map_or_else(|| PathBuf::from(&name), |d| d.join(&name)))
}

pub fn run(a: SessionArgs) -> Result<(), CliError> {
    let plan = plan_session(&a.participant, a.seed).map_err(experiment_err)?;
    let path = match &a.out {
        Some(p) => p.clone(),
        None => default_path(&a)?,
    };
    let mut file = if path.exists() {
        let file = SessionFile::resume(&path).map_err(experiment_err)?;
        if file.log().plan != plan {
            return Err(CliError::Validation(format!(
                "{} holds a different participant or seed",
                path.display()
            )));
        }
        println!("resuming {} at step {}", path.display(), file.log().responses.len() + 1);
        file
    } else {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        SessionFile::create(&path, plan.clone()).map_err(experiment_err)?
    };

    let mut driver = SimulatedDriver::new(a.stack.limits()?);
    let mut input = Prompter { lines: io::stdin().lock().lines() };
    if !file.log().all_answered() {
        println!("fabrics:");
        for (i, name) in FABRIC_CATALOG.iter().enumerate() {
            println!("  {:>2} {name}", i + 1);
        }
    }
    for step in file.log().responses.len()..GRID_SIZE {
        let condition = plan.order[step];
        println!("\nstep {} of {GRID_SIZE}", step + 1);
        if !a.blinded {
            println!("condition {condition}");
        }
        for cmd in condition.device_commands() {
            let response = driver.send(&cmd);
            if !a.blinded {
                println!("  device: {} -> {response}", format_command(&cmd));
            }
            if let Response::Err(code) = response {
                driver.send_line("OFF");
                return Err(CliError::Runtime(format!(
                    "device refused '{}' with ERR {}; the session is saved and can be resumed",
                    format_command(&cmd),
                    code.as_str()
                )));
            }
        }
        let range = format!("({LIKERT_MIN}-{LIKERT_MAX})");
        let mut scores = [0u8; 4];
        for (slot, property) in Property::ALL.iter().enumerate() {
            scores[slot] = input.number(&format!("{property} {range}: "), LIKERT_MIN, LIKERT_MAX)?;
        }
        let likert = Likert { roughness: scores[0], thickness: scores[1], stiffness: scores[2], warmth: scores[3] };
        let acceptable = input.yes_no("acceptable as cloth (y/n): ")?;
        let similar_fabric = input.number(&format!("most similar fabric (1-{FABRIC_COUNT}): "), 1, FABRIC_COUNT)?;
        let free_text = input.line("comments: ")?;
        let record = ResponseRecord {
            condition,
            likert,
            acceptable,
            free_text,
            similar_fabric,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        };
        let saved = file.record_response(record).map_err(experiment_err);
        driver.send_line("OFF");
        saved?;
    }
    if file.log().distinct_sensation_count.is_none() {
        let n = ENERGIZED_CONDITIONS as u8;
        let count = input.number(&format!("\nhow many distinct sensations among the {n} energized states (0-{n}): "), 0, n)?;
        file.set_distinct_count(count).map_err(experiment_err)?;
    }
    println!("\nsession complete: {}", path.display());
    Ok(())
}

//! Line protocol and state machine of the simulated high-voltage driver.
//!
//! Grammar, one command per LF-terminated ASCII line, case-insensitive:
//!
//! ```text
//! SET V <number> | SET F <number> | ON | OFF | STATUS
//! ```
//!
//! Every command yields one response line: `OK`, `OK <value>` or
//! `ERR RANGE|SAFETY|ORDER|PARSE`.

use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drivechain::{self, BoosterModel, PulseConfig, SampledWaveform, DEFAULT_DUTY};
use crate::physics::{estimate_currents, MaterialStack, SafetyEnvelope};

pub const DEFAULT_MAX_VOLTAGE: f64 = 300.0;
pub const DEFAULT_MAX_FREQUENCY: f64 = drivechain::MAX_FREQUENCY;
pub const MIN_FREQUENCY: f64 = drivechain::MIN_FREQUENCY;

/// Series resistance assumed for the bench high-voltage path, Ω.
pub const DEFAULT_SERIES_RESISTANCE: f64 = 1.0e6;
/// Switch rise time assumed for the peak-current bound, s.
pub const DEFAULT_SWITCH_RISE_TIME: f64 = 1.0e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown verb")]
    UnknownVerb,
    #[error("bad argument")]
    BadArgument,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    SetVoltage,
    SetFrequency,
    On,
    Off,
    Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub verb: Verb,
    pub argument: Option<f64>,
}

impl Command {
    pub fn set_voltage(v: f64) -> Self {
        Command { verb: Verb::SetVoltage, argument: Some(v) }
    }

    pub fn set_frequency(f: f64) -> Self {
        Command { verb: Verb::SetFrequency, argument: Some(f) }
    }

    pub fn on() -> Self {
        Command { verb: Verb::On, argument: None }
    }

    pub fn off() -> Self {
        Command { verb: Verb::Off, argument: None }
    }

    pub fn status() -> Self {
        Command { verb: Verb::Status, argument: None }
    }
}

/// Formats a command in its canonical wire form (no trailing newline).
impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.verb, self.argument) {
            (Verb::SetVoltage, Some(v)) => write!(f, "SET V {v}"),
            (Verb::SetFrequency, Some(v)) => write!(f, "SET F {v}"),
            (Verb::On, _) => f.write_str("ON"),
            (Verb::Off, _) => f.write_str("OFF"),
            (Verb::Status, _) => f.write_str("STATUS"),
            (Verb::SetVoltage | Verb::SetFrequency, None) => Err(fmt::Error),
        }
    }
}

pub fn format_command(cmd: &Command) -> String {
    cmd.to_string()
}

pub fn parse_command(line: &str) -> Result<Command, ParseError> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let line = line.strip_suffix('\r').unwrap_or(line);
    if !line.is_ascii() {
        return Err(ParseError::UnknownVerb);
    }
    let tokens: Vec<&str> = line.split(' ').collect();
    let verb = tokens[0].to_ascii_uppercase();
    match verb.as_str() {
        "SET" => {
            let target = tokens.get(1).ok_or(ParseError::BadArgument)?.to_ascii_uppercase();
            let verb = match target.as_str() {
                "V" => Verb::SetVoltage,
                "F" => Verb::SetFrequency,
                _ => return Err(ParseError::UnknownVerb),
            };
            if tokens.len() != 3 {
                return Err(ParseError::BadArgument);
            }
            let value: f64 = tokens[2].parse().map_err(|_| ParseError::BadArgument)?;
            if !value.is_finite() {
                return Err(ParseError::BadArgument);
            }
            Ok(Command { verb, argument: Some(value) })
        }
        "ON" | "OFF" | "STATUS" => {
            if tokens.len() != 1 {
                return Err(ParseError::BadArgument);
            }
            let verb = match verb.as_str() {
                "ON" => Verb::On,
                "OFF" => Verb::Off,
                _ => Verb::Status,
            };
            Ok(Command { verb, argument: None })
        }
        _ => Err(ParseError::UnknownVerb),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Off,
    Armed,
    Driving,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Off => "OFF",
            Mode::Armed => "ARMED",
            Mode::Driving => "DRIVING",
        })
    }
}

/// Set-point limits and the inputs of the safety check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceLimits {
    pub max_voltage: f64,
    pub max_frequency: f64,
    pub stack: MaterialStack,
    pub envelope: SafetyEnvelope,
}

impl Default for DeviceLimits {
    fn default() -> Self {
        DeviceLimits {
            max_voltage: DEFAULT_MAX_VOLTAGE,
            max_frequency: DEFAULT_MAX_FREQUENCY,
            stack: MaterialStack::default(),
            envelope: SafetyEnvelope::new(DEFAULT_SERIES_RESISTANCE, DEFAULT_SWITCH_RISE_TIME),
        }
    }
}

impl DeviceLimits {
    /// True when driving at these set-points stays inside the current envelope.
    pub fn is_safe(&self, voltage: f64, frequency: f64) -> bool {
        estimate_currents(&self.stack, voltage, frequency, &self.envelope)
            .map(|r| r.pass)
            .unwrap_or(false)
    }

    fn voltage_in_range(&self, v: f64) -> bool {
        (0.0..=self.max_voltage).contains(&v)
    }

    fn frequency_in_range(&self, f: f64) -> bool {
        (MIN_FREQUENCY..=self.max_frequency).contains(&f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceState {
    pub mode: Mode,
    pub set_voltage: Option<f64>,
    pub set_frequency: Option<f64>,
    pub limits: DeviceLimits,
}

impl DeviceState {
    pub fn new(limits: DeviceLimits) -> Self {
        DeviceState { mode: Mode::Off, set_voltage: None, set_frequency: None, limits }
    }

    /// True when the state satisfies every device invariant, including the
    /// safety envelope while driving.
    pub fn is_consistent(&self) -> bool {
        let v_ok = self.set_voltage.is_none_or(|v| self.limits.voltage_in_range(v));
        let f_ok = self.set_frequency.is_none_or(|f| self.limits.frequency_in_range(f));
        let drive_ok = match (self.mode, self.set_voltage, self.set_frequency) {
            (Mode::Driving, Some(v), Some(f)) => self.limits.is_safe(v, f),
            (Mode::Driving, _, _) => false,
            _ => true,
        };
        v_ok && f_ok && drive_ok
    }
}

impl Default for DeviceState {
    fn default() -> Self {
        DeviceState::new(DeviceLimits::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    Range,
    Safety,
    Order,
    Parse,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::Range => "RANGE",
            ErrorCode::Safety => "SAFETY",
            ErrorCode::Order => "ORDER",
            ErrorCode::Parse => "PARSE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Ok,
    OkValue(String),
    Err(ErrorCode),
}

impl Response {
    pub fn is_ok(&self) -> bool {
        !matches!(self, Response::Err(_))
    }
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Response::Ok => f.write_str("OK"),
            Response::OkValue(v) => write!(f, "OK {v}"),
            Response::Err(code) => write!(f, "ERR {}", code.as_str()),
        }
    }
}

fn status_value(state: &DeviceState) -> String {
    let show = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
    format!("{} V={} F={}", state.mode, show(state.set_voltage), show(state.set_frequency))
}

/// Pure transition function. On error the returned state equals the input.
pub fn apply_command(state: &DeviceState, cmd: &Command) -> (DeviceState, Response) {
    let limits = &state.limits;
    let reject = |code| (*state, Response::Err(code));
    match (cmd.verb, cmd.argument) {
        (Verb::SetVoltage, Some(v)) => {
            if !limits.voltage_in_range(v) {
                return reject(ErrorCode::Range);
            }
            let mut next = *state;
            next.set_voltage = Some(v);
            transition_after_set(state, next)
        }
        (Verb::SetFrequency, Some(f)) => {
            if !limits.frequency_in_range(f) {
                return reject(ErrorCode::Range);
            }
            let mut next = *state;
            next.set_frequency = Some(f);
            transition_after_set(state, next)
        }
        (Verb::SetVoltage | Verb::SetFrequency, None) => reject(ErrorCode::Parse),
        (Verb::On, _) => match (state.mode, state.set_voltage, state.set_frequency) {
            (Mode::Off, _, _) | (_, None, _) | (_, _, None) => reject(ErrorCode::Order),
            (_, Some(v), Some(f)) => {
                if limits.is_safe(v, f) {
                    (DeviceState { mode: Mode::Driving, ..*state }, Response::Ok)
                } else {
                    reject(ErrorCode::Safety)
                }
            }
        },
        (Verb::Off, _) => (DeviceState { mode: Mode::Off, ..*state }, Response::Ok),
        (Verb::Status, _) => (*state, Response::OkValue(status_value(state))),
    }
}

fn transition_after_set(old: &DeviceState, mut next: DeviceState) -> (DeviceState, Response) {
    match old.mode {
        Mode::Off => next.mode = Mode::Armed,
        Mode::Armed => {}
        Mode::Driving => {
            // Still driving: the new set-points must stay safe.
            let safe = match (next.set_voltage, next.set_frequency) {
                (Some(v), Some(f)) => next.limits.is_safe(v, f),
                _ => false,
            };
            if !safe {
                return (*old, Response::Err(ErrorCode::Safety));
            }
        }
    }
    (next, Response::Ok)
}

/// Parses and applies one protocol line.
pub fn handle_line(state: &DeviceState, line: &str) -> (DeviceState, Response) {
    match parse_command(line) {
        Ok(cmd) => apply_command(state, &cmd),
        Err(_) => (*state, Response::Err(ErrorCode::Parse)),
    }
}

/// Voltage at the cloth for the current state.
///
/// Driving renders the drive chain at the state's set-points; any other mode
/// renders an all-zero waveform of the requested length.
pub fn render_output(
    state: &DeviceState,
    booster: &BoosterModel,
    duration: f64,
    sample_rate: f64,
) -> Result<SampledWaveform, drivechain::DriveError> {
    if !(duration.is_finite() && duration > 0.0 && sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(drivechain::DriveError::InvalidPulse(format!(
            "duration and sample rate must be > 0, got {duration} s at {sample_rate} Hz"
        )));
    }
    match (state.mode, state.set_voltage, state.set_frequency) {
        (Mode::Driving, Some(v), Some(f)) => {
            let cfg = PulseConfig::new(f, DEFAULT_DUTY, sample_rate, duration)?;
            let booster = BoosterModel { dc_input: booster.input_for(v), ..*booster };
            drivechain::drive_cloth(&cfg, &booster)
        }
        _ => Ok(SampledWaveform::zeros(sample_rate, drivechain::sample_count(duration, sample_rate))),
    }
}

/// Simulated driver: owns a state and records every exchange.
#[derive(Debug, Clone)]
pub struct SimulatedDriver {
    state: DeviceState,
    booster: BoosterModel,
    transcript: Vec<(String, String)>,
}

impl SimulatedDriver {
    pub fn new(limits: DeviceLimits) -> Self {
        SimulatedDriver {
            state: DeviceState::new(limits),
            booster: BoosterModel::ideal(limits.max_voltage),
            transcript: Vec::new(),
        }
    }

    pub fn with_booster(mut self, booster: BoosterModel) -> Self {
        self.booster = booster;
        self
    }

    pub fn state(&self) -> &DeviceState {
        &self.state
    }

    pub fn booster(&self) -> &BoosterModel {
        &self.booster
    }

    /// Every `(command line, response line)` pair seen so far.
    pub fn transcript(&self) -> &[(String, String)] {
        &self.transcript
    }

    pub fn send_line(&mut self, line: &str) -> Response {
        let (next, response) = handle_line(&self.state, line);
        self.state = next;
        let line = line.trim_end_matches(['\r', '\n']).to_string();
        self.transcript.push((line, response.to_string()));
        response
    }

    pub fn send(&mut self, cmd: &Command) -> Response {
        self.send_line(&format_command(cmd))
    }

    pub fn render(&self, duration: f64, sample_rate: f64) -> Result<SampledWaveform, drivechain::DriveError> {
        render_output(&self.state, &self.booster, duration, sample_rate)
    }

    /// Serves the line protocol over a byte stream until EOF.
    pub fn serve<R: BufRead, W: Write>(&mut self, input: R, mut output: W) -> io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let response = self.send_line(&line);
            writeln!(output, "{response}")?;
            output.flush()?;
        }
        Ok(())
    }
}

//! Simulation and sweep operations shared by the HTTP API and the CLI, so both
//! render byte-identical CSV.

use std::fmt::Write as _;

use serde::Serialize;
use tactile_core::device::{render_output, DeviceLimits, DeviceState, Mode};
use tactile_core::drivechain::{sample_count, BoosterModel, SampledWaveform};
use tactile_core::experiment::{build_condition_grid, Condition};
use tactile_core::physics::{
    estimate_currents, friction_trace, modulation_metrics, ForceTrace, ModulationMetrics, SafetyReport,
    MIN_OVERSAMPLING,
};

/// Trace sample rate used unless the drive frequency needs more.
pub const DEFAULT_TRACE_RATE: f64 = 20_000.0;
/// Longest trace served, in milliseconds.
pub const MAX_TRACE_MS: f64 = 10_000.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Range(String),
    #[error("{0}")]
    Safety(String),
    #[error("{0}")]
    Validation(String),
}

impl LabError {
    pub fn code(&self) -> &'static str {
        match self {
            LabError::Range(_) => "RANGE",
            LabError::Safety(_) => "SAFETY",
            LabError::Validation(_) => "VALIDATION",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRequest {
    pub voltage: f64,
    /// May be omitted when `voltage` is zero.
    pub frequency: Option<f64>,
    pub duration_ms: f64,
    /// Defaults to the larger of 20 kHz and the minimum oversampling rate.
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedTrace {
    #[serde(flatten)]
    pub trace: ForceTrace,
    pub metrics: ModulationMetrics,
    pub safety: Option<SafetyReport>,
}

impl SimulatedTrace {
    pub fn to_csv(&self) -> String {
        self.trace.to_csv()
    }
}

/// Force trace the device would produce when driving at the requested set-points.
pub fn simulate(limits: &DeviceLimits, booster: &BoosterModel, req: &TraceRequest) -> Result<SimulatedTrace, LabError> {
    let v = req.voltage;
    if !(v.is_finite() && (0.0..=limits.max_voltage).contains(&v)) {
        return Err(LabError::Range(format!("voltage {v} V is outside 0..={} V", limits.max_voltage)));
    }
    let f = match req.frequency {
        Some(f) if f.is_finite() && (1.0..=limits.max_frequency).contains(&f) => Some(f),
        Some(f) => return Err(LabError::Range(format!("frequency {f} Hz is outside 1..={} Hz", limits.max_frequency))),
        None if v == 0.0 => None,
        None => return Err(LabError::Validation("frequency is required when voltage is above 0 V".into())),
    };
    let ms = req.duration_ms;
    if !(ms.is_finite() && ms > 0.0 && ms <= MAX_TRACE_MS) {
        return Err(LabError::Validation(format!("duration {ms} ms is outside (0, {MAX_TRACE_MS}] ms")));
    }
    let rate = req
        .sample_rate
        .unwrap_or_else(|| DEFAULT_TRACE_RATE.max(MIN_OVERSAMPLING * f.unwrap_or(0.0)));
    if !(rate.is_finite() && rate > 0.0) {
        return Err(LabError::Validation(format!("sample rate {rate} Hz must be > 0")));
    }
    let duration = ms / 1000.0;
    let safety = match f {
        Some(f) => {
            let report = estimate_currents(&limits.stack, v, f, &limits.envelope)
                .map_err(|e| LabError::Validation(e.to_string()))?;
            if !report.pass {
                return Err(LabError::Safety(format!(
                    "{v} V at {f} Hz draws {:.3e} A average, {:.3e} A peak; limit {:.1e} A",
                    report.average_rectified_current, report.peak_current, report.limit
                )));
            }
            Some(report)
        }
        None => None,
    };
    let waveform = match f {
        Some(f) if v > 0.0 => {
            let state = DeviceState { mode: Mode::Driving, set_voltage: Some(v), set_frequency: Some(f), limits: *limits };
            render_output(&state, booster, duration, rate).map_err(|e| LabError::Validation(e.to_string()))?
        }
        _ => SampledWaveform {
            drive_frequency: f.unwrap_or(0.0),
            ..SampledWaveform::zeros(rate, sample_count(duration, rate))
        },
    };
    let trace = friction_trace(&limits.stack, &waveform).map_err(|e| LabError::Validation(e.to_string()))?;
    let metrics = modulation_metrics(&trace).map_err(|e| LabError::Validation(e.to_string()))?;
    Ok(SimulatedTrace { trace, metrics, safety })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub condition: Condition,
    pub voltage: u32,
    pub frequency: u32,
    #[serde(flatten)]
    pub report: SafetyReport,
}

/// Safety estimate for each energized grid condition.
pub fn safety_sweep(limits: &DeviceLimits) -> Result<Vec<SweepRow>, LabError> {
    build_condition_grid()
        .into_iter()
        .filter_map(|c| Some((c, c.voltage()?, c.frequency()?)))
        .map(|(condition, voltage, frequency)| {
            let report = estimate_currents(&limits.stack, f64::from(voltage), f64::from(frequency), &limits.envelope)
                .map_err(|e| LabError::Validation(e.to_string()))?;
            Ok(SweepRow { condition, voltage, frequency, report })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("voltage_v,frequency_hz,average_current_a,peak_current_a,limit_a,pass\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.voltage, r.frequency, r.report.average_rectified_current, r.report.peak_current, r.report.limit, r.report.pass
        );
    }
    out
}

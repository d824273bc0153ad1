//! Drive chain from pulse generator through booster to the switched cloth,
//! producing the high-voltage square wave.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_FREQUENCY: f64 = 1.0;
pub const MAX_FREQUENCY: f64 = 2000.0;
pub const DEFAULT_DUTY: f64 = 0.5;

/// Guards phase comparisons against accumulated rounding in `i·f/fs`.
const PHASE_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriveError {
    #[error("invalid pulse configuration: {0}")]
    InvalidPulse(String),
    #[error("invalid booster model: {0}")]
    InvalidBooster(String),
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
    #[error("rise + fall time {edges} s does not fit in a half period of {half_period} s")]
    EdgesTooSlow { edges: f64, half_period: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    pub frequency: f64,
    pub duty: f64,
    pub sample_rate: f64,
    pub duration: f64,
}

impl PulseConfig {
    pub fn new(frequency: f64, duty: f64, sample_rate: f64, duration: f64) -> Result<Self, DriveError> {
        let cfg = PulseConfig { frequency, duty, sample_rate, duration };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), DriveError> {
        let bad = |msg: String| Err(DriveError::InvalidPulse(msg));
        if !(self.frequency.is_finite() && (MIN_FREQUENCY..=MAX_FREQUENCY).contains(&self.frequency)) {
            return bad(format!(
                "frequency must lie in [{MIN_FREQUENCY}, {MAX_FREQUENCY}] Hz, got {}",
                self.frequency
            ));
        }
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return bad(format!("duty must lie in (0, 1), got {}", self.duty));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate >= 20.0 * self.frequency) {
            return bad(format!(
                "sample rate must be at least 20x the frequency, got {} Hz for {} Hz",
                self.sample_rate, self.frequency
            ));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be > 0 s, got {}", self.duration));
        }
        if sample_count(self.duration, self.sample_rate) == 0 {
            return bad("duration is shorter than one sample".into());
        }
        Ok(())
    }
}

/// Number of samples covering `duration` at `sample_rate`.
pub fn sample_count(duration: f64, sample_rate: f64) -> usize {
    (duration * sample_rate).round() as usize
}

/// DC-DC booster feeding the switch. Linear gain with an output clamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoosterModel {
    pub dc_input: f64,
    pub gain: f64,
    pub max_output: f64,
    pub rise_time: f64,
    pub fall_time: f64,
}

impl BoosterModel {
    /// Booster with ideal (instantaneous) switch edges.
    pub fn ideal(max_output: f64) -> Self {
        BoosterModel { dc_input: 0.0, gain: 1.0, max_output, rise_time: 0.0, fall_time: 0.0 }
    }

    pub fn validate(&self) -> Result<(), DriveError> {
        let bad = |msg: String| Err(DriveError::InvalidBooster(msg));
        if !(self.gain.is_finite() && self.gain > 0.0) {
            return bad(format!("gain must be > 0, got {}", self.gain));
        }
        if !(self.max_output.is_finite() && self.max_output > 0.0) {
            return bad(format!("max output must be > 0 V, got {}", self.max_output));
        }
        if !(self.dc_input.is_finite() && self.dc_input >= 0.0) {
            return bad(format!("dc input must be >= 0 V, got {}", self.dc_input));
        }
        if !(self.rise_time.is_finite() && self.rise_time >= 0.0) {
            return bad(format!("rise time must be >= 0 s, got {}", self.rise_time));
        }
        if !(self.fall_time.is_finite() && self.fall_time >= 0.0) {
            return bad(format!("fall time must be >= 0 s, got {}", self.fall_time));
        }
        Ok(())
    }

    /// High-voltage output for the current DC input.
    pub fn output_voltage(&self) -> f64 {
        (self.dc_input * self.gain).clamp(0.0, self.max_output)
    }

    /// DC input needed to reach `target` volts at the output.
    pub fn input_for(&self, target: f64) -> f64 {
        target / self.gain
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledWaveform {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
    /// Frequency of the drive that produced the waveform; 0 for an undriven line.
    pub drive_frequency: f64,
}

impl SampledWaveform {
    pub fn zeros(sample_rate: f64, len: usize) -> Self {
        SampledWaveform { sample_rate, samples: vec![0.0; len], drive_frequency: 0.0 }
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of period starts: transitions from a lower to a higher level,
    /// counting a waveform that starts high as starting with an edge.
    pub fn rising_edges(&self) -> usize {
        let mut prev = 0.0;
        let mut count = 0;
        for &v in &self.samples {
            if v > prev {
                count += 1;
            }
            prev = v;
        }
        count
    }

    /// CSV with header `t_s,voltage_v`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 24 + 16);
        out.push_str("t_s,voltage_v\n");
        for (i, v) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i as f64 / self.sample_rate, v);
        }
        out
    }
}

/// Ideal 0/V square wave; the first sample is the ON level at t = 0.
pub fn synthesize_square(cfg: &PulseConfig, high_voltage: f64) -> Result<SampledWaveform, DriveError> {
    cfg.validate()?;
    if !(high_voltage.is_finite() && high_voltage >= 0.0) {
        return Err(DriveError::InvalidPulse(format!("high voltage must be >= 0 V, got {high_voltage}")));
    }
    let n = sample_count(cfg.duration, cfg.sample_rate);
    let samples = (0..n)
        .map(|i| {
            let cycles = i as f64 * cfg.frequency / cfg.sample_rate;
            let phase = (cycles - (cycles + PHASE_EPS).floor()).max(0.0);
            if phase < cfg.duty - PHASE_EPS {
                high_voltage
            } else {
                0.0
            }
        })
        .collect();
    Ok(SampledWaveform { sample_rate: cfg.sample_rate, samples, drive_frequency: cfg.frequency })
}

/// Passes an ideal waveform through the switch stage.
///
/// Every edge becomes a linear ramp placed inside the higher of the two
/// adjacent levels: a rising edge ramps up after the ideal edge, a falling
/// edge ramps down before it. The output therefore never exceeds the input
/// pointwise. Samples are then clamped to `[0, max_output]`.
pub fn apply_switch(ideal: &SampledWaveform, booster: &BoosterModel) -> Result<SampledWaveform, DriveError> {
    booster.validate()?;
    if ideal.samples.is_empty() {
        return Err(DriveError::InvalidWaveform("waveform is empty".into()));
    }
    if !(ideal.sample_rate.is_finite() && ideal.sample_rate > 0.0) {
        return Err(DriveError::InvalidWaveform(format!("sample rate must be > 0, got {}", ideal.sample_rate)));
    }
    if ideal.drive_frequency > 0.0 {
        let edges = booster.rise_time + booster.fall_time;
        let half_period = 0.5 / ideal.drive_frequency;
        if edges >= half_period {
            return Err(DriveError::EdgesTooSlow { edges, half_period });
        }
    }

    let rise_samples = booster.rise_time * ideal.sample_rate;
    let fall_samples = booster.fall_time * ideal.sample_rate;
    let segments = segments(&ideal.samples);
    let mut out = Vec::with_capacity(ideal.samples.len());
    for (k, seg) in segments.iter().enumerate() {
        let prev = k.checked_sub(1).map(|p| segments[p].level);
        let next = segments.get(k + 1).map(|s| s.level);
        for j in seg.start..seg.end {
            let mut v = seg.level;
            if let Some(lower) = prev.filter(|&p| p < seg.level) {
                let progress = ramp_progress((j - seg.start + 1) as f64, rise_samples);
                v = v.min(lower + (seg.level - lower) * progress);
            }
            if let Some(lower) = next.filter(|&n| n < seg.level) {
                let progress = ramp_progress((seg.end - j) as f64, fall_samples);
                v = v.min(lower + (seg.level - lower) * progress);
            }
            out.push(v.clamp(0.0, booster.max_output));
        }
    }
    Ok(SampledWaveform { sample_rate: ideal.sample_rate, samples: out, drive_frequency: ideal.drive_frequency })
}

/// Full drive chain: pulse generator into booster and switch.
pub fn drive_cloth(cfg: &PulseConfig, booster: &BoosterModel) -> Result<SampledWaveform, DriveError> {
    let ideal = synthesize_square(cfg, booster.output_voltage())?;
    apply_switch(&ideal, booster)
}

fn ramp_progress(elapsed_samples: f64, ramp_samples: f64) -> f64 {
    if ramp_samples <= 0.0 {
        1.0
    } else {
        (elapsed_samples / ramp_samples).min(1.0)
    }
}

struct Segment {
    start: usize,
    end: usize,
    level: f64,
}

fn segments(samples: &[f64]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (i, &v) in samples.iter().enumerate() {
        match out.last_mut() {
            Some(seg) if seg.level == v => seg.end = i + 1,
            _ => out.push(Segment { start: i, end: i + 1, level: v }),
        }
    }
    out
}

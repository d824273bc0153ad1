//! Electrostatic attraction and friction across the glove dielectric.
//!
//! The finger, the insulating glove and the conductive cloth form a parallel
//! plate capacitor. The attractive normal force is `A·ε·ε₀/2·(V/d)²` and the
//! friction felt by a sliding finger is that force scaled by μ. All values are
//! strict SI.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drivechain::SampledWaveform;

/// Vacuum permittivity ε₀ in F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Upper bound on insulator thickness for the thin-dielectric model, in m.
pub const MAX_INSULATOR_THICKNESS: f64 = 0.01;

/// Current limit of the high-voltage section, in A.
pub const CURRENT_LIMIT: f64 = 5.0e-4;

/// Glove thickness used in the prototype, in m.
pub const GLOVE_THICKNESS: f64 = 3.5e-5;

/// Default fingertip contact area (1 cm²), in m².
pub const FINGERTIP_AREA: f64 = 1.0e-4;

/// Typical relative permittivity of PVC.
pub const PVC_REL_PERMITTIVITY: f64 = 3.0;

pub const DEFAULT_FRICTION_COEFF: f64 = 0.5;

/// Minimum ratio of sample rate to drive frequency accepted for force traces.
pub const MIN_OVERSAMPLING: f64 = 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("invalid material stack: {0}")]
    InvalidStack(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("waveform is empty")]
    EmptyWaveform,
    #[error("sample rate {sample_rate} Hz is below {MIN_OVERSAMPLING}x the drive frequency {frequency} Hz")]
    Aliasing { sample_rate: f64, frequency: f64 },
}

impl PhysicsError {
    pub fn code(&self) -> &'static str {
        match self {
            PhysicsError::InvalidStack(_) | PhysicsError::InvalidInput(_) => "VALIDATION",
            PhysicsError::EmptyWaveform => "EMPTY_WAVEFORM",
            PhysicsError::Aliasing { .. } => "ALIASING",
        }
    }
}

/// Geometry and material constants of the finger–glove–cloth capacitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialStack {
    /// Contact area A, m².
    pub contact_area: f64,
    /// Insulator thickness d, m.
    pub insulator_thickness: f64,
    /// Relative permittivity ε of the insulator.
    pub insulator_rel_permittivity: f64,
    /// Friction coefficient μ between skin and cloth.
    pub friction_coeff: f64,
}

impl Default for MaterialStack {
    /// Fingertip on a PVC glove.
    fn default() -> Self {
        MaterialStack {
            contact_area: FINGERTIP_AREA,
            insulator_thickness: GLOVE_THICKNESS,
            insulator_rel_permittivity: PVC_REL_PERMITTIVITY,
            friction_coeff: DEFAULT_FRICTION_COEFF,
        }
    }
}

impl MaterialStack {
    pub fn new(
        contact_area: f64,
        insulator_thickness: f64,
        insulator_rel_permittivity: f64,
        friction_coeff: f64,
    ) -> Result<Self, PhysicsError> {
        let stack = MaterialStack {
            contact_area,
            insulator_thickness,
            insulator_rel_permittivity,
            friction_coeff,
        };
        stack.validate()?;
        Ok(stack)
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let bad = |msg: String| Err(PhysicsError::InvalidStack(msg));
        if !(self.contact_area.is_finite() && self.contact_area > 0.0) {
            return bad(format!("contact area must be > 0 m², got {}", self.contact_area));
        }
        if !(self.insulator_thickness.is_finite() && self.insulator_thickness > 0.0) {
            return bad(format!(
                "insulator thickness must be > 0 m, got {}",
                self.insulator_thickness
            ));
        }
        if self.insulator_thickness > MAX_INSULATOR_THICKNESS {
            return bad(format!(
                "insulator thickness {} m exceeds the thin-insulator bound of {} m",
                self.insulator_thickness, MAX_INSULATOR_THICKNESS
            ));
        }
        if !(self.insulator_rel_permittivity.is_finite() && self.insulator_rel_permittivity >= 1.0) {
            return bad(format!(
                "relative permittivity must be >= 1, got {}",
                self.insulator_rel_permittivity
            ));
        }
        if !(self.friction_coeff.is_finite() && self.friction_coeff >= 0.0) {
            return bad(format!("friction coefficient must be >= 0, got {}", self.friction_coeff));
        }
        Ok(())
    }

    /// Stack with the contact area replaced.
    pub fn with_area(self, contact_area: f64) -> Result<Self, PhysicsError> {
        MaterialStack { contact_area, ..self }.checked()
    }

    fn checked(self) -> Result<Self, PhysicsError> {
        self.validate()?;
        Ok(self)
    }
}

/// Attractive normal force between finger and cloth at a given voltage, in N.
pub fn electrostatic_normal_force(stack: &MaterialStack, voltage: f64) -> Result<f64, PhysicsError> {
    stack.validate()?;
    if !voltage.is_finite() {
        return Err(PhysicsError::InvalidInput(format!("voltage must be finite, got {voltage}")));
    }
    Ok(normal_force_unchecked(stack, voltage))
}

#[inline]
fn normal_force_unchecked(stack: &MaterialStack, voltage: f64) -> f64 {
    let field = voltage / stack.insulator_thickness;
    stack.contact_area * stack.insulator_rel_permittivity * VACUUM_PERMITTIVITY / 2.0 * field * field
}

/// Capacitance of the finger–cloth coupling, in F.
pub fn coupling_capacitance(stack: &MaterialStack) -> Result<f64, PhysicsError> {
    stack.validate()?;
    Ok(stack.insulator_rel_permittivity * VACUUM_PERMITTIVITY * stack.contact_area
        / stack.insulator_thickness)
}

/// Time-sampled voltage with the normal and friction forces it produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceTrace {
    pub sample_rate: f64,
    pub drive_frequency: f64,
    pub friction_coeff: f64,
    pub voltage: Vec<f64>,
    pub normal_force: Vec<f64>,
    pub friction_force: Vec<f64>,
}

impl ForceTrace {
    pub fn len(&self) -> usize {
        self.normal_force.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normal_force.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    /// CSV with header `t_s,voltage_v,normal_n,friction_n`, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 48 + 32);
        out.push_str("t_s,voltage_v,normal_n,friction_n\n");
        for i in 0..self.len() {
            let t = i as f64 / self.sample_rate;
            let _ = writeln!(
                out,
                "{},{},{},{}",
                t, self.voltage[i], self.normal_force[i], self.friction_force[i]
            );
        }
        out
    }
}

/// Applies the force law pointwise to a sampled drive voltage.
pub fn friction_trace(stack: &MaterialStack, waveform: &SampledWaveform) -> Result<ForceTrace, PhysicsError> {
    stack.validate()?;
    if waveform.samples.is_empty() {
        return Err(PhysicsError::EmptyWaveform);
    }
    if !(waveform.sample_rate.is_finite() && waveform.sample_rate > 0.0) {
        return Err(PhysicsError::InvalidInput(format!(
            "sample rate must be > 0 Hz, got {}",
            waveform.sample_rate
        )));
    }
    if waveform.drive_frequency > 0.0 && waveform.sample_rate < MIN_OVERSAMPLING * waveform.drive_frequency {
        return Err(PhysicsError::Aliasing {
            sample_rate: waveform.sample_rate,
            frequency: waveform.drive_frequency,
        });
    }
    if let Some(bad) = waveform.samples.iter().find(|v| !v.is_finite()) {
        return Err(PhysicsError::InvalidInput(format!("non-finite voltage sample {bad}")));
    }
    let normal_force: Vec<f64> = waveform
        .samples
        .iter()
        .map(|&v| normal_force_unchecked(stack, v))
        .collect();
    let friction_force = normal_force.iter().map(|f| stack.friction_coeff * f).collect();
    Ok(ForceTrace {
        sample_rate: waveform.sample_rate,
        drive_frequency: waveform.drive_frequency,
        friction_coeff: stack.friction_coeff,
        voltage: waveform.samples.clone(),
        normal_force,
        friction_force,
    })
}

/// Electrical conditions used to bound the current through the user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyEnvelope {
    /// Series resistance of the high-voltage path, Ω.
    pub series_resistance: f64,
    /// Switch rise time, s.
    pub rise_time: f64,
    /// Limit on the average rectified current, A.
    pub limit: f64,
    /// Limit on the peak current, A.
    pub peak_limit: f64,
}

impl SafetyEnvelope {
    /// Envelope with both current limits at 0.5 mA.
    pub fn new(series_resistance: f64, rise_time: f64) -> Self {
        SafetyEnvelope {
            series_resistance,
            rise_time,
            limit: CURRENT_LIMIT,
            peak_limit: CURRENT_LIMIT,
        }
    }

    fn validate(&self) -> Result<(), PhysicsError> {
        for (name, value) in [
            ("series resistance", self.series_resistance),
            ("rise time", self.rise_time),
            ("current limit", self.limit),
            ("peak current limit", self.peak_limit),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(PhysicsError::InvalidInput(format!("{name} must be > 0, got {value}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyReport {
    pub average_rectified_current: f64,
    pub peak_current: f64,
    pub limit: f64,
    pub peak_limit: f64,
    pub pass: bool,
}

/// Estimates the current drawn through the finger by a 0/V square drive.
///
/// The coupling capacitance is charged and discharged once per period, giving
/// an average rectified current of `2·C·V·f`. The peak current is bounded by
/// the series resistance and by the charge moved during one switch edge.
pub fn estimate_currents(
    stack: &MaterialStack,
    voltage: f64,
    frequency: f64,
    envelope: &SafetyEnvelope,
) -> Result<SafetyReport, PhysicsError> {
    envelope.validate()?;
    if !(voltage.is_finite() && voltage >= 0.0) {
        return Err(PhysicsError::InvalidInput(format!("voltage must be >= 0 V, got {voltage}")));
    }
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(PhysicsError::InvalidInput(format!("frequency must be > 0 Hz, got {frequency}")));
    }
    let capacitance = coupling_capacitance(stack)?;
    let average_rectified_current = 2.0 * capacitance * voltage * frequency;
    let peak_current =
        (voltage / envelope.series_resistance).min(capacitance * voltage / envelope.rise_time);
    let pass = average_rectified_current <= envelope.limit && peak_current <= envelope.peak_limit;
    Ok(SafetyReport {
        average_rectified_current,
        peak_current,
        limit: envelope.limit,
        peak_limit: envelope.peak_limit,
        pass,
    })
}

/// Summary of how strongly a trace modulates friction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationMetrics {
    pub peak_to_peak: f64,
    pub mean: f64,
    pub ac_rms: f64,
    /// Estimated fundamental frequency in Hz; 0 when the trace never crosses its midline.
    pub fundamental: f64,
}

pub fn modulation_metrics(trace: &ForceTrace) -> Result<ModulationMetrics, PhysicsError> {
    let signal = &trace.friction_force;
    if signal.is_empty() {
        return Err(PhysicsError::EmptyWaveform);
    }
    let (min, max) = signal
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let n = signal.len() as f64;
    if max == min {
        return Ok(ModulationMetrics { peak_to_peak: 0.0, mean: max, ac_rms: 0.0, fundamental: 0.0 });
    }
    let mean = signal.iter().sum::<f64>() / n;
    let ac_rms = (signal.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ModulationMetrics {
        peak_to_peak: max - min,
        mean,
        ac_rms,
        fundamental: midline_fundamental(signal, trace.sample_rate, min, max),
    })
}

/// Fundamental frequency from upward crossings of the midline `(min+max)/2`.
///
/// With two or more crossings the rate is taken between the first and last
/// crossing (linearly interpolated), so partial periods at the ends of the
/// trace do not bias the estimate. A single crossing falls back to count over
/// duration.
fn midline_fundamental(signal: &[f64], sample_rate: f64, min: f64, max: f64) -> f64 {
    if max <= min {
        return 0.0;
    }
    let mid = 0.5 * (min + max);
    let crossings: Vec<f64> = signal
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < mid && w[1] >= mid)
        .map(|(i, w)| i as f64 + (mid - w[0]) / (w[1] - w[0]))
        .collect();
    match crossings.len() {
        0 => 0.0,
        1 => sample_rate / signal.len() as f64,
        k => {
            let span = (crossings[k - 1] - crossings[0]) / sample_rate;
            (k - 1) as f64 / span
        }
    }
}

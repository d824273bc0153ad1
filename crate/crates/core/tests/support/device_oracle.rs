//! Reference model of the device protocol, written from the command table
//! without reusing the library's transition code.
#![allow(dead_code)]

use tactile_core::device::{apply_command, format_command, parse_command, Command, DeviceLimits, DeviceState, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    SetV(f64),
    SetF(f64),
    On,
    Off,
    Status,
}

impl Op {
    pub fn command(self) -> Command {
        match self {
            Op::SetV(v) => Command::set_voltage(v),
            Op::SetF(f) => Command::set_frequency(f),
            Op::On => Command::on(),
            Op::Off => Command::off(),
            Op::Status => Command::status(),
        }
    }
}

pub const ALPHABET: [Op; 11] = [
    Op::SetV(0.0),
    Op::SetV(100.0),
    Op::SetV(200.0),
    Op::SetV(300.0),
    Op::SetV(900.0),
    Op::SetF(50.0),
    Op::SetF(200.0),
    Op::SetF(5000.0),
    Op::On,
    Op::Off,
    Op::Status,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub mode: &'static str,
    pub v: Option<f64>,
    pub f: Option<f64>,
}

pub const START: Reference = Reference { mode: "OFF", v: None, f: None };

/// Safety from first principles: 2CVf and the switched peak both under 0.5 mA.
pub fn safe(limits: &DeviceLimits, v: f64, f: f64) -> bool {
    let s = &limits.stack;
    let c = s.insulator_rel_permittivity * 8.854_187_812_8e-12 * s.contact_area / s.insulator_thickness;
    let avg = 2.0 * c * v * f;
    let peak = (v / limits.envelope.series_resistance).min(c * v / limits.envelope.rise_time);
    avg <= 5e-4 && peak <= 5e-4
}

pub fn step(limits: &DeviceLimits, r: Reference, op: Op) -> (Reference, String) {
    let err = |code: &str| (r, format!("ERR {code}"));
    let set = |next: Reference| {
        if r.mode == "DRIVING" && !safe(limits, next.v.unwrap(), next.f.unwrap()) {
            return err("SAFETY");
        }
        let mode = if r.mode == "OFF" { "ARMED" } else { r.mode };
        (Reference { mode, ..next }, "OK".to_string())
    };
    match op {
        Op::SetV(v) if !(0.0..=limits.max_voltage).contains(&v) => err("RANGE"),
        Op::SetF(f) if !(1.0..=limits.max_frequency).contains(&f) => err("RANGE"),
        Op::SetV(v) => set(Reference { v: Some(v), ..r }),
        Op::SetF(f) => set(Reference { f: Some(f), ..r }),
        Op::On => match (r.mode, r.v, r.f) {
            ("OFF", _, _) | (_, None, _) | (_, _, None) => err("ORDER"),
            (_, Some(v), Some(f)) if !safe(limits, v, f) => err("SAFETY"),
            _ => (Reference { mode: "DRIVING", ..r }, "OK".to_string()),
        },
        Op::Off => (Reference { mode: "OFF", ..r }, "OK".to_string()),
        Op::Status => {
            let show = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x}"));
            (r, format!("OK {} V={} F={}", r.mode, show(r.v), show(r.f)))
        }
    }
}

pub fn agrees(state: &DeviceState, r: &Reference) -> bool {
    let mode = match state.mode {
        Mode::Off => "OFF",
        Mode::Armed => "ARMED",
        Mode::Driving => "DRIVING",
    };
    mode == r.mode && state.set_voltage == r.v && state.set_frequency == r.f
}

#[derive(Debug, Default)]
pub struct CheckSummary {
    pub sequences: usize,
    pub transitions: usize,
    pub failures: Vec<String>,
}

/// Walks every command sequence up to `depth`, comparing the implementation
/// with the reference after each step and checking the safety invariant.
pub fn exhaustive_check(limits: DeviceLimits, depth: usize) -> CheckSummary {
    let mut summary = CheckSummary::default();
    let mut trail = Vec::with_capacity(depth);
    walk(&limits, DeviceState::new(limits), START, depth, &mut trail, &mut summary);
    summary
}

fn walk(
    limits: &DeviceLimits,
    state: DeviceState,
    reference: Reference,
    remaining: usize,
    trail: &mut Vec<Op>,
    summary: &mut CheckSummary,
) {
    summary.sequences += 1;
    if remaining == 0 || summary.failures.len() > 10 {
        return;
    }
    for op in ALPHABET {
        trail.push(op);
        let wire = format_command(&op.command());
        let parsed = parse_command(&wire);
        let (next, response) = apply_command(&state, &op.command());
        let (expected, expected_response) = step(limits, reference, op);
        summary.transitions += 1;
        let driving_unsafe = next.mode == Mode::Driving
            && !matches!((next.set_voltage, next.set_frequency), (Some(v), Some(f)) if safe(limits, v, f));
        if parsed.as_ref() != Ok(&op.command())
            || response.to_string() != expected_response
            || !agrees(&next, &expected)
            || driving_unsafe
            || !next.is_consistent()
        {
            summary.failures.push(format!("{trail:?}: got {response} {next:?}, expected {expected_response} {expected:?}"));
        }
        walk(limits, next, expected, remaining - 1, trail, summary);
        trail.pop();
    }
}

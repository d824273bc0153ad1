//! Unit-suffixed quantities at the user-facing boundary, converted to SI.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse '{input}' as {kind}: {reason}")]
pub struct UnitError {
    pub input: String,
    pub kind: &'static str,
    pub reason: String,
}

/// Suffixes with their power-of-ten exponent relative to SI.
const LENGTH_UNITS: &[(&str, i32)] = &[("nm", -9), ("um", -6), ("µm", -6), ("mm", -3), ("cm", -2), ("m", 0)];

const AREA_UNITS: &[(&str, i32)] = &[("mm2", -6), ("mm²", -6), ("cm2", -4), ("cm²", -4), ("m2", 0), ("m²", 0)];

fn parse_with(input: &str, kind: &'static str, units: &[(&str, i32)]) -> Result<f64, UnitError> {
    let err = |reason: &str| UnitError { input: input.to_string(), kind, reason: reason.to_string() };
    let text = input.trim();
    let (number, shift) = units
        .iter()
        .find_map(|(suffix, shift)| text.strip_suffix(suffix).map(|n| (n.trim(), *shift)))
        .unwrap_or((text, 0));
    // shift the decimal exponent instead of multiplying so `35um` rounds like `35e-6`
    let (mantissa, exponent) = match number.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err("not a number"))?),
        None => (number, 0),
    };
    if mantissa.is_empty() || !mantissa.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+')) {
        return Err(err("not a number"));
    }
    let value: f64 = format!("{mantissa}e{}", exponent + shift).parse().map_err(|_| err("not a number"))?;
    if !value.is_finite() {
        return Err(err("not finite"));
    }
    Ok(value)
}

/// Length such as `35um`, `0.035mm` or `3.5e-5` (bare numbers are metres).
pub fn parse_length(input: &str) -> Result<f64, UnitError> {
    parse_with(input, "length", LENGTH_UNITS)
}

/// Area such as `1cm2`, `100mm2` or `1e-4` (bare numbers are square metres).
pub fn parse_area(input: &str) -> Result<f64, UnitError> {
    parse_with(input, "area", AREA_UNITS)
}

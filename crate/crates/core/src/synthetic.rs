//! Seeded synthetic cohorts for exercising the analysis pipeline.
//!
//! Responses are drawn from a simple additive model: a per-subject offset, an
//! optional monotone voltage effect and i.i.d. Gaussian noise, rounded and
//! clamped to the 5-point scale when Likert output is requested.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::experiment::{
    plan_session, Condition, ExperimentError, Likert, Property, ResponseRecord, SessionLog, LIKERT_MAX, LIKERT_MIN,
};
use crate::stats::FactorialObservation;

pub const VOLTAGE_LEVELS: [u32; 3] = [100, 200, 300];
pub const FREQUENCY_LEVELS: [u32; 3] = [50, 100, 200];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseModel {
    /// Score at the lowest voltage, before subject offset and noise.
    pub base: f64,
    /// Score increase per voltage step (100 V → 200 V → 300 V).
    pub voltage_step: f64,
    /// Score increase per frequency step.
    pub frequency_step: f64,
    pub subject_sd: f64,
    pub noise_sd: f64,
    /// Round and clamp to 1..=5.
    pub likert: bool,
}

impl ResponseModel {
    /// Roughness rising with voltage, unaffected by frequency.
    pub fn voltage_driven_roughness() -> Self {
        ResponseModel {
            base: 1.5,
            voltage_step: 1.5,
            frequency_step: 0.0,
            subject_sd: 0.5,
            noise_sd: 0.5,
            likert: true,
        }
    }

    /// Pure noise: no effects at all, continuous responses.
    pub fn null() -> Self {
        ResponseModel {
            base: 0.0,
            voltage_step: 0.0,
            frequency_step: 0.0,
            subject_sd: 1.0,
            noise_sd: 1.0,
            likert: false,
        }
    }

    fn score(&self, offset: f64, vi: usize, fi: usize, noise: f64) -> f64 {
        let raw = self.base + offset + self.voltage_step * vi as f64 + self.frequency_step * fi as f64 + noise;
        if self.likert {
            raw.round().clamp(f64::from(LIKERT_MIN), f64::from(LIKERT_MAX))
        } else {
            raw
        }
    }
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("standard deviations are finite and non-negative")
}

/// Balanced subjects × voltage × frequency dataset drawn from `model`.
pub fn cohort(model: &ResponseModel, subjects: usize, seed: u64) -> Vec<FactorialObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (subject_dist, noise_dist) = (normal(model.subject_sd), normal(model.noise_sd));
    let mut out = Vec::with_capacity(subjects * 9);
    for s in 0..subjects {
        let offset = subject_dist.sample(&mut rng);
        for (vi, v) in VOLTAGE_LEVELS.iter().enumerate() {
            for (fi, f) in FREQUENCY_LEVELS.iter().enumerate() {
                let y = model.score(offset, vi, fi, noise_dist.sample(&mut rng));
                out.push(FactorialObservation::new(format!("S{}", s + 1), v.to_string(), f.to_string(), y));
            }
        }
    }
    out
}

/// Frequently chosen fabrics in the synthetic sessions (1-based catalog indices).
const COMMON_FABRICS: [u8; 5] = [3, 4, 5, 6, 9];

/// A complete simulated session: roughness follows `model` (forced to Likert),
/// the other properties are noise around the scale midpoint.
pub fn session(
    participant_id: &str,
    seed: u64,
    model: &ResponseModel,
    timestamp: &str,
) -> Result<SessionLog, ExperimentError> {
    let plan = plan_session(participant_id, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5e55_1011);
    let model = ResponseModel { likert: true, ..*model };
    let offset = normal(model.subject_sd).sample(&mut rng);
    let noise = normal(model.noise_sd);
    let mut log = SessionLog::new(plan.clone());
    for condition in &plan.order {
        let (vi, fi) = match condition {
            Condition::Baseline => (0, 0),
            Condition::Energized { voltage, frequency } => (*voltage as usize, *frequency as usize),
        };
        let roughness = match condition {
            Condition::Baseline => model.score(offset, 0, 0, noise.sample(&mut rng)) - model.voltage_step.round(),
            _ => model.score(offset, vi, fi, noise.sample(&mut rng)),
        }
        .clamp(f64::from(LIKERT_MIN), f64::from(LIKERT_MAX)) as u8;
        let other = |rng: &mut ChaCha8Rng| (3.0 + noise.sample(rng)).round().clamp(1.0, 5.0) as u8;
        let likert = Likert {
            roughness,
            thickness: other(&mut rng),
            stiffness: other(&mut rng),
            warmth: other(&mut rng),
        };
        let acceptable = !(vi == 2 && rng.random_bool(0.3));
        let similar_fabric = if rng.random_bool(0.8) {
            COMMON_FABRICS[rng.random_range(0..COMMON_FABRICS.len())]
        } else {
            rng.random_range(1..=16)
        };
        log.record_response(ResponseRecord {
            condition: *condition,
            likert,
            acceptable,
            free_text: String::new(),
            similar_fabric,
            timestamp: timestamp.to_string(),
        })?;
    }
    log.set_distinct_count(rng.random_range(5..=9))?;
    Ok(log)
}

/// Values of one property from a session, keyed for quick inspection.
pub fn property_scores(log: &SessionLog, property: Property) -> Vec<(Condition, u8)> {
    log.responses.iter().map(|r| (r.condition, r.likert.get(property))).collect()
}

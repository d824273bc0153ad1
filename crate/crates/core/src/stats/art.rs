//! Aligned Rank Transform for a two-factor within-subject design.
//!
//! For each term the responses are stripped of every effect (residual from the
//! A×B cell mean) and the estimated effect of that one term is added back. The
//! aligned values are midranked and an ordinary repeated-measures ANOVA is run
//! on the ranks; only the row for the aligned term is kept.

use serde::{Deserialize, Serialize};

use super::anova::Design;
use super::{midrank, rm_anova, AnovaRow, FactorialObservation, StatsError, Term};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSet {
    pub target_term: Term,
    /// Aligned responses, in input order.
    pub aligned: Vec<f64>,
    /// Midranks of `aligned`.
    pub ranks: Vec<f64>,
}

impl AlignedSet {
    /// Observations with the response replaced by `values` (aligned or ranks).
    pub fn with_responses(data: &[FactorialObservation], values: &[f64]) -> Vec<FactorialObservation> {
        data.iter()
            .zip(values)
            .map(|(o, &v)| FactorialObservation { response: v, ..o.clone() })
            .collect()
    }
}

pub fn align_for_effect(data: &[FactorialObservation], term: Term) -> Result<AlignedSet, StatsError> {
    let design = Design::new(data)?;
    let m = design.means();
    let aligned: Vec<f64> = data
        .iter()
        .zip(design.positions())
        .map(|(o, &(_, i, j))| {
            let residual = o.response - m.ab[i][j];
            let effect = match term {
                Term::A => m.a[i] - m.grand,
                Term::B => m.b[j] - m.grand,
                Term::AxB => m.ab[i][j] - m.a[i] - m.b[j] + m.grand,
            };
            residual + effect
        })
        .collect();
    let ranks = midrank(&aligned)?;
    Ok(AlignedSet { target_term: term, aligned, ranks })
}

/// ART ANOVA: one aligned-and-ranked analysis per term, rows A, B, A×B.
pub fn art_anova(data: &[FactorialObservation]) -> Result<Vec<AnovaRow>, StatsError> {
    Term::ALL
        .iter()
        .map(|&term| {
            let set = align_for_effect(data, term)?;
            let rows = rm_anova(&AlignedSet::with_responses(data, &set.ranks))?;
            Ok(*AnovaRow::for_term(&rows, term).expect("rm_anova reports every term"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(f: impl Fn(usize, usize, usize) -> f64) -> Vec<FactorialObservation> {
        let mut out = Vec::new();
        for s in 0..4 {
            for a in 0..3 {
                for b in 0..2 {
                    out.push(FactorialObservation::new(format!("s{s}"), format!("a{a}"), format!("b{b}"), f(s, a, b)));
                }
            }
        }
        out
    }

    #[test]
    fn constant_data_aligns_to_zero() {
        let data = grid(|_, _, _| 3.0);
        for term in Term::ALL {
            let set = align_for_effect(&data, term).unwrap();
            assert!(set.aligned.iter().all(|&x| x == 0.0));
            let tie = (data.len() as f64 + 1.0) / 2.0;
            assert!(set.ranks.iter().all(|&r| r == tie));
        }
        for row in art_anova(&data).unwrap() {
            assert_eq!(row.p_value, 1.0);
        }
    }

    #[test]
    fn aligned_values_are_centered() {
        let data = grid(|s, a, b| ((s * 7 + a * 3 + b) as f64 * 1.3).sin() * 4.0 + a as f64);
        for term in Term::ALL {
            let set = align_for_effect(&data, term).unwrap();
            assert!(set.aligned.iter().sum::<f64>().abs() < 1e-9);
            assert_eq!(set.aligned.len(), data.len());
        }
    }

    #[test]
    fn unbalanced_input_is_rejected() {
        let mut data = grid(|_, _, _| 1.0);
        data.pop();
        assert!(matches!(align_for_effect(&data, Term::A), Err(StatsError::Unbalanced(_))));
        assert!(art_anova(&data).is_err());
    }

    #[test]
    fn input_order_does_not_matter() {
        let data = grid(|s, a, b| ((s * 5 + a * 11 + b * 3) as f64).cos() + 0.5 * a as f64);
        let mut reversed = data.clone();
        reversed.reverse();
        assert_eq!(art_anova(&data).unwrap(), art_anova(&reversed).unwrap());
    }
}

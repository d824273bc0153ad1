//! Two-way repeated-measures ANOVA with one observation per subject × cell.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use super::{f_sf, AnovaRow, FactorialObservation, StatsError, Term};

/// Effect and error sums below this fraction of the total sum of squares are
/// treated as exact zeros.
const ZERO_SS_REL: f64 = 1e-12;

/// Balanced subjects × A × B layout of a set of observations.
#[derive(Debug, Clone)]
pub struct Design {
    pub subjects: Vec<String>,
    pub levels_a: Vec<String>,
    pub levels_b: Vec<String>,
    /// `cells[s][i][j]` is the response of subject s at A level i, B level j.
    cells: Vec<Vec<Vec<f64>>>,
    /// Flat index into `cells` for every input observation, in input order.
    positions: Vec<(usize, usize, usize)>,
}

fn level_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

fn sorted_levels<'a>(values: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut levels: Vec<String> = values.collect::<BTreeSet<_>>().into_iter().map(String::from).collect();
    levels.sort_by(|a, b| level_order(a, b));
    levels
}

impl Design {
    pub fn new(data: &[FactorialObservation]) -> Result<Self, StatsError> {
        if data.is_empty() {
            return Err(StatsError::Empty);
        }
        if let Some(o) = data.iter().find(|o| !o.response.is_finite()) {
            return Err(StatsError::NonFinite(o.response));
        }
        let subjects = sorted_levels(data.iter().map(|o| o.subject.as_str()));
        let levels_a = sorted_levels(data.iter().map(|o| o.level_a.as_str()));
        let levels_b = sorted_levels(data.iter().map(|o| o.level_b.as_str()));
        let index = |levels: &[String]| -> HashMap<String, usize> {
            levels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect()
        };
        let (si, ai, bi) = (index(&subjects), index(&levels_a), index(&levels_b));

        let mut cells = vec![vec![vec![None; levels_b.len()]; levels_a.len()]; subjects.len()];
        let mut positions = Vec::with_capacity(data.len());
        for o in data {
            let pos = (si[&o.subject], ai[&o.level_a], bi[&o.level_b]);
            let slot = &mut cells[pos.0][pos.1][pos.2];
            if slot.is_some() {
                return Err(StatsError::DuplicateCell(format!("{}/{}/{}", o.subject, o.level_a, o.level_b)));
            }
            *slot = Some(o.response);
            positions.push(pos);
        }

        let mut missing = Vec::new();
        for (s, subject) in subjects.iter().enumerate() {
            for (i, a) in levels_a.iter().enumerate() {
                for (j, b) in levels_b.iter().enumerate() {
                    if cells[s][i][j].is_none() {
                        missing.push(format!("{subject}/{a}/{b}"));
                    }
                }
            }
        }
        if !missing.is_empty() {
            return Err(StatsError::Unbalanced(missing.join(", ")));
        }
        let cells = cells
            .into_iter()
            .map(|rows| rows.into_iter().map(|row| row.into_iter().map(Option::unwrap).collect()).collect())
            .collect();
        Ok(Design { subjects, levels_a, levels_b, cells, positions })
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn value(&self, s: usize, i: usize, j: usize) -> f64 {
        self.cells[s][i][j]
    }

    /// Cell location of each input observation, in input order.
    pub fn positions(&self) -> &[(usize, usize, usize)] {
        &self.positions
    }

    pub fn means(&self) -> Means {
        let (n, a, b) = (self.subjects.len(), self.levels_a.len(), self.levels_b.len());
        let mut m = Means {
            grand: 0.0,
            a: vec![0.0; a],
            b: vec![0.0; b],
            s: vec![0.0; n],
            ab: vec![vec![0.0; b]; a],
            as_: vec![vec![0.0; n]; a],
            bs: vec![vec![0.0; n]; b],
        };
        for s in 0..n {
            for i in 0..a {
                for j in 0..b {
                    let y = self.cells[s][i][j];
                    m.grand += y;
                    m.a[i] += y;
                    m.b[j] += y;
                    m.s[s] += y;
                    m.ab[i][j] += y;
                    m.as_[i][s] += y;
                    m.bs[j][s] += y;
                }
            }
        }
        let (nf, af, bf) = (n as f64, a as f64, b as f64);
        m.grand /= nf * af * bf;
        m.a.iter_mut().for_each(|x| *x /= nf * bf);
        m.b.iter_mut().for_each(|x| *x /= nf * af);
        m.s.iter_mut().for_each(|x| *x /= af * bf);
        m.ab.iter_mut().flatten().for_each(|x| *x /= nf);
        m.as_.iter_mut().flatten().for_each(|x| *x /= bf);
        m.bs.iter_mut().flatten().for_each(|x| *x /= af);
        m
    }
}

/// Marginal and cell means of a [`Design`].
#[derive(Debug, Clone)]
pub struct Means {
    pub grand: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub s: Vec<f64>,
    pub ab: Vec<Vec<f64>>,
    pub as_: Vec<Vec<f64>>,
    pub bs: Vec<Vec<f64>>,
}

/// Within-subject ANOVA: each term is tested against its interaction with
/// subjects. Rows are returned in the order A, B, A×B.
pub fn rm_anova(data: &[FactorialObservation]) -> Result<Vec<AnovaRow>, StatsError> {
    let design = Design::new(data)?;
    let (n, a, b) = (design.subjects.len(), design.levels_a.len(), design.levels_b.len());
    if n < 2 {
        return Err(StatsError::TooFew { what: "subjects", needed: 2, got: n });
    }
    if a < 2 {
        return Err(StatsError::TooFew { what: "levels of factor A", needed: 2, got: a });
    }
    if b < 2 {
        return Err(StatsError::TooFew { what: "levels of factor B", needed: 2, got: b });
    }
    let m = design.means();

    let (mut ss_total, mut ss_a, mut ss_b, mut ss_ab) = (0.0, 0.0, 0.0, 0.0);
    let (mut ss_as, mut ss_bs, mut ss_abs) = (0.0, 0.0, 0.0);
    for s in 0..n {
        for i in 0..a {
            for j in 0..b {
                let y = design.value(s, i, j);
                ss_total += (y - m.grand).powi(2);
                let resid = y - m.ab[i][j] - m.as_[i][s] - m.bs[j][s] + m.a[i] + m.b[j] + m.s[s] - m.grand;
                ss_abs += resid * resid;
            }
        }
    }
    for i in 0..a {
        ss_a += (m.a[i] - m.grand).powi(2);
        for j in 0..b {
            ss_ab += (m.ab[i][j] - m.a[i] - m.b[j] + m.grand).powi(2);
        }
        for s in 0..n {
            ss_as += (m.as_[i][s] - m.a[i] - m.s[s] + m.grand).powi(2);
        }
    }
    for j in 0..b {
        ss_b += (m.b[j] - m.grand).powi(2);
        for s in 0..n {
            ss_bs += (m.bs[j][s] - m.b[j] - m.s[s] + m.grand).powi(2);
        }
    }
    let (nf, af, bf) = (n as f64, a as f64, b as f64);
    ss_a *= nf * bf;
    ss_b *= nf * af;
    ss_ab *= nf;
    ss_as *= bf;
    ss_bs *= af;

    let zero = ZERO_SS_REL * ss_total;
    let df_a = a - 1;
    let df_b = b - 1;
    let df_ab = df_a * df_b;
    let df_s = n - 1;
    Ok(vec![
        f_row(Term::A, ss_a, df_a, ss_as, df_a * df_s, zero)?,
        f_row(Term::B, ss_b, df_b, ss_bs, df_b * df_s, zero)?,
        f_row(Term::AxB, ss_ab, df_ab, ss_abs, df_ab * df_s, zero)?,
    ])
}

fn f_row(term: Term, ss: f64, df_num: usize, ss_err: f64, df_den: usize, zero: f64) -> Result<AnovaRow, StatsError> {
    let effect_zero = ss <= zero;
    let error_zero = ss_err <= zero;
    let (f_stat, p_value) = match (effect_zero, error_zero) {
        (true, _) => (0.0, 1.0),
        (false, true) => (f64::INFINITY, 0.0),
        (false, false) => {
            let f = (ss / df_num as f64) / (ss_err / df_den as f64);
            (f, f_sf(f, df_num as f64, df_den as f64)?)
        }
    };
    Ok(AnovaRow { term, df_num, df_den, f_stat, p_value })
}

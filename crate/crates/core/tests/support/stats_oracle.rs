//! Independent reference computations for the statistics tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::beta::ln_beta;
use tactile_core::stats::FactorialObservation;

/// y[s][a][b] as observations with levels named by index.
pub fn to_obs(y: &[Vec<Vec<f64>>]) -> Vec<FactorialObservation> {
    let mut out = Vec::new();
    for (s, rows) in y.iter().enumerate() {
        for (a, cols) in rows.iter().enumerate() {
            for (b, v) in cols.iter().enumerate() {
                out.push(FactorialObservation::new(format!("s{s}"), format!("{}", a + 1), format!("{}", b + 1), *v));
            }
        }
    }
    out
}

/// Two-way within-subject ANOVA from raw totals, returned as (df1, df2, F) per term.
pub fn totals_oracle(y: &[Vec<Vec<f64>>]) -> [(usize, usize, f64); 3] {
    let n = y.len();
    let a = y[0].len();
    let b = y[0][0].len();
    let big_n = (n * a * b) as f64;
    let g: f64 = y.iter().flatten().flatten().sum();
    let cf = g * g / big_n;
    let sq = |x: f64| x * x;
    let mut ss_total = -cf;
    let (mut ta, mut tb, mut ts) = (vec![0.0; a], vec![0.0; b], vec![0.0; n]);
    let mut tab = vec![vec![0.0; b]; a];
    let mut tas = vec![vec![0.0; n]; a];
    let mut tbs = vec![vec![0.0; n]; b];
    for s in 0..n {
        for i in 0..a {
            for j in 0..b {
                let v = y[s][i][j];
                ss_total += v * v;
                ta[i] += v;
                tb[j] += v;
                ts[s] += v;
                tab[i][j] += v;
                tas[i][s] += v;
                tbs[j][s] += v;
            }
        }
    }
    let ss = |t: &[f64], k: usize| t.iter().map(|x| sq(*x)).sum::<f64>() / k as f64 - cf;
    let ss_a = ss(&ta, n * b);
    let ss_b = ss(&tb, n * a);
    let ss_s = ss(&ts, a * b);
    let ss_ab = ss(&tab.concat(), n) - ss_a - ss_b;
    let ss_as = ss(&tas.concat(), b) - ss_a - ss_s;
    let ss_bs = ss(&tbs.concat(), a) - ss_b - ss_s;
    let ss_abs = ss_total - ss_a - ss_b - ss_s - ss_ab - ss_as - ss_bs;
    let (da, db, dn) = (a - 1, b - 1, n - 1);
    let f = |num: f64, dnum: usize, den: f64, dden: usize| (num / dnum as f64) / (den / dden as f64);
    [
        (da, da * dn, f(ss_a, da, ss_as, da * dn)),
        (db, db * dn, f(ss_b, db, ss_bs, db * dn)),
        (da * db, da * db * dn, f(ss_ab, da * db, ss_abs, da * db * dn)),
    ]
}

pub fn random_design(n: usize, a: usize, b: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|s| {
            (0..a)
                .map(|i| (0..b).map(|j| s as f64 * 0.3 + i as f64 * 0.7 - j as f64 * 0.4 + rng.random_range(-1.0..1.0)).collect())
                .collect()
        })
        .collect()
}

pub fn fixtures() -> Vec<Vec<Vec<Vec<f64>>>> {
    vec![
        vec![
            vec![vec![3.0, 5.0], vec![4.0, 8.0]],
            vec![vec![2.0, 4.0], vec![6.0, 7.0]],
        ],
        vec![
            vec![vec![1.0, 2.0], vec![3.0, 2.0]],
            vec![vec![2.0, 2.0], vec![4.0, 5.0]],
            vec![vec![1.0, 3.0], vec![5.0, 4.0]],
        ],
        vec![
            vec![vec![1.0, 2.0, 4.0], vec![2.0, 3.0, 3.0], vec![5.0, 4.0, 5.0]],
            vec![vec![2.0, 2.0, 3.0], vec![3.0, 3.0, 4.0], vec![4.0, 5.0, 5.0]],
            vec![vec![1.0, 1.0, 2.0], vec![2.0, 4.0, 3.0], vec![4.0, 4.0, 5.0]],
            vec![vec![2.0, 3.0, 2.0], vec![3.0, 2.0, 4.0], vec![5.0, 5.0, 4.0]],
        ],
        random_design(6, 3, 3, 11),
        random_design(5, 2, 4, 12),
        random_design(8, 4, 2, 13),
    ]
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b.abs().max(1e-300)).abs()
    }
}


pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
            left + right + (left + right - whole) / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, eps, depth)
}

/// CDF of F(d1, d2) by quadrature of its density, substituting x = u² to tame the origin.
pub fn quadrature_cdf(x: f64, d1: f64, d2: f64) -> f64 {
    let ln_norm = 0.5 * d1 * (d1 / d2).ln() - ln_beta(d1 / 2.0, d2 / 2.0);
    let density = move |t: f64| (ln_norm + (0.5 * d1 - 1.0) * t.ln() - 0.5 * (d1 + d2) * (1.0 + d1 * t / d2).ln()).exp();
    // limit of 2u·f(u²) at u = 0 is 2·norm for d1 = 1 and 0 above
    let at_zero = if d1 == 1.0 { 2.0 * ln_norm.exp() } else { 0.0 };
    let integrand = move |u: f64| if u == 0.0 { at_zero } else { 2.0 * u * density(u * u) };
    adaptive_simpson(&integrand, 0.0, x.sqrt(), 1e-13, 50)
}


/// The twenty (x, df1, df2) points checked against quadrature.
pub const CDF_POINTS: [(f64, f64, f64); 20] = [
    (0.1, 1.0, 1.0), (0.5, 1.0, 5.0), (1.0, 1.0, 10.0), (3.0, 1.0, 30.0), (0.2, 2.0, 2.0),
    (1.5, 2.0, 10.0), (4.0, 2.0, 20.0), (0.7, 3.0, 7.0), (2.5, 3.0, 12.0), (6.0, 3.0, 40.0),
    (0.9, 4.0, 4.0), (1.2, 4.0, 16.0), (3.3, 5.0, 9.0), (0.4, 6.0, 18.0), (2.0, 8.0, 8.0),
    (1.1, 10.0, 30.0), (5.0, 2.0, 5.0), (0.05, 7.0, 3.0), (9.0, 1.0, 2.0), (2.2, 12.0, 24.0),
];

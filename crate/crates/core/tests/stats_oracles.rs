mod support {
    pub mod stats_oracle;
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use support::stats_oracle::*;
use tactile_core::stats::*;

#[test]
fn rm_anova_matches_totals_oracle() {
    for y in fixtures() {
        let rows = rm_anova(&to_obs(&y)).unwrap();
        for (row, (df1, df2, f)) in rows.iter().zip(totals_oracle(&y)) {
            assert_eq!((row.df_num, row.df_den), (df1, df2));
            assert!(rel(row.f_stat, f) < 1e-9, "{:?}: {} vs {f}", row.term, row.f_stat);
            let p = 1.0 - FisherSnedecor::new(df1 as f64, df2 as f64).unwrap().cdf(f);
            assert!((row.p_value - p).abs() < 1e-8, "{:?}: p {} vs {p}", row.term, row.p_value);
        }
    }
}

#[test]
fn alignment_strips_other_effects() {
    for y in fixtures() {
        let data = to_obs(&y);
        for term in Term::ALL {
            let set = align_for_effect(&data, term).unwrap();
            let rows = rm_anova(&AlignedSet::with_responses(&data, &set.aligned)).unwrap();
            for other in Term::ALL.iter().filter(|t| **t != term) {
                let f = AnovaRow::for_term(&rows, *other).unwrap().f_stat;
                assert!(f.abs() < 1e-8, "aligned for {term:?}, {other:?} F = {f}");
            }
        }
    }
}

#[test]
fn pure_voltage_effect_dominates() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let y: Vec<Vec<Vec<f64>>> = (0..6)
        .map(|_| (0..3).map(|i| (0..3).map(|_| i as f64 + rng.random_range(-1e-3..1e-3)).collect()).collect())
        .collect();
    let rows = art_anova(&to_obs(&y)).unwrap();
    let (a, b, ab) = (rows[0], rows[1], rows[2]);
    // ranks bound F, so the voltage row is judged against the other two
    assert!(a.f_stat > 100.0 && a.p_value < 1e-6, "{a:?}");
    for row in [b, ab] {
        assert!(row.f_stat < 0.05 * a.f_stat && row.p_value > 1e-3, "{row:?}");
    }
}

#[test]
fn monotone_transform_leaves_art_unchanged() {
    let constant = vec![vec![vec![2.0; 3]; 3]; 4];
    let only_a: Vec<_> = (0..4).map(|_| (0..3).map(|i| vec![0.5 * i as f64; 3]).collect()).collect();
    let only_b: Vec<_> = (0..4).map(|_| vec![vec![1.0, 3.0, 2.0]; 3]).collect();
    for y in [constant, only_a, only_b] {
        let data = to_obs(&y);
        let exp: Vec<_> = data.iter().map(|o| FactorialObservation { response: o.response.exp(), ..o.clone() }).collect();
        let (r1, r2) = (art_anova(&data).unwrap(), art_anova(&exp).unwrap());
        for (x, z) in r1.iter().zip(&r2) {
            assert!(rel(z.f_stat, x.f_stat) < 1e-9 || (x.f_stat.is_infinite() && z.f_stat.is_infinite()));
        }
    }
}

#[test]
fn f_cdf_matches_quadrature_and_statrs() {
    for (x, d1, d2) in CDF_POINTS {
        let ours = f_cdf(x, d1, d2).unwrap();
        let quad = quadrature_cdf(x, d1, d2);
        let reference = FisherSnedecor::new(d1, d2).unwrap().cdf(x);
        assert!((ours - quad).abs() < 1e-8, "F({d1},{d2}) at {x}: {ours} vs quadrature {quad}");
        assert!((ours - reference).abs() < 1e-10, "F({d1},{d2}) at {x}: {ours} vs {reference}");
        assert!((ours + f_sf(x, d1, d2).unwrap() - 1.0).abs() < 1e-12);
    }
}

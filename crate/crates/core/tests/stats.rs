mod common;

use common::oracle;
use layout_stability::stats::{average_ranks, binomial_upper_tail, pearson, quantile_sorted, spearman};
use layout_stability::study::binary_test;
use proptest::prelude::*;

#[test]
fn binomial_tail_is_exact_for_small_m() {
    for m in 1..=30 {
        for n in 0..=m + 1 {
            let (got, want) = (binomial_upper_tail(m, n), oracle::binomial_tail(m, n));
            assert!((got - want).abs() <= 1e-12, "m={m} n={n}: {got} vs {want}");
        }
    }
    assert_eq!(binomial_upper_tail(10, 10), 2f64.powi(-10));
}

#[test]
fn binomial_tail_continues_smoothly_in_log_space() {
    // both sides of the exact/log-space switch against the oracle
    for m in [100, 120, 121, 150, 200] {
        for n in [0, m / 3, m / 2, m / 2 + 7, 2 * m / 3, m] {
            let (got, want) = (binomial_upper_tail(m, n), oracle::binomial_tail(m, n));
            assert!((got - want).abs() <= 1e-12 + 1e-9 * want, "m={m} n={n}: {got} vs {want}");
        }
    }
}

proptest! {
    #[test]
    fn p_value_decreases_with_successes(m in 1u64..300) {
        let mut last = 2.0;
        for n in 0..=m {
            let p = binomial_upper_tail(m, n);
            prop_assert!(p <= last && (0.0..=1.0).contains(&p));
            last = p;
        }
        prop_assert_eq!(binomial_upper_tail(m, 0), 1.0);
    }

    #[test]
    fn sign_test_counts_strict_improvements(pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..40)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().cloned().unzip();
        let r = binary_test(&a, &b).unwrap();
        let n = pairs.iter().filter(|(x, y)| y > x).count() as u64;
        prop_assert_eq!((r.n_trials, r.n_successes), (pairs.len() as u64, n));
        prop_assert_eq!(r.p_value, binomial_upper_tail(r.n_trials, n));
    }

    #[test]
    fn quantiles_are_ordered(mut v in prop::collection::vec(-1e3f64..1e3, 1..60)) {
        v.sort_by(f64::total_cmp);
        let q: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&p| quantile_sorted(&v, p)).collect();
        prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(q[0], v[0]);
        prop_assert_eq!(q[4], *v.last().unwrap());
    }

    #[test]
    fn correlations_match_textbook(xy in prop::collection::vec((-5i32..5, -5.0f64..5.0), 3..30)) {
        // integer x values produce ties
        let x: Vec<f64> = xy.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = xy.iter().map(|p| p.1).collect();
        prop_assert_eq!(average_ranks(&x), oracle::average_ranks(&x));
        if let Some(r) = pearson(&x, &y) {
            prop_assert!((r - oracle::pearson(&x, &y)).abs() < 1e-12);
            prop_assert!((spearman(&x, &y).unwrap() - oracle::spearman(&x, &y)).abs() < 1e-12);
        }
    }
}

#[test]
fn correlation_of_constant_vector_is_undefined() {
    assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
}

#[test]
fn tail_probabilities_frozen_from_oracle() {
    for (m, n, p) in [(10, 5, 0.623046875), (30, 15, 0.572232), (25, 20, 0.002039)] {
        let want = oracle::binomial_tail(m, n);
        assert!((want - p).abs() < 5e-7, "oracle m={m} n={n}: {want}");
        assert!((binomial_upper_tail(m, n) - want).abs() < 1e-12);
    }
}

#[test]
fn quantiles_match_sort_based_oracle() {
    use rand::Rng;
    let mut rng = common::rng(524);
    let mut v: Vec<f64> = (0..200).map(|_| rng.random_range(-100.0..100.0)).collect();
    v.sort_by(f64::total_cmp);
    for p in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999, 1.0] {
        // linear interpolation at h = (n - 1) p
        let h = (v.len() - 1) as f64 * p;
        let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
        let want = v[lo] + (h - lo as f64) * (v[hi] - v[lo]);
        assert!((quantile_sorted(&v, p) - want).abs() < 1e-12, "p={p}");
    }
}

#[test]
fn correlation_matrix_matches_pearson_oracle() {
    use layout_stability::simmetrics::{PairInfo, SimilarityRecord};
    use layout_stability::study::{correlation_columns, metric_correlation_matrix};
    use rand::Rng;
    let mut rng = common::rng(506);
    let records: Vec<SimilarityRecord> = (0..100)
        .map(|i| {
            let base: f64 = rng.random();
            let mut v = || (base + 0.5 * rng.random::<f64>()).min(1.0);
            SimilarityRecord {
                pair: PairInfo {
                    pair_id: format!("p{i:03}"),
                    corpus: "c".into(),
                    ..Default::default()
                },
                alpha_t: Some(v()),
                alpha_c: Some(v()),
                alpha_mm: Some(v()),
                alpha_mf: Some(v()),
                alpha_lc: Some(v()),
                alpha_lp: Some(v()),
                beta_pc: Some(v()),
                beta_sc: Some(v()),
                beta_co: Some(v()),
                gamma_dc: Some(v()),
                gamma_sc_abs_diff: Some(v()),
                theta_pa: Some(v()),
                ..Default::default()
            }
            .with_aggregates()
        })
        .collect();
    let m = metric_correlation_matrix(&records, 3000, 0).unwrap();
    assert_eq!(m.sample_size, 100);
    let cols = correlation_columns();
    for (i, ci) in cols.iter().enumerate() {
        for (j, cj) in cols.iter().enumerate() {
            let x: Vec<f64> = records.iter().map(|r| r.metric(ci).unwrap()).collect();
            let y: Vec<f64> = records.iter().map(|r| r.metric(cj).unwrap()).collect();
            assert!((m.values[i][j].unwrap() - oracle::pearson(&x, &y)).abs() < 1e-12);
        }
    }
}

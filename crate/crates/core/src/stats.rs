//! Small statistics helpers shared by the metrics and the study runner.

/// Pearson correlation, or `None` when either vector has zero variance.
///
/// Computed as `sxy / sqrt(sxx * syy)` so that a vector correlated with
/// itself yields exactly 1.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson: length mismatch");
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average-rank ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Quantile of already sorted data by linear interpolation between order
/// statistics (the inclusive method).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// `P(X ≥ n)` for `X ~ Binomial(m, 1/2)`.
pub fn binomial_upper_tail(m: u64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n > m {
        return 0.0;
    }
    if m <= 120 {
        // exact Pascal row; C(120, 60) < 2^127
        let mut row = vec![1u128; 1];
        for _ in 0..m {
            let mut next = vec![1u128; row.len() + 1];
            for j in 1..row.len() {
                next[j] = row[j - 1] + row[j];
            }
            row = next;
        }
        let tail: u128 = row[n as usize..].iter().sum();
        return tail as f64 / 2f64.powi(m as i32);
    }
    let ln_half_m = -(m as f64) * std::f64::consts::LN_2;
    let mut ln_c = 0.0;
    for j in 1..=n {
        ln_c += ((m - j + 1) as f64 / j as f64).ln();
    }
    let mut tail = 0.0;
    for j in n..=m {
        if j > n {
            ln_c += ((m - j + 1) as f64 / j as f64).ln();
        }
        tail += (ln_c + ln_half_m).exp();
    }
    tail.min(1.0)
}

//! Neighbourhood-rank metrics.

use std::collections::HashMap;

use crate::embed::DissimilarityMatrix;
use crate::error::{Error, Result};

use super::COMPONENT;

/// Nearest-neighbour ranks of every point. Equal distances are ordered by
/// index, smaller index nearer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankStructure {
    n: usize,
    k: usize,
    knn: Vec<Vec<usize>>,
    /// Row-major N × N; `ranks[i * n + j]` is 1 for the nearest neighbour
    /// of `i`, 0 on the diagonal.
    ranks: Vec<u32>,
}

impl RankStructure {
    pub fn new(diss: &DissimilarityMatrix, k: usize) -> Result<Self> {
        let n = diss.len();
        if k == 0 || k >= n {
            return Err(Error::input(
                COMPONENT,
                format!("neighbourhood size k = {k} must satisfy 1 <= k < N = {n}"),
            ));
        }
        let mut knn = Vec::with_capacity(n);
        let mut ranks = vec![0u32; n * n];
        let mut order: Vec<usize> = Vec::with_capacity(n - 1);
        for i in 0..n {
            order.clear();
            order.extend((0..n).filter(|&j| j != i));
            order.sort_by(|&a, &b| diss.get(i, a).total_cmp(&diss.get(i, b)).then(a.cmp(&b)));
            for (r, &j) in order.iter().enumerate() {
                ranks[i * n + j] = r as u32 + 1;
            }
            knn.push(order[..k].to_vec());
        }
        Ok(Self { n, k, knn, ranks })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The `k` nearest neighbours of `i`, nearest first.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.knn[i]
    }

    /// Position of `j` in the distance ordering of `i` (1 = nearest).
    pub fn rank(&self, i: usize, j: usize) -> usize {
        self.ranks[i * self.n + j] as usize
    }

    fn is_neighbor(&self, i: usize, j: usize) -> bool {
        i != j && self.rank(i, j) <= self.k
    }
}

fn check_pair(a: &RankStructure, b: &RankStructure) -> Result<()> {
    if a.n != b.n || a.k != b.k {
        return Err(Error::input(
            COMPONENT,
            format!(
                "rank structures differ: N {} vs {}, k {} vs {}",
                a.n, b.n, a.k, b.k
            ),
        ));
    }
    Ok(())
}

/// Rank penalty of points that are neighbours in `other` but not in
/// `reference`, weighted by their rank in `reference`.
fn intrusion_penalty(reference: &RankStructure, other: &RankStructure) -> f64 {
    let k = reference.k;
    let mut total = 0usize;
    for i in 0..reference.n {
        for &j in other.neighbors(i) {
            if !reference.is_neighbor(i, j) {
                total += reference.rank(i, j) - k;
            }
        }
    }
    total as f64
}

/// Largest possible intrusion penalty: the `min(k, N−1−k)` worst-ranked
/// points intrude for every `i`. For `2k < N` this equals
/// `N k (2N − 3k − 1) / 2`.
fn intrusion_bound(n: usize, k: usize) -> f64 {
    let u = k.min(n - 1 - k);
    let per_point: usize = (n - u..n).map(|r| r - k).sum();
    (n * per_point) as f64
}

/// Trustworthiness and continuity of `b` with respect to `a`.
pub fn trustworthiness_continuity(a: &RankStructure, b: &RankStructure) -> Result<(f64, f64)> {
    check_pair(a, b)?;
    let bound = intrusion_bound(a.n, a.k);
    if bound == 0.0 {
        return Ok((1.0, 1.0));
    }
    let t = 1.0 - intrusion_penalty(a, b) / bound;
    let c = 1.0 - intrusion_penalty(b, a) / bound;
    Ok((t, c))
}

/// Mean relative rank errors `(α_MM, α_MF)`, reported as `1 − E` so that 1
/// is optimal. Normalized by `N Σ_{l=1..k} |N − 2l + 1| / l` and clamped
/// at 0.
pub fn mrre(a: &RankStructure, b: &RankStructure) -> Result<(f64, f64)> {
    check_pair(a, b)?;
    let (n, k) = (a.n, a.k);
    let norm = n as f64
        * (1..=k)
            .map(|l| (n as f64 - 2.0 * l as f64 + 1.0).abs() / l as f64)
            .sum::<f64>();
    let mut missing = 0.0;
    let mut false_ = 0.0;
    for i in 0..n {
        for &j in a.neighbors(i) {
            let (ra, rb) = (a.rank(i, j) as f64, b.rank(i, j) as f64);
            missing += (ra - rb).abs() / ra;
        }
        for &j in b.neighbors(i) {
            let (ra, rb) = (a.rank(i, j) as f64, b.rank(i, j) as f64);
            false_ += (ra - rb).abs() / rb;
        }
    }
    Ok((
        (1.0 - missing / norm).max(0.0),
        (1.0 - false_ / norm).max(0.0),
    ))
}

/// Mean fraction of shared k-nearest neighbours.
pub fn lcmc(a: &RankStructure, b: &RankStructure) -> Result<f64> {
    check_pair(a, b)?;
    let shared: usize = (0..a.n)
        .map(|i| a.neighbors(i).iter().filter(|&&j| b.is_neighbor(i, j)).count())
        .sum();
    Ok(shared as f64 / (a.n * a.k) as f64)
}

/// LCMC with the expected overlap of random neighbourhoods, `k / (N − 1)`,
/// subtracted. Not part of the records; kept for comparison with the
/// classical definition.
pub fn lcmc_adjusted(a: &RankStructure, b: &RankStructure) -> Result<f64> {
    Ok(lcmc(a, b)? - a.k as f64 / (a.n - 1) as f64)
}

/// Mean fraction of neighbour labels shared as multisets (per-label minimum
/// counts).
pub fn label_preservation(a: &RankStructure, b: &RankStructure, labels: &[String]) -> Result<f64> {
    check_pair(a, b)?;
    if labels.len() != a.n {
        return Err(Error::input(
            COMPONENT,
            format!("{} labels for {} points", labels.len(), a.n),
        ));
    }
    let mut total = 0usize;
    let mut counts: HashMap<&str, isize> = HashMap::new();
    for i in 0..a.n {
        counts.clear();
        for &j in a.neighbors(i) {
            *counts.entry(labels[j].as_str()).or_default() += 1;
        }
        for &j in b.neighbors(i) {
            if let Some(c) = counts.get_mut(labels[j].as_str()) {
                if *c > 0 {
                    *c -= 1;
                    total += 1;
                }
            }
        }
    }
    Ok(total as f64 / (a.n * a.k) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn line(xs: &[f64]) -> DissimilarityMatrix {
        let n = xs.len();
        DissimilarityMatrix::new(DMatrix::from_fn(n, n, |i, j| (xs[i] - xs[j]).abs())).unwrap()
    }

    #[test]
    fn collinear_order() {
        let r = RankStructure::new(&line(&[0.0, 1.0, 3.0]), 1).unwrap();
        assert_eq!(r.rank(1, 0), 1);
        assert_eq!(r.rank(1, 2), 2);
        assert_eq!(r.neighbors(1), &[0]);
    }

    #[test]
    fn ties_prefer_smaller_index() {
        // points 2 and 5 are both at distance 1 from point 0
        let r = RankStructure::new(&line(&[0.0, 5.0, 1.0, 7.0, 9.0, -1.0]), 2).unwrap();
        assert_eq!(r.neighbors(0), &[2, 5]);
    }

    #[test]
    fn k_must_be_below_n() {
        assert!(RankStructure::new(&line(&[0.0, 1.0]), 2).unwrap_err().is_input());
    }

    #[test]
    fn identity_is_optimal() {
        let r = RankStructure::new(&line(&[0.0, 1.5, 3.0, 3.2, 8.0, 9.0, 12.0]), 2).unwrap();
        let labels: Vec<String> = "aabbbcc".chars().map(String::from).collect();
        assert_eq!(trustworthiness_continuity(&r, &r).unwrap(), (1.0, 1.0));
        assert_eq!(mrre(&r, &r).unwrap(), (1.0, 1.0));
        assert_eq!(lcmc(&r, &r).unwrap(), 1.0);
        assert_eq!(label_preservation(&r, &r, &labels).unwrap(), 1.0);
    }

    #[test]
    fn adjusted_lcmc_subtracts_random_overlap() {
        let r = RankStructure::new(&line(&[0.0, 1.0, 3.0, 7.0, 15.0]), 2).unwrap();
        assert_eq!(lcmc_adjusted(&r, &r).unwrap(), 1.0 - 2.0 / 4.0);
    }

    #[test]
    fn bound_matches_closed_form() {
        for n in 3..30 {
            for k in 1..n {
                if 2 * k < n {
                    let closed = (n * k * (2 * n - 3 * k - 1)) as f64 / 2.0;
                    assert_eq!(intrusion_bound(n, k), closed, "n={n} k={k}");
                }
            }
        }
    }
}

//! Truncated SVD by orthogonal (subspace) power iteration.
//!
//! A fixed iteration count and oversampling are used instead of an adaptive
//! stopping rule so the result is a pure function of the input.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::SparseMatrix;
use crate::rng;

pub const OVERSAMPLING: usize = 4;
pub const POWER_ITERATIONS: usize = 50;
const SEED: u64 = 0x5eed_0f15;

/// Rank-`k` factors `M ≈ U diag(s) Vᵀ`, singular values descending.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub vt: DMatrix<f64>,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (c, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(c).scale_mut(s);
        }
        us * &self.vt
    }
}

/// Modified Gram–Schmidt, run twice. Columns that collapse numerically are
/// replaced by fresh random directions orthogonal to the previous ones.
fn orthonormalize(q: &mut DMatrix<f64>, rng: &mut rng::Rng) {
    let (rows, cols) = q.shape();
    for c in 0..cols {
        let mut attempts = 0;
        loop {
            let original = q.column(c).norm();
            for _ in 0..2 {
                for p in 0..c {
                    let proj = q.column(p).dot(&q.column(c));
                    let prev = q.column(p).clone_owned();
                    q.column_mut(c).axpy(-proj, &prev, 1.0);
                }
            }
            let norm = q.column(c).norm();
            if norm > 1e-10 * original.max(f64::MIN_POSITIVE) && norm > 1e-300 {
                q.column_mut(c).scale_mut(1.0 / norm);
                break;
            }
            attempts += 1;
            assert!(attempts < 100, "cannot extend orthonormal basis");
            for r in 0..rows {
                q[(r, c)] = StandardNormal.sample(rng);
            }
        }
    }
}

/// Top-`k` singular triplets of `m`. Requires `1 <= k <= min(N, n)`.
pub fn truncated_svd(m: &SparseMatrix, k: usize) -> TruncatedSvd {
    let (n_rows, n_cols) = (m.n_rows(), m.n_cols());
    assert!(k >= 1 && k <= n_rows.min(n_cols));
    let width = (k + OVERSAMPLING).min(n_cols);
    let mut rng = rng::stream(SEED, 0);
    let mut q = DMatrix::from_fn(n_cols, width, |_, _| StandardNormal.sample(&mut rng));
    orthonormalize(&mut q, &mut rng);
    for _ in 0..POWER_ITERATIONS {
        let mq = m.mul_dense(&q);
        q = m.tr_mul_dense(&mq);
        orthonormalize(&mut q, &mut rng);
    }
    // Rayleigh–Ritz on the converged subspace: B = M Q = U S Wᵀ.
    let b = m.mul_dense(&q);
    let svd = b.svd(true, true);
    let (bu, bvt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let order = &order[..k];

    let mut u = DMatrix::zeros(n_rows, k);
    let mut vt = DMatrix::zeros(k, n_cols);
    let mut singular_values = Vec::with_capacity(k);
    for (c, &src) in order.iter().enumerate() {
        u.set_column(c, &bu.column(src));
        // right singular vector in the original space: Q w
        let v = &q * bvt.row(src).transpose();
        vt.set_row(c, &v.transpose());
        singular_values.push(svd.singular_values[src]);
        // sign convention: largest-magnitude topic weight is positive
        let pivot = (0..n_cols)
            .max_by(|&a, &b| vt[(c, a)].abs().total_cmp(&vt[(c, b)].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        if vt[(c, pivot)] < 0.0 {
            vt.row_mut(c).neg_mut();
            u.column_mut(c).neg_mut();
        }
    }
    TruncatedSvd {
        u,
        singular_values,
        vt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_rank_one() {
        let a = [1.0, 2.0, 0.5, 3.0];
        let b = [2.0, 0.0, 1.0];
        let dense = DMatrix::from_fn(4, 3, |i, j| a[i] * b[j]);
        let svd = truncated_svd(&SparseMatrix::from_dense(&dense), 1);
        let err = (svd.reconstruct() - &dense).norm();
        assert!(err <= 1e-8 * dense.norm(), "err {err}");
    }

    #[test]
    fn full_rank_is_exact() {
        let dense = DMatrix::from_row_slice(3, 5, &[
            1., 0., 2., 3., 0., 4., 1., 0., 0., 2., 0., 5., 1., 1., 1.,
        ]);
        let svd = truncated_svd(&SparseMatrix::from_dense(&dense), 3);
        let err = (svd.reconstruct() - &dense).norm();
        assert!(err <= 1e-6 * dense.norm());
        assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }
}

//! Frobenius-norm NMF with Lee–Seung multiplicative updates.

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::matrix::SparseMatrix;
use crate::rng;

/// Added to every update denominator.
pub const DENOMINATOR_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NmfFit {
    /// N × K document weights.
    pub w: DMatrix<f64>,
    /// K × n topic vectors.
    pub h: DMatrix<f64>,
    /// `‖M − WH‖_F` after initialization and after every iteration, when
    /// requested.
    pub objective_trace: Vec<f64>,
}

/// Exact `‖M − WH‖_F`, visiting every cell.
pub fn residual_norm(m: &SparseMatrix, w: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    let wh = w * h;
    let mut acc = 0.0;
    for i in 0..m.n_rows() {
        let row = m.row(i);
        let mut next = 0;
        for j in 0..m.n_cols() {
            let mij = if next < row.len() && row[next].0 == j {
                next += 1;
                row[next - 1].1
            } else {
                0.0
            };
            let r = mij - wh[(i, j)];
            acc += r * r;
        }
    }
    acc.sqrt()
}

/// Factorizes a non-negative `m` into `W (N×K) · H (K×n)`.
///
/// Both factors start uniform on (0, 1) from `seed`. H is updated before W
/// in each iteration.
pub fn nmf(m: &SparseMatrix, k: usize, max_iter: usize, seed: u64, track: bool) -> NmfFit {
    let (n_rows, n_cols) = (m.n_rows(), m.n_cols());
    let mut rng = rng::stream(seed, 0x4e4d46);
    let mut unit = || loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    };
    let mut w = DMatrix::from_fn(n_rows, k, |_, _| unit());
    let mut h = DMatrix::from_fn(k, n_cols, |_, _| unit());

    let mut objective_trace = Vec::new();
    if track {
        objective_trace.push(residual_norm(m, &w, &h));
    }
    for _ in 0..max_iter {
        // H <- H ∘ (Wᵀ M) / (Wᵀ W H)
        let wt_m = m.tr_mul_dense(&w).transpose();
        let wt_w_h = (w.transpose() * &w) * &h;
        h.zip_zip_apply(&wt_m, &wt_w_h, |hv, num, den| {
            *hv *= num / (den + DENOMINATOR_EPS);
        });
        // W <- W ∘ (M Hᵀ) / (W H Hᵀ)
        let m_ht = m.mul_dense(&h.transpose());
        let w_h_ht = &w * (&h * h.transpose());
        w.zip_zip_apply(&m_ht, &w_h_ht, |wv, num, den| {
            *wv *= num / (den + DENOMINATOR_EPS);
        });
        if track {
            objective_trace.push(residual_norm(m, &w, &h));
        }
    }
    NmfFit {
        w,
        h,
        objective_trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_stay_non_negative() {
        let dense = DMatrix::from_fn(7, 6, |i, j| ((i * 3 + j * 5) % 4) as f64);
        let fit = nmf(&SparseMatrix::from_dense(&dense), 3, 50, 1, false);
        assert!(fit.w.iter().chain(fit.h.iter()).all(|&v| v >= 0.0));
    }

    #[test]
    fn deterministic_for_seed() {
        let dense = DMatrix::from_fn(5, 4, |i, j| (i + j) as f64);
        let m = SparseMatrix::from_dense(&dense);
        let a = nmf(&m, 2, 20, 9, false);
        let b = nmf(&m, 2, 20, 9, false);
        assert_eq!(a.w, b.w);
        assert_eq!(a.h, b.h);
    }
}

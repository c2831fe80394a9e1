//! Exact t-SNE on a precomputed dissimilarity matrix.
//!
//! Dissimilarities enter the Gaussian kernel unsquared,
//! `p(j|i) ∝ exp(−β_i d_ij)`, which is how precomputed non-Euclidean
//! metrics are conventionally handled.

use rand_distr::{Distribution, StandardNormal};

use super::LearningRate;
use crate::embed::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::rng;

pub const EARLY_EXAGGERATION: f64 = 12.0;
pub const EXAGGERATION_ITERS: usize = 250;
pub const INITIAL_MOMENTUM: f64 = 0.5;
pub const FINAL_MOMENTUM: f64 = 0.8;
pub const BISECTION_STEPS: usize = 50;
const INIT_SCALE: f64 = 1e-4;
const MIN_GAIN: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct TsneRun {
    pub points: Vec<[f64; 2]>,
    /// `KL(P‖Q)` of the initial embedding and after every iteration
    /// (length `n_iter + 1`), computed without exaggeration.
    pub kl_trace: Vec<f64>,
    /// Perplexity realized by each row's bandwidth.
    pub realized_perplexity: Vec<f64>,
}

/// Conditional distribution of row `i` at precision `beta`; returns its
/// Shannon entropy in nats. `row` receives the normalized probabilities.
fn conditional_row(
    diss: &DissimilarityMatrix,
    i: usize,
    beta: f64,
    shift: f64,
    row: &mut [f64],
) -> f64 {
    let mut sum = 0.0;
    for (j, p) in row.iter_mut().enumerate() {
        *p = if j == i {
            0.0
        } else {
            (-beta * (diss.get(i, j) - shift)).exp()
        };
        sum += *p;
    }
    let mut entropy = 0.0;
    for p in row.iter_mut() {
        *p /= sum;
        if *p > 0.0 {
            entropy -= *p * p.ln();
        }
    }
    entropy
}

/// Row-conditional probabilities `p(j|i)` (row-major N × N) whose
/// perplexities match `perplexity`, plus the realized perplexities.
///
/// The precision of each row is found by bisection on `ln β` over a bracket
/// scaled to the row's typical dissimilarity.
pub fn conditional_probabilities(
    diss: &DissimilarityMatrix,
    perplexity: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = diss.len();
    let target = perplexity.ln();
    let mut p = vec![0.0; n * n];
    let mut realized = Vec::with_capacity(n);
    for i in 0..n {
        let others = (0..n).filter(|&j| j != i).map(|j| diss.get(i, j));
        let shift = others.clone().fold(f64::INFINITY, f64::min);
        let spread = others.map(|d| d - shift).sum::<f64>() / (n - 1) as f64;
        let centre = if spread > 0.0 { -spread.ln() } else { 0.0 };
        let (mut lo, mut hi) = (centre - 40.0, centre + 40.0);
        let row = &mut p[i * n..(i + 1) * n];
        let mut entropy = 0.0;
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            entropy = conditional_row(diss, i, mid.exp(), shift, row);
            if (entropy - target).abs() < 1e-12 {
                break;
            }
            // entropy decreases as precision grows
            if entropy > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        realized.push(entropy.exp());
    }
    (p, realized)
}

/// Symmetrized joint probabilities `(p(j|i) + p(i|j)) / 2N`.
pub fn joint_probabilities(diss: &DissimilarityMatrix, perplexity: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diss.len();
    let (cond, realized) = conditional_probabilities(diss, perplexity);
    let mut joint = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            joint[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64);
        }
    }
    (joint, realized)
}

fn kl_divergence(p: &[f64], kernel: &[f64], z: f64) -> f64 {
    p.iter()
        .zip(kernel)
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &k)| pij * (pij / (k / z).max(f64::MIN_POSITIVE)).ln())
        .sum()
}

/// Student-t kernel `1 / (1 + ‖y_i − y_j‖²)` (zero diagonal) and its sum.
fn student_kernel(y: &[[f64; 2]], kernel: &mut [f64]) -> f64 {
    let n = y.len();
    let mut z = 0.0;
    for i in 0..n {
        kernel[i * n + i] = 0.0;
        for j in (i + 1)..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let k = 1.0 / (1.0 + dx * dx + dy * dy);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
            z += 2.0 * k;
        }
    }
    z
}

/// Exact t-SNE with early exaggeration, momentum switch and per-coordinate
/// gains.
pub fn tsne(
    diss: &DissimilarityMatrix,
    perplexity: f64,
    n_iter: usize,
    learning_rate: LearningRate,
    seed: u64,
) -> Result<TsneRun> {
    let n = diss.len();
    if !(perplexity > 1.0 && perplexity < n as f64) {
        return Err(Error::input(
            "layout",
            format!("t-SNE perplexity {perplexity} must satisfy 1 < perplexity < N = {n}"),
        ));
    }
    if n_iter < EXAGGERATION_ITERS {
        return Err(Error::input(
            "layout",
            format!("t-SNE n_iter {n_iter} must be at least {EXAGGERATION_ITERS}"),
        ));
    }
    let eta = learning_rate.resolve(n);
    let (p, realized_perplexity) = joint_probabilities(diss, perplexity);

    let mut rng = rng::stream(seed, 0x54534e45);
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            [a * INIT_SCALE, b * INIT_SCALE]
        })
        .collect();
    let mut update = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kernel = vec![0.0; n * n];
    let mut kl_trace = Vec::with_capacity(n_iter + 1);

    for iter in 0..n_iter {
        let (exaggeration, momentum) = if iter < EXAGGERATION_ITERS {
            (EARLY_EXAGGERATION, INITIAL_MOMENTUM)
        } else {
            (1.0, FINAL_MOMENTUM)
        };
        let z = student_kernel(&y, &mut kernel);
        kl_trace.push(kl_divergence(&p, &kernel, z));

        for i in 0..n {
            let mut grad = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let k = kernel[i * n + j];
                let coeff = (exaggeration * p[i * n + j] - k / z) * k;
                grad[0] += coeff * (y[i][0] - y[j][0]);
                grad[1] += coeff * (y[i][1] - y[j][1]);
            }
            for c in 0..2 {
                let g = 4.0 * grad[c];
                gains[i][c] = if g * update[i][c] < 0.0 {
                    gains[i][c] + 0.2
                } else {
                    (gains[i][c] * 0.8).max(MIN_GAIN)
                };
                update[i][c] = momentum * update[i][c] - eta * gains[i][c] * g;
            }
        }
        for (yi, ui) in y.iter_mut().zip(&update) {
            yi[0] += ui[0];
            yi[1] += ui[1];
        }
        let mean = y.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        for yi in &mut y {
            yi[0] -= mean[0] / n as f64;
            yi[1] -= mean[1] / n as f64;
        }
    }
    let z = student_kernel(&y, &mut kernel);
    kl_trace.push(kl_divergence(&p, &kernel, z));

    Ok(TsneRun {
        points: y,
        kl_trace,
        realized_perplexity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn line(n: usize) -> DissimilarityMatrix {
        DissimilarityMatrix::new(DMatrix::from_fn(n, n, |i, j| (i as f64 - j as f64).abs()))
            .unwrap()
    }

    #[test]
    fn joint_probabilities_are_a_distribution() {
        let (p, _) = joint_probabilities(&line(9), 3.0);
        let n = 9;
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..n {
            assert_eq!(p[i * n + i], 0.0);
            for j in 0..n {
                assert_eq!(p[i * n + j], p[j * n + i]);
                assert!(p[i * n + j] >= 0.0);
            }
        }
    }

    #[test]
    fn perplexity_preconditions() {
        let d = line(10);
        assert!(tsne(&d, 10.0, 300, LearningRate::Auto, 0).unwrap_err().is_input());
        assert!(tsne(&d, 1.0, 300, LearningRate::Auto, 0).is_err());
        assert!(tsne(&d, 5.0, 100, LearningRate::Auto, 0).unwrap_err().is_input());
    }
}

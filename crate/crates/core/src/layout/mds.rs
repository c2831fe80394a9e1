//! Metric MDS by SMACOF stress majorization.

use rand::Rng as _;

use crate::embed::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::rng;

/// Relative stress decrease below which iteration stops.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MdsRun {
    pub points: Vec<[f64; 2]>,
    /// Raw stress of the initial configuration and of every accepted
    /// iterate; non-increasing.
    pub stress_trace: Vec<f64>,
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// `σ(X) = Σ_{i<j} (d_ij − ‖x_i − x_j‖)²`.
pub fn raw_stress(diss: &DissimilarityMatrix, x: &[[f64; 2]]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let r = diss.get(i, j) - distance(x[i], x[j]);
            s += r * r;
        }
    }
    s
}

/// One Guttman transform `X ← N⁻¹ B(X) X`.
fn guttman(diss: &DissimilarityMatrix, x: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = x.len();
    let mut out = vec![[0.0; 2]; n];
    for i in 0..n {
        let mut acc = [0.0; 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            let dist = distance(x[i], x[j]);
            if dist > 0.0 {
                let b = diss.get(i, j) / dist;
                acc[0] += b * (x[i][0] - x[j][0]);
                acc[1] += b * (x[i][1] - x[j][1]);
            }
        }
        out[i] = [acc[0] / n as f64, acc[1] / n as f64];
    }
    out
}

/// SMACOF from a seeded uniform start in `[-1, 1]²`.
///
/// Stops after `max_iter` transforms or once the relative stress decrease
/// drops below [`RELATIVE_TOLERANCE`]; an iterate that would raise the
/// stress is discarded.
pub fn smacof(diss: &DissimilarityMatrix, max_iter: usize, seed: u64) -> Result<MdsRun> {
    if max_iter == 0 {
        return Err(Error::input("layout", "MDS max_iter must be at least 1"));
    }
    let n = diss.len();
    let mut rng = rng::stream(seed, 0x4d4453);
    let mut x: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)])
        .collect();
    let mut stress = raw_stress(diss, &x);
    let mut stress_trace = vec![stress];
    for _ in 0..max_iter {
        if stress == 0.0 {
            break;
        }
        let previous = stress;
        let next = guttman(diss, &x);
        let next_stress = raw_stress(diss, &next);
        if next_stress <= previous {
            x = next;
            stress = next_stress;
            stress_trace.push(stress);
        }
        if previous - next_stress < RELATIVE_TOLERANCE * previous {
            break;
        }
    }
    Ok(MdsRun {
        points: x,
        stress_trace,
    })
}

//! Batch self-organizing map on PCA-reduced document vectors.

use nalgebra::DMatrix;
use rand::Rng as _;

use super::pca;
use crate::embed::Vectors;
use crate::error::{Error, Result};
use crate::rng;

pub const EPOCHS: usize = 20;
pub const VARIANCE_RETAINED: f64 = 0.95;
pub const FINAL_RADIUS: f64 = 0.5;
/// Half-width of the uniform dither added to unit coordinates.
pub const DITHER: f64 = 0.4;

/// A trained map: `weights` has one row per unit, unit `u` sits at grid
/// column `u % width`, row `u / width`.
#[derive(Debug, Clone)]
pub struct Som {
    pub width: usize,
    pub height: usize,
    pub weights: DMatrix<f64>,
}

impl Som {
    pub fn unit_position(&self, unit: usize) -> [f64; 2] {
        [(unit % self.width) as f64, (unit / self.width) as f64]
    }

    /// Closest unit in Euclidean distance; ties go to the lowest index.
    pub fn best_matching_unit(&self, data: &DMatrix<f64>, row: usize) -> usize {
        let mut best = (0, f64::INFINITY);
        for u in 0..self.weights.nrows() {
            let d: f64 = (0..data.ncols())
                .map(|c| (data[(row, c)] - self.weights[(u, c)]).powi(2))
                .sum();
            if d < best.1 {
                best = (u, d);
            }
        }
        best.0
    }
}

/// Batch training with a Gaussian neighbourhood whose radius shrinks
/// linearly from `max(width, height) / 2` to [`FINAL_RADIUS`].
pub fn train(data: &DMatrix<f64>, width: usize, height: usize, seed: u64) -> Som {
    let (n, dim) = data.shape();
    let units = width * height;
    let mut rng = rng::stream(seed, 0x534f4d);
    let mut weights = DMatrix::zeros(units, dim);
    for u in 0..units {
        let src = rng.random_range(0..n);
        weights.set_row(u, &data.row(src));
    }
    let mut som = Som {
        width,
        height,
        weights,
    };
    let start = width.max(height) as f64 / 2.0;
    for epoch in 0..EPOCHS {
        let radius = start + (FINAL_RADIUS - start) * epoch as f64 / (EPOCHS - 1) as f64;
        // per-BMU sufficient statistics
        let mut counts = vec![0.0; units];
        let mut sums = DMatrix::zeros(units, dim);
        for i in 0..n {
            let b = som.best_matching_unit(data, i);
            counts[b] += 1.0;
            let mut row = sums.row_mut(b);
            row += data.row(i);
        }
        let hit: Vec<usize> = (0..units).filter(|&b| counts[b] > 0.0).collect();
        let two_r2 = 2.0 * radius * radius;
        for u in 0..units {
            let pu = som.unit_position(u);
            let mut den = 0.0;
            let mut num = vec![0.0; dim];
            for &b in &hit {
                let pb = som.unit_position(b);
                let h = (-((pu[0] - pb[0]).powi(2) + (pu[1] - pb[1]).powi(2)) / two_r2).exp();
                den += h * counts[b];
                for (c, acc) in num.iter_mut().enumerate() {
                    *acc += h * sums[(b, c)];
                }
            }
            if den > 0.0 {
                for (c, v) in num.into_iter().enumerate() {
                    som.weights[(u, c)] = v / den;
                }
            }
        }
    }
    som
}

/// SOM layout: rows are L2-normalized, PCA-reduced to 95% variance, mapped
/// to their best-matching unit, and optionally dithered by a seeded uniform
/// offset in `(-0.4, 0.4)²`.
pub fn layout_som(
    vectors: &Vectors,
    width: usize,
    height: usize,
    dither: bool,
    seed: u64,
) -> Result<Vec<[f64; 2]>> {
    if width < 2 || height < 2 {
        return Err(Error::input(
            "layout",
            format!("SOM grid {width}x{height} is smaller than 2x2"),
        ));
    }
    if vectors.n_rows() == 0 {
        return Ok(Vec::new());
    }
    let data = pca::project(&vectors.row_normalized(), VARIANCE_RETAINED);
    let som = train(&data, width, height, seed);
    let mut jitter = rng::stream(seed, 0x444954);
    Ok((0..data.nrows())
        .map(|i| {
            let [x, y] = som.unit_position(som.best_matching_unit(&data, i));
            if dither {
                let dx = jitter.random_range(-DITHER..DITHER);
                let dy = jitter.random_range(-DITHER..DITHER);
                [x + dx, y + dy]
            } else {
                [x, y]
            }
        })
        .collect())
}

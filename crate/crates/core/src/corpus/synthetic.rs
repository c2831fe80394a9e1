//! Seeded synthetic corpora with known category structure.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SparseDtm;
use crate::error::{Error, Result};
use crate::rng;

/// Gaussian blobs in term space, rounded to counts.
///
/// Category `c` has a centre whose term intensities are
/// `spread · max(0, z)` with `z` standard normal; a document of that
/// category has counts `max(0, round(centre + noise · z'))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_docs: usize,
    pub n_categories: usize,
    pub n_terms: usize,
    #[serde(default = "default_spread")]
    pub spread: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    pub seed: u64,
}

fn default_spread() -> f64 {
    4.0
}

fn default_noise() -> f64 {
    1.0
}

impl SyntheticSpec {
    pub fn new(n_docs: usize, n_categories: usize, n_terms: usize, seed: u64) -> Self {
        Self {
            n_docs,
            n_categories,
            n_terms,
            spread: default_spread(),
            noise: default_noise(),
            seed,
        }
    }
}

/// Generates the corpus. Documents are grouped in contiguous category
/// blocks labelled `c0, c1, …`; vocabulary entries are `w0, w1, …`.
pub fn gaussian_blobs(spec: &SyntheticSpec) -> Result<SparseDtm> {
    if spec.n_docs == 0 || spec.n_categories == 0 || spec.n_terms == 0 {
        return Err(Error::input("corpus", "synthetic corpus dimensions must be positive"));
    }
    if spec.n_categories > spec.n_docs {
        return Err(Error::input("corpus", "more categories than documents"));
    }
    if !(spec.spread > 0.0 && spec.noise >= 0.0) {
        return Err(Error::input("corpus", "spread must be positive and noise non-negative"));
    }
    let mut rng = rng::stream(spec.seed, 0x424c4f42);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let centres: Vec<Vec<f64>> = (0..spec.n_categories)
        .map(|_| (0..spec.n_terms).map(|_| spec.spread * normal().max(0.0)).collect())
        .collect();
    let mut rows = Vec::with_capacity(spec.n_docs);
    let mut labels = Vec::with_capacity(spec.n_docs);
    for d in 0..spec.n_docs {
        let c = d * spec.n_categories / spec.n_docs;
        let mut row: Vec<(usize, u64)> = centres[c]
            .iter()
            .enumerate()
            .filter_map(|(t, &mu)| {
                let v = (mu + spec.noise * normal()).round();
                (v >= 1.0).then_some((t, v as u64))
            })
            .collect();
        if row.is_empty() {
            // keep every document non-empty: fall back to the strongest term
            let t = (0..spec.n_terms)
                .max_by(|&a, &b| centres[c][a].total_cmp(&centres[c][b]).then(b.cmp(&a)))
                .unwrap_or(0);
            row.push((t, 1));
        }
        rows.push(row);
        labels.push(format!("c{c}"));
    }
    let vocabulary = (0..spec.n_terms).map(|t| format!("w{t}")).collect();
    SparseDtm::new(spec.n_terms, rows, labels, vocabulary)
}

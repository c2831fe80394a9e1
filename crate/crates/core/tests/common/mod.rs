#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use layout_stability::corpus::synthetic::SyntheticSpec;
use layout_stability::embed::{EmbeddingKind, Weighting};
use layout_stability::layout::{LearningRate, Scatterplot};
use layout_stability::study::{
    CorpusSpec, DrGrids, EmbeddingSpec, MdsGrid, Placement, SomGrid, StudyConfig, TsneGrid,
};

pub fn synthetic_corpus(name: &str, n_docs: usize, n_categories: usize, n_terms: usize, seed: u64) -> CorpusSpec {
    CorpusSpec {
        name: name.into(),
        dtm: None,
        synthetic: Some(SyntheticSpec::new(n_docs, n_categories, n_terms, seed)),
    }
}

/// One 60-document synthetic corpus, two embeddings, all three DRs on
/// reduced grids, three jitter levels and two seeds: 72 layouts.
pub fn smoke_config() -> StudyConfig {
    StudyConfig {
        corpora: vec![synthetic_corpus("blobs", 60, 3, 80, 11)],
        jitter_lambdas: vec![0.0, 0.25, 0.5],
        jitter_seed: 3,
        embeddings: vec![
            EmbeddingSpec {
                kind: EmbeddingKind::Vsm,
                weighting: Weighting::Raw,
                topics: None,
            },
            EmbeddingSpec {
                kind: EmbeddingKind::Lsi,
                weighting: Weighting::Tfidf,
                topics: Some(6),
            },
        ],
        dr_grids: DrGrids {
            mds: Some(MdsGrid {
                max_iter: vec![100, 150],
            }),
            som: Some(SomGrid {
                m: vec![5],
                n: vec![5, 10],
                dither: true,
            }),
            tsne: Some(TsneGrid {
                learning_rate: vec![LearningRate::Auto],
                n_iter: vec![1000],
                perplexity: vec![5.0, 15.0],
            }),
        },
        seeds: vec![1, 2],
        k_neighbors: 7,
        embedding_seed: 0,
        nmf_max_iter: 200,
        placements: vec![Placement::Direct],
        per_corpus_tests: false,
        correlation_sample_size: 3000,
        correlation_seed: 0,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` labels over `n_categories` categories, each category present.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, n_categories: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let c = if i < n_categories { i } else { rng.random_range(0..n_categories) };
            format!("c{c}")
        })
        .collect()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)])
        .collect()
}

/// A labeled plot and a related one: a rotated, shifted and perturbed copy
/// or, one time in four, an independent point set.
pub fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (Scatterplot, Scatterplot) {
    let n_categories = rng.random_range(3..=4.min(n));
    let labels = random_labels(rng, n, n_categories);
    let a = random_points(rng, n);
    let b = if rng.random_bool(0.25) {
        random_points(rng, n)
    } else {
        let angle: f64 = rng.random_range(-180.0..180.0);
        let noise: f64 = rng.random_range(0.0..4.0);
        let (s, c) = angle.to_radians().sin_cos();
        a.iter()
            .map(|&[x, y]| {
                [
                    c * x - s * y + 3.0 + noise * rng.random_range(-1.0..1.0),
                    s * x + c * y - 1.0 + noise * rng.random_range(-1.0..1.0),
                ]
            })
            .collect()
    };
    (
        Scatterplot::new(a, labels.clone()).unwrap(),
        Scatterplot::new(b, labels).unwrap(),
    )
}

/// Random neighbourhood size in `1..=7` with `2k < n`.
pub fn random_k(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.random_range(1..=((n - 1) / 2).min(7))
}

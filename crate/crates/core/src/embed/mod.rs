//! Document embeddings (VSM, LSI, NMF) and their dissimilarities.

mod io;
pub mod nmf;
pub mod svd;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use io::{read_dense, read_embedding, write_dense, write_embedding, write_topics, DenseHeader};

use crate::error::{Error, Result};
use crate::matrix::{sparse_dot, SparseMatrix};

const COMPONENT: &str = "embed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Raw,
    Tfidf,
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Raw => "raw",
            Weighting::Tfidf => "tfidf",
        })
    }
}

impl FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Weighting::Raw),
            "tfidf" | "tf-idf" => Ok(Weighting::Tfidf),
            _ => Err(Error::input(COMPONENT, format!("unknown weighting `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    Vsm,
    Lsi,
    Nmf,
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingKind::Vsm => "vsm",
            EmbeddingKind::Lsi => "lsi",
            EmbeddingKind::Nmf => "nmf",
        })
    }
}

impl FromStr for EmbeddingKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vsm" => Ok(EmbeddingKind::Vsm),
            "lsi" => Ok(EmbeddingKind::Lsi),
            "nmf" => Ok(EmbeddingKind::Nmf),
            _ => Err(Error::input(COMPONENT, format!("unknown embedding `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dissimilarity {
    /// `1 − ⟨x, y⟩ / (‖x‖ ‖y‖)`; a zero vector is at distance 1 from
    /// everything but itself.
    Cosine,
}

/// Document vectors, sparse for the term space and dense for latent spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum Vectors {
    Sparse(SparseMatrix),
    Dense(DMatrix<f64>),
}

impl Vectors {
    pub fn n_rows(&self) -> usize {
        match self {
            Vectors::Sparse(m) => m.n_rows(),
            Vectors::Dense(m) => m.nrows(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Vectors::Sparse(m) => m.n_cols(),
            Vectors::Dense(m) => m.ncols(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Vectors::Sparse(m) => m.to_dense(),
            Vectors::Dense(m) => m.clone(),
        }
    }

    /// Rows scaled to unit Euclidean norm; zero rows stay zero.
    pub fn row_normalized(&self) -> Vectors {
        match self {
            Vectors::Sparse(m) => Vectors::Sparse(SparseMatrix::from_rows(
                m.n_cols(),
                m.rows()
                    .map(|r| {
                        let norm = r.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
                        r.iter()
                            .map(|&(c, v)| (c, if norm > 0.0 { v / norm } else { 0.0 }))
                            .collect()
                    })
                    .collect(),
            )),
            Vectors::Dense(m) => {
                let mut out = m.clone();
                for mut row in out.row_iter_mut() {
                    let norm = row.norm();
                    if norm > 0.0 {
                        row /= norm;
                    }
                }
                Vectors::Dense(out)
            }
        }
    }
}

/// Provenance of an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingInfo {
    pub kind: EmbeddingKind,
    pub weighting: Weighting,
    pub topics: Option<usize>,
}

impl fmt::Display for EmbeddingInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind, self.weighting)?;
        if let Some(k) = self.topics {
            write!(f, "-k{k}")?;
        }
        Ok(())
    }
}

/// Documents as vectors in a latent space plus the dissimilarity used to
/// compare them.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedCorpus {
    vectors: Vectors,
    dissimilarity: Dissimilarity,
    info: EmbeddingInfo,
}

impl EmbeddedCorpus {
    pub fn new(vectors: Vectors, info: EmbeddingInfo) -> Result<Self> {
        if vectors.dim() == 0 {
            return Err(Error::input(COMPONENT, "embedding dimension must be at least 1"));
        }
        let finite = match &vectors {
            Vectors::Sparse(m) => m.rows().flatten().all(|(_, v)| v.is_finite()),
            Vectors::Dense(m) => m.iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err(Error::numerical(COMPONENT, "embedding contains non-finite values"));
        }
        Ok(Self {
            vectors,
            dissimilarity: Dissimilarity::Cosine,
            info,
        })
    }

    pub fn vectors(&self) -> &Vectors {
        &self.vectors
    }

    pub fn dissimilarity(&self) -> Dissimilarity {
        self.dissimilarity
    }

    pub fn info(&self) -> EmbeddingInfo {
        self.info
    }

    pub fn n_docs(&self) -> usize {
        self.vectors.n_rows()
    }
}

/// θ (document-topic) and φ (topic-term) factors of a topic model.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicFactorization {
    pub doc_topic: DMatrix<f64>,
    pub topic_term: DMatrix<f64>,
}

impl TopicFactorization {
    pub fn n_topics(&self) -> usize {
        self.topic_term.nrows()
    }
}

/// Symmetric matrix of pairwise dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix(DMatrix<f64>);

impl DissimilarityMatrix {
    /// Validates squareness, finiteness, non-negativity, zero diagonal and
    /// symmetry (up to `1e-12` relative).
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::input("dissimilarity", "matrix is not square"));
        }
        let scale = m.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
        for i in 0..m.nrows() {
            if m[(i, i)] != 0.0 {
                return Err(Error::input("dissimilarity", format!("nonzero diagonal at {i}")));
            }
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::input(
                        "dissimilarity",
                        format!("entry ({i},{j}) = {v} is negative or not finite"),
                    ));
                }
                if (v - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::input(
                        "dissimilarity",
                        format!("not symmetric at ({i},{j})"),
                    ));
                }
            }
        }
        Ok(Self(m))
    }

    /// Euclidean distances between the rows of `points`.
    pub fn euclidean(points: &DMatrix<f64>) -> Self {
        let n = points.nrows();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = crate::matrix::row_distance(points, i, points, j);
                m[(i, j)] = d;
                m[(j, i)] = d;
            }
        }
        Self(m)
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Upper triangle `(i < j)` in row-major order.
    pub fn condensed(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }
}

fn cosine_distance(dot: f64, norm_a: f64, norm_b: f64) -> f64 {
    if norm_a == 0.0 || norm_b == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (norm_a * norm_b)).clamp(0.0, 2.0)
}

/// Raw counts or weighted values as a vector-space embedding.
pub fn embed_vsm(matrix: &SparseMatrix, weighting: Weighting) -> EmbeddedCorpus {
    EmbeddedCorpus::new(
        Vectors::Sparse(matrix.clone()),
        EmbeddingInfo {
            kind: EmbeddingKind::Vsm,
            weighting,
            topics: None,
        },
    )
    .expect("DTM rows are finite")
}

/// LSI: document vectors `U_K Σ_K`, topics `V_Kᵀ` from a rank-`k` SVD.
pub fn embed_lsi(
    matrix: &SparseMatrix,
    k: usize,
    weighting: Weighting,
) -> Result<(EmbeddedCorpus, TopicFactorization)> {
    let max = matrix.n_rows().min(matrix.n_cols());
    if k == 0 || k > max {
        return Err(Error::input(
            COMPONENT,
            format!("LSI topic count {k} outside [1, {max}]"),
        ));
    }
    let svd = svd::truncated_svd(matrix, k);
    let mut doc = svd.u.clone();
    for (c, &s) in svd.singular_values.iter().enumerate() {
        doc.column_mut(c).scale_mut(s);
    }
    let info = EmbeddingInfo {
        kind: EmbeddingKind::Lsi,
        weighting,
        topics: Some(k),
    };
    let corpus = EmbeddedCorpus::new(Vectors::Dense(doc.clone()), info)?;
    Ok((
        corpus,
        TopicFactorization {
            doc_topic: doc,
            topic_term: svd.vt,
        },
    ))
}

/// NMF: document vectors `W`, topics `H`.
pub fn embed_nmf(
    matrix: &SparseMatrix,
    k: usize,
    max_iter: usize,
    seed: u64,
    weighting: Weighting,
) -> Result<(EmbeddedCorpus, TopicFactorization)> {
    if k == 0 {
        return Err(Error::input(COMPONENT, "NMF topic count must be at least 1"));
    }
    if let Some(min) = matrix.min_value() {
        if min < 0.0 {
            return Err(Error::input(COMPONENT, "NMF input has negative entries"));
        }
    }
    let fit = nmf::nmf(matrix, k, max_iter, seed, false);
    let info = EmbeddingInfo {
        kind: EmbeddingKind::Nmf,
        weighting,
        topics: Some(k),
    };
    let corpus = EmbeddedCorpus::new(Vectors::Dense(fit.w.clone()), info)?;
    Ok((
        corpus,
        TopicFactorization {
            doc_topic: fit.w,
            topic_term: fit.h,
        },
    ))
}

/// Pairwise cosine dissimilarities of the rows of `vectors`.
pub fn cosine_matrix(vectors: &Vectors) -> DissimilarityMatrix {
    let n = vectors.n_rows();
    let mut m = DMatrix::zeros(n, n);
    match vectors {
        Vectors::Sparse(s) => {
            let norms: Vec<f64> = s
                .rows()
                .map(|r| r.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt())
                .collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = cosine_distance(sparse_dot(s.row(i), s.row(j)), norms[i], norms[j]);
                    m[(i, j)] = d;
                    m[(j, i)] = d;
                }
            }
        }
        Vectors::Dense(x) => {
            let norms: Vec<f64> = x.row_iter().map(|r| r.norm()).collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = cosine_distance(x.row(i).dot(&x.row(j)), norms[i], norms[j]);
                    m[(i, j)] = d;
                    m[(j, i)] = d;
                }
            }
        }
    }
    DissimilarityMatrix(m)
}

/// Dissimilarity matrix under the corpus's declared dissimilarity.
pub fn dissimilarity_matrix(corpus: &EmbeddedCorpus) -> DissimilarityMatrix {
    match corpus.dissimilarity {
        Dissimilarity::Cosine => cosine_matrix(&corpus.vectors),
    }
}

/// Jensen–Shannon distance (square root of the base-2 divergence) between
/// two discrete distributions; lies in `[0, 1]`.
///
/// Inputs are normalized to sum 1. Not wired to any built-in embedding;
/// provided for externally supplied probabilistic topic weights.
pub fn jensen_shannon_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::input(COMPONENT, "distributions differ in length"));
    }
    let (sp, sq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
    if p.iter().chain(q).any(|&v| v < 0.0 || !v.is_finite()) || sp <= 0.0 || sq <= 0.0 {
        return Err(Error::input(COMPONENT, "distributions must be non-negative with positive mass"));
    }
    let kl_to_mid = |a: &[f64], sa: f64| -> f64 {
        a.iter()
            .zip(p.iter().zip(q))
            .map(|(&x, (&pp, &qq))| {
                let x = x / sa;
                let mid = 0.5 * (pp / sp + qq / sq);
                if x > 0.0 {
                    x * (x / mid).log2()
                } else {
                    0.0
                }
            })
            .sum()
    };
    let js = 0.5 * kl_to_mid(p, sp) + 0.5 * kl_to_mid(q, sq);
    Ok(js.max(0.0).sqrt().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: usize, cols: usize, v: &[f64]) -> Vectors {
        Vectors::Dense(DMatrix::from_row_slice(rows, cols, v))
    }

    #[test]
    fn cosine_basic_cases() {
        let d = cosine_matrix(&dense(3, 3, &[1., 1., 0., 1., 0., 0., 0., 0., 5.]));
        assert!((d.get(0, 1) - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(d.get(1, 2), 1.0);
        let same = cosine_matrix(&dense(2, 2, &[3., 4., 3., 4.]));
        assert_eq!(same.get(0, 1), 0.0);
    }

    #[test]
    fn zero_rows_are_maximally_dissimilar() {
        let d = cosine_matrix(&dense(3, 2, &[0., 0., 1., 2., 0., 0.]));
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(0, 2), 1.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn single_row_gives_zero_matrix() {
        let d = cosine_matrix(&dense(1, 2, &[1., 2.]));
        assert_eq!(d.as_matrix(), &DMatrix::zeros(1, 1));
    }

    #[test]
    fn sparse_and_dense_agree() {
        let m = DMatrix::from_row_slice(3, 4, &[1., 0., 2., 0., 0., 3., 1., 0., 4., 0., 0., 1.]);
        let a = cosine_matrix(&Vectors::Dense(m.clone()));
        let b = cosine_matrix(&Vectors::Sparse(SparseMatrix::from_dense(&m)));
        assert!((a.as_matrix() - b.as_matrix()).abs().max() < 1e-15);
    }

    #[test]
    fn lsi_rejects_bad_k() {
        let m = SparseMatrix::from_dense(&DMatrix::from_element(3, 2, 1.0));
        assert!(embed_lsi(&m, 0, Weighting::Raw).is_err());
        assert!(embed_lsi(&m, 3, Weighting::Raw).is_err());
    }

    #[test]
    fn nmf_rejects_negative_input() {
        let m = SparseMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1., -1., 0., 2.]));
        assert!(embed_nmf(&m, 1, 10, 0, Weighting::Raw).unwrap_err().is_input());
    }

    #[test]
    fn dissimilarity_validation() {
        assert!(DissimilarityMatrix::new(DMatrix::from_row_slice(2, 2, &[0., 1., 2., 0.])).is_err());
        assert!(DissimilarityMatrix::new(DMatrix::from_row_slice(2, 2, &[0., -1., -1., 0.])).is_err());
        assert!(DissimilarityMatrix::new(DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.])).is_ok());
    }

    #[test]
    fn jensen_shannon_bounds() {
        assert_eq!(jensen_shannon_distance(&[0.5, 0.5], &[1.0, 1.0]).unwrap(), 0.0);
        let d = jensen_shannon_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }
}

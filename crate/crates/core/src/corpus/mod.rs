//! Document-term matrices: ingestion, statistics, tf-idf weighting and the
//! jitter perturbation used for the input-data stability experiment.

mod io;
pub mod synthetic;

use std::collections::{BTreeMap, BTreeSet, HashSet};

pub use io::{read_dtm, read_lines, read_raw_corpus, write_dtm, RawCorpus};

use crate::error::{Error, Result};
use crate::matrix::SparseMatrix;
use crate::rng::counter_uniform;

const COMPONENT: &str = "corpus";

/// Document-term matrix of absolute term frequencies with one category
/// label per document.
///
/// Rows are stored sparsely and sorted by term index; every stored
/// frequency is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDtm {
    n_terms: usize,
    rows: Vec<Vec<(usize, u64)>>,
    labels: Vec<String>,
    vocabulary: Vec<String>,
}

impl SparseDtm {
    /// Validating constructor. `rows[i]` lists `(term, frequency)` pairs of
    /// document `i` in any order.
    pub fn new(
        n_terms: usize,
        rows: Vec<Vec<(usize, u64)>>,
        labels: Vec<String>,
        vocabulary: Vec<String>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::input(COMPONENT, "a DTM needs at least one document"));
        }
        if labels.len() != rows.len() {
            return Err(Error::input(
                COMPONENT,
                format!("{} labels for {} documents", labels.len(), rows.len()),
            ));
        }
        if vocabulary.len() != n_terms {
            return Err(Error::input(
                COMPONENT,
                format!("vocabulary has {} terms, expected {n_terms}", vocabulary.len()),
            ));
        }
        let mut sorted = Vec::with_capacity(rows.len());
        for (doc, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable_by_key(|&(t, _)| t);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::input(
                        COMPONENT,
                        format!("duplicate entry ({doc}, {})", w[0].0),
                    ));
                }
            }
            if let Some(&(t, f)) = row.iter().find(|&&(t, f)| t >= n_terms || f == 0) {
                return Err(Error::input(
                    COMPONENT,
                    format!("invalid entry ({doc}, {t}) = {f}; terms < {n_terms}, frequency > 0"),
                ));
            }
            sorted.push(row);
        }
        Ok(Self {
            n_terms,
            rows: sorted,
            labels,
            vocabulary,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn row(&self, doc: usize) -> &[(usize, u64)] {
        &self.rows[doc]
    }

    /// Stored nonzeros in row-major order as `(doc, term, frequency)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(d, r)| r.iter().map(move |&(t, f)| (d, t, f)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn n_categories(&self) -> usize {
        self.labels.iter().collect::<BTreeSet<_>>().len()
    }

    /// Frequencies as a real matrix.
    pub fn to_matrix(&self) -> SparseMatrix {
        SparseMatrix::from_rows(
            self.n_terms,
            self.rows
                .iter()
                .map(|r| r.iter().map(|&(t, f)| (t, f as f64)).collect())
                .collect(),
        )
    }
}

/// Builds a DTM from tokenized documents. The vocabulary is the sorted set
/// of non-stopword tokens; documents left empty are kept as zero rows.
pub fn ingest_documents(
    docs: &[Vec<String>],
    labels: &[String],
    stopwords: &HashSet<String>,
) -> Result<SparseDtm> {
    if docs.len() != labels.len() {
        return Err(Error::input(
            COMPONENT,
            format!("{} documents but {} labels", docs.len(), labels.len()),
        ));
    }
    let vocabulary: Vec<String> = docs
        .iter()
        .flatten()
        .filter(|t| !stopwords.contains(*t))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let rows = docs
        .iter()
        .map(|doc| {
            let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
            for tok in doc.iter().filter(|t| !stopwords.contains(*t)) {
                *counts.entry(index[tok.as_str()]).or_default() += 1;
            }
            counts.into_iter().collect()
        })
        .collect();
    SparseDtm::new(vocabulary.len(), rows, labels.to_vec(), vocabulary)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub n_docs: usize,
    pub n_terms: usize,
    /// Lower median of document lengths (row sums).
    pub median_doc_length: u64,
    pub n_categories: usize,
    /// `1 - u / (N n)` with `u` stored nonzeros.
    pub sparsity: f64,
}

pub fn corpus_stats(dtm: &SparseDtm) -> CorpusStats {
    let mut lengths: Vec<u64> = dtm
        .rows
        .iter()
        .map(|r| r.iter().map(|&(_, f)| f).sum())
        .collect();
    lengths.sort_unstable();
    let median_doc_length = lengths[(lengths.len() - 1) / 2];
    let cells = dtm.n_docs() as f64 * dtm.n_terms() as f64;
    let sparsity = if cells == 0.0 {
        1.0
    } else {
        1.0 - dtm.nnz() as f64 / cells
    };
    CorpusStats {
        n_docs: dtm.n_docs(),
        n_terms: dtm.n_terms(),
        median_doc_length,
        n_categories: dtm.n_categories(),
        sparsity,
    }
}

/// tf-idf weighting with the corpus-wide term count as tf denominator:
///
/// `tfidf(w, d) = n(w, d) / Σ_d' n(w, d') · ln(|C| / df(w))`
///
/// Terms occurring in every document get weight zero and vanish from the
/// sparse pattern.
pub fn apply_tfidf(dtm: &SparseDtm) -> SparseMatrix {
    let mut term_total = vec![0u64; dtm.n_terms()];
    let mut doc_freq = vec![0u64; dtm.n_terms()];
    for (_, t, f) in dtm.entries() {
        term_total[t] += f;
        doc_freq[t] += 1;
    }
    let n_docs = dtm.n_docs() as f64;
    let idf: Vec<f64> = doc_freq
        .iter()
        .map(|&df| if df == 0 { 0.0 } else { (n_docs / df as f64).ln() })
        .collect();
    let rows = dtm
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&(t, f)| (t, f as f64 / term_total[t] as f64 * idf[t]))
                .collect()
        })
        .collect();
    SparseMatrix::from_rows(dtm.n_terms(), rows)
}

/// Jitter intensity and the seed realizing the noise matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterSpec {
    lambda: f64,
    seed: u64,
}

impl JitterSpec {
    pub fn new(lambda: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::input(
                COMPONENT,
                format!("jitter lambda {lambda} outside [0, 1]"),
            ));
        }
        Ok(Self { lambda, seed })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Noise value for cell `(doc, term)`, uniform on `[-λ, λ]`.
    ///
    /// Cells are addressed row-major over the full `N × n` grid, so the
    /// value does not depend on which other cells are nonzero.
    pub fn epsilon(&self, doc: usize, term: usize, n_terms: usize) -> f64 {
        let index = doc as u64 * n_terms as u64 + term as u64;
        self.lambda * (2.0 * counter_uniform(self.seed, index) - 1.0)
    }
}

/// `DTM'[i,j] = max{0, round(DTM[i,j] · (1 + ε[i,j]))}` with half-away-from-
/// zero rounding. Zero cells are fixed points, so only stored entries are
/// visited.
pub fn jitter(dtm: &SparseDtm, spec: &JitterSpec) -> SparseDtm {
    let n = dtm.n_terms();
    let rows = dtm
        .rows
        .iter()
        .enumerate()
        .map(|(d, r)| {
            r.iter()
                .filter_map(|&(t, f)| {
                    let v = (f as f64 * (1.0 + spec.epsilon(d, t, n))).round().max(0.0);
                    (v > 0.0).then_some((t, v as u64))
                })
                .collect()
        })
        .collect();
    SparseDtm {
        n_terms: n,
        rows,
        labels: dtm.labels.clone(),
        vocabulary: dtm.vocabulary.clone(),
    }
}

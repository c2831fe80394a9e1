//! Row-compressed real matrices and small dense helpers.

use nalgebra::DMatrix;

/// Real matrix stored as sorted sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_cols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` lists. Entries are sorted by
    /// column and explicit zeros dropped.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|mut r| {
                r.retain(|&(_, v)| v != 0.0);
                r.sort_by_key(|&(c, _)| c);
                debug_assert!(r.iter().all(|&(c, _)| c < n_cols));
                r
            })
            .collect();
        Self { n_cols, rows }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter_map(|j| {
                        let v = m[(i, j)];
                        (v != 0.0).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self {
            n_cols: m.ncols(),
            rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows(), self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn min_value(&self) -> Option<f64> {
        self.rows.iter().flatten().map(|&(_, v)| v).reduce(f64::min)
    }

    /// `self * rhs` for a dense `rhs` with `n_cols` rows.
    pub fn mul_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(rhs.nrows(), self.n_cols);
        let mut out = DMatrix::zeros(self.n_rows(), rhs.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for c in 0..rhs.ncols() {
                out[(i, c)] = row.iter().map(|&(j, v)| v * rhs[(j, c)]).sum();
            }
        }
        out
    }

    /// `selfᵀ * rhs` for a dense `rhs` with `n_rows` rows.
    pub fn tr_mul_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(rhs.nrows(), self.n_rows());
        let mut out = DMatrix::zeros(self.n_cols, rhs.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                for c in 0..rhs.ncols() {
                    out[(j, c)] += v * rhs[(i, c)];
                }
            }
        }
        out
    }
}

/// Dot product of two sorted sparse rows.
pub fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Euclidean distance between two rows of dense matrices.
pub fn row_distance(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    debug_assert_eq!(a.ncols(), b.ncols());
    (0..a.ncols())
        .map(|c| {
            let d = a[(i, c)] - b[(j, c)];
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

//! PCA projection onto the fewest components reaching a variance fraction.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::embed::Vectors;
use crate::matrix::sparse_dot;

/// Eigenpairs sorted by descending eigenvalue (ties by index), negatives
/// clamped to zero.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

fn components_for(values: &[f64], fraction: f64) -> usize {
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return 1;
    }
    let mut cum = 0.0;
    for (i, v) in values.iter().enumerate() {
        cum += v;
        if cum >= fraction * total * (1.0 - 1e-12) {
            return i + 1;
        }
    }
    values.len().max(1)
}

/// Principal component scores (N × c) where c is the smallest number of
/// components whose variance reaches `fraction` of the total. A constant
/// input yields a single all-zero component.
pub fn project(vectors: &Vectors, fraction: f64) -> DMatrix<f64> {
    let (n, d) = (vectors.n_rows(), vectors.dim());
    if d <= n {
        let mut x = vectors.to_dense();
        let mean = x.row_mean();
        for mut row in x.row_iter_mut() {
            row -= &mean;
        }
        let (values, basis) = sorted_eigen(x.transpose() * &x);
        let c = components_for(&values, fraction);
        return x * basis.columns(0, c);
    }

    // Fewer samples than dimensions: work on the centred Gram matrix.
    let gram = match vectors {
        Vectors::Dense(x) => {
            let mut xc = x.clone();
            let mean = xc.row_mean();
            for mut row in xc.row_iter_mut() {
                row -= &mean;
            }
            &xc * xc.transpose()
        }
        Vectors::Sparse(s) => {
            let mut mean = vec![0.0; d];
            for row in s.rows() {
                for &(j, v) in row {
                    mean[j] += v / n as f64;
                }
            }
            let mean_sq: f64 = mean.iter().map(|v| v * v).sum();
            let dot_mean: Vec<f64> = s
                .rows()
                .map(|r| r.iter().map(|&(j, v)| v * mean[j]).sum())
                .collect();
            let mut g = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = sparse_dot(s.row(i), s.row(j)) - dot_mean[i] - dot_mean[j] + mean_sq;
                    g[(i, j)] = v;
                    g[(j, i)] = v;
                }
            }
            g
        }
    };
    let (values, basis) = sorted_eigen(gram);
    let c = components_for(&values, fraction);
    DMatrix::from_fn(n, c, |i, k| basis[(i, k)] * values[k].sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseMatrix;

    #[test]
    fn line_needs_one_component() {
        let x = DMatrix::from_fn(10, 3, |i, j| i as f64 * [1.0, 2.0, -1.0][j]);
        let p = project(&Vectors::Dense(x), 0.95);
        assert_eq!(p.ncols(), 1);
    }

    #[test]
    fn gram_and_covariance_paths_agree_on_distances() {
        let x = DMatrix::from_fn(4, 6, |i, j| ((i * 7 + j * 3) % 5) as f64);
        let wide = project(&Vectors::Sparse(SparseMatrix::from_dense(&x)), 1.0);
        let direct = {
            // pad with zero rows so the covariance path is taken, then drop them
            let mut tall = DMatrix::zeros(8, 6);
            tall.rows_mut(0, 4).copy_from(&x);
            project(&Vectors::Dense(tall), 1.0)
        };
        let d = |m: &DMatrix<f64>, a: usize, b: usize| (m.row(a) - m.row(b)).norm();
        for a in 0..4 {
            for b in 0..4 {
                let orig = (x.row(a) - x.row(b)).norm();
                assert!((d(&wide, a, b) - orig).abs() < 1e-9);
                assert!((d(&direct, a, b) - orig).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_input_gives_one_zero_component() {
        let x = DMatrix::from_element(5, 3, 2.0);
        let p = project(&Vectors::Dense(x), 0.95);
        assert_eq!(p.shape(), (5, 1));
        assert!(p.iter().all(|v| v.abs() < 1e-12));
    }
}

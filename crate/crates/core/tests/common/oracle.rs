//! Direct-from-definition reference implementations. They share no code
//! with the library beyond the input types and favour obviousness over
//! speed.

#![allow(dead_code)]

use nalgebra::Matrix2;
use num_bigint::BigUint;

pub type Points = Vec<[f64; 2]>;

pub fn distances(p: &[[f64; 2]]) -> Vec<Vec<f64>> {
    p.iter()
        .map(|a| p.iter().map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).collect())
        .collect()
}

/// `r[i][j]`: 1 + number of points strictly nearer to `i` than `j`, where
/// an equal distance counts as nearer when the index is smaller.
pub fn ranks(d: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = d.len();
    let mut r = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let nearer = (0..n)
                .filter(|&l| l != i && l != j)
                .filter(|&l| d[i][l] < d[i][j] || (d[i][l] == d[i][j] && l < j))
                .count();
            r[i][j] = nearer + 1;
        }
    }
    r
}

fn knn(r: &[Vec<usize>], i: usize, k: usize) -> Vec<usize> {
    (0..r.len()).filter(|&j| j != i && r[i][j] <= k).collect()
}

/// Trustworthiness of `b` with respect to `a`; requires `2k < N`.
pub fn trustworthiness(da: &[Vec<f64>], db: &[Vec<f64>], k: usize) -> f64 {
    let n = da.len();
    assert!(2 * k < n);
    let (ra, rb) = (ranks(da), ranks(db));
    let mut sum = 0.0;
    for i in 0..n {
        let in_a = knn(&ra, i, k);
        for j in knn(&rb, i, k) {
            if !in_a.contains(&j) {
                sum += (ra[i][j] - k) as f64;
            }
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    1.0 - 2.0 / (nf * kf * (2.0 * nf - 3.0 * kf - 1.0)) * sum
}

pub fn continuity(da: &[Vec<f64>], db: &[Vec<f64>], k: usize) -> f64 {
    trustworthiness(db, da, k)
}

fn mrre_normalizer(n: usize, k: usize) -> f64 {
    let mut c = 0.0;
    for l in 1..=k {
        c += (n as f64 - 2.0 * l as f64 + 1.0).abs() / l as f64;
    }
    n as f64 * c
}

/// `(α_MM, α_MF)`.
pub fn mrre(da: &[Vec<f64>], db: &[Vec<f64>], k: usize) -> (f64, f64) {
    let n = da.len();
    let (ra, rb) = (ranks(da), ranks(db));
    let (mut em, mut ef) = (0.0, 0.0);
    for i in 0..n {
        for j in knn(&ra, i, k) {
            em += (ra[i][j] as f64 - rb[i][j] as f64).abs() / ra[i][j] as f64;
        }
        for j in knn(&rb, i, k) {
            ef += (ra[i][j] as f64 - rb[i][j] as f64).abs() / rb[i][j] as f64;
        }
    }
    let c = mrre_normalizer(n, k);
    (1.0 - em / c, 1.0 - ef / c)
}

pub fn lcmc(da: &[Vec<f64>], db: &[Vec<f64>], k: usize) -> f64 {
    let n = da.len();
    let (ra, rb) = (ranks(da), ranks(db));
    let mut total = 0.0;
    for i in 0..n {
        let b = knn(&rb, i, k);
        let shared = knn(&ra, i, k).iter().filter(|j| b.contains(j)).count();
        total += shared as f64 / k as f64;
    }
    total / n as f64
}

pub fn label_preservation(da: &[Vec<f64>], db: &[Vec<f64>], labels: &[String], k: usize) -> f64 {
    let n = da.len();
    let (ra, rb) = (ranks(da), ranks(db));
    let mut distinct: Vec<&String> = labels.iter().collect();
    distinct.sort();
    distinct.dedup();
    let mut total = 0.0;
    for i in 0..n {
        let (na, nb) = (knn(&ra, i, k), knn(&rb, i, k));
        let shared: usize = distinct
            .iter()
            .map(|l| {
                let ca = na.iter().filter(|&&j| &labels[j] == *l).count();
                let cb = nb.iter().filter(|&&j| &labels[j] == *l).count();
                ca.min(cb)
            })
            .sum();
        total += shared as f64 / k as f64;
    }
    total / n as f64
}

/// Upper triangle, row by row.
pub fn condensed(d: &[Vec<f64>]) -> Vec<f64> {
    let n = d.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(d[i][j]);
        }
    }
    out
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

/// Rank = number of smaller values plus the average position among equal
/// values.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&average_ranks(x), &average_ranks(y))
}

fn sorted_labels(labels: &[String]) -> Vec<String> {
    let mut l = labels.to_vec();
    l.sort();
    l.dedup();
    l
}

pub fn centroids(p: &[[f64; 2]], labels: &[String]) -> Vec<[f64; 2]> {
    sorted_labels(labels)
        .iter()
        .map(|l| {
            let members: Vec<&[f64; 2]> = p.iter().zip(labels).filter(|(_, x)| *x == l).map(|(q, _)| q).collect();
            let m = members.len() as f64;
            [
                members.iter().map(|q| q[0]).sum::<f64>() / m,
                members.iter().map(|q| q[1]).sum::<f64>() / m,
            ]
        })
        .collect()
}

pub fn cluster_ordering(pa: &[[f64; 2]], pb: &[[f64; 2]], labels: &[String]) -> f64 {
    let (ca, cb) = (centroids(pa, labels), centroids(pb, labels));
    pearson(&condensed(&distances(&ca)), &condensed(&distances(&cb)))
}

pub fn distance_consistency(p: &[[f64; 2]], labels: &[String]) -> f64 {
    let names = sorted_labels(labels);
    let c = centroids(p, labels);
    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let consistent = p
        .iter()
        .zip(labels)
        .filter(|(q, l)| {
            let own = names.iter().position(|n| n == *l).unwrap();
            let d_own = dist(**q, c[own]);
            c.iter().all(|other| d_own <= dist(**q, *other))
        })
        .count();
    consistent as f64 / p.len() as f64
}

pub fn silhouette(p: &[[f64; 2]], labels: &[String]) -> f64 {
    let d = distances(p);
    let names = sorted_labels(labels);
    let n = p.len();
    let mut total = 0.0;
    for i in 0..n {
        let mean_to = |l: &String| {
            let members: Vec<usize> = (0..n).filter(|&j| j != i && &labels[j] == l).collect();
            (members.iter().map(|&j| d[i][j]).sum::<f64>() / members.len() as f64, members.len())
        };
        let (a, own_size) = mean_to(&labels[i]);
        if own_size == 0 {
            continue;
        }
        let b = names
            .iter()
            .filter(|l| **l != labels[i])
            .map(|l| mean_to(l).0)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

/// Optimal proper rotation of centred `a` onto centred `b` from the SVD of
/// the cross-covariance (Kabsch), in degrees.
pub fn procrustes_degrees(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let centre = |p: &[[f64; 2]]| {
        let m = p.len() as f64;
        let (x, y) = (p.iter().map(|q| q[0]).sum::<f64>() / m, p.iter().map(|q| q[1]).sum::<f64>() / m);
        p.iter().map(|q| [q[0] - x, q[1] - y]).collect::<Vec<_>>()
    };
    let (a, b) = (centre(a), centre(b));
    let mut h = Matrix2::zeros();
    for (p, q) in a.iter().zip(&b) {
        h += Matrix2::new(p[0] * q[0], p[0] * q[1], p[1] * q[0], p[1] * q[1]);
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let v = vt.transpose();
    let sign = (v * u.transpose()).determinant().signum();
    let r = v * Matrix2::new(1.0, 0.0, 0.0, sign) * u.transpose();
    r[(1, 0)].atan2(r[(0, 0)]).to_degrees()
}

/// `P(X ≥ n)` for `X ~ Binomial(m, 1/2)` as an exact ratio of integers.
pub fn binomial_tail(m: u64, n: u64) -> f64 {
    let mut row = vec![BigUint::from(1u32)];
    for _ in 0..m {
        let mut next = vec![BigUint::from(1u32); row.len() + 1];
        for i in 1..row.len() {
            next[i] = &row[i - 1] + &row[i];
        }
        row = next;
    }
    let tail: BigUint = row.iter().skip(n as usize).sum();
    let total = BigUint::from(1u32) << m as usize;
    // both fit into f64 exactly only for small m; divide via scaled integers
    let scale = 1u64 << 60;
    let q = (tail * BigUint::from(scale)) / total;
    let q: u64 = q.try_into().expect("ratio at most one");
    q as f64 / scale as f64
}

pub fn alpha(t: f64, c: f64, mm: f64, mf: f64, lc: f64, lp: f64) -> f64 {
    ((t + c + mm + mf) / 4.0 + lc + lp) / 3.0
}

pub fn beta(pc: f64, sc: f64, co: f64) -> f64 {
    ((0.5 * (pc + 1.0) + 0.5 * (sc + 1.0)) / 2.0 + (co + 1.0) / 2.0) / 2.0
}

pub fn gamma(dc: f64) -> f64 {
    1.0 - dc
}

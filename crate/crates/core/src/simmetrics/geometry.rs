//! Distance-correlation, category-centroid and rotation metrics.
//!
//! Centroid metrics accept any point matrix (one row per point), so they
//! apply equally to scatterplots and to high-dimensional vectors.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::embed::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::layout::Scatterplot;
use crate::stats;

use super::COMPONENT;

/// Pearson and Spearman correlation of two condensed distance vectors
/// (the Shepard diagram).
pub fn shepard_correlations(da: &[f64], db: &[f64]) -> Result<(f64, f64)> {
    if da.len() != db.len() {
        return Err(Error::input(
            COMPONENT,
            format!("distance vectors differ in length: {} vs {}", da.len(), db.len()),
        ));
    }
    let undefined = || Error::numerical(COMPONENT, "Shepard correlation of constant distances");
    let pc = stats::pearson(da, db).ok_or_else(undefined)?;
    let sc = stats::spearman(da, db).ok_or_else(undefined)?;
    Ok((pc, sc))
}

/// Distinct labels in sorted order with their member indices.
pub fn categories(labels: &[String]) -> BTreeMap<&str, Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.as_str()).or_default().push(i);
    }
    groups
}

/// Per-category mean rows, in sorted label order.
pub fn centroids(points: &DMatrix<f64>, labels: &[String]) -> DMatrix<f64> {
    let groups = categories(labels);
    let mut out = DMatrix::zeros(groups.len(), points.ncols());
    for (c, members) in groups.values().enumerate() {
        for &i in members {
            for d in 0..points.ncols() {
                out[(c, d)] += points[(i, d)];
            }
        }
        for d in 0..points.ncols() {
            out[(c, d)] /= members.len() as f64;
        }
    }
    out
}

fn check_labels(a: &[String], b: &[String]) -> Result<()> {
    if a != b {
        return Err(Error::input(COMPONENT, "the two representations carry different labels"));
    }
    Ok(())
}

/// Pearson correlation between the centroid-pair distances of two point
/// sets sharing `labels`.
pub fn cluster_ordering_points(a: &DMatrix<f64>, b: &DMatrix<f64>, labels: &[String]) -> Result<f64> {
    let k = categories(labels).len();
    if k < 3 {
        return Err(Error::input(
            COMPONENT,
            format!("cluster ordering needs at least 3 categories, found {k}"),
        ));
    }
    let da = DissimilarityMatrix::euclidean(&centroids(a, labels)).condensed();
    let db = DissimilarityMatrix::euclidean(&centroids(b, labels)).condensed();
    stats::pearson(&da, &db)
        .ok_or_else(|| Error::numerical(COMPONENT, "cluster ordering of constant centroid distances"))
}

pub fn cluster_ordering(a: &Scatterplot, b: &Scatterplot) -> Result<f64> {
    check_labels(a.labels(), b.labels())?;
    cluster_ordering_points(&a.to_matrix(), &b.to_matrix(), a.labels())
}

/// Fraction of points whose own category centroid is a nearest centroid
/// (ties count as consistent).
pub fn distance_consistency_points(points: &DMatrix<f64>, labels: &[String]) -> f64 {
    if labels.is_empty() {
        return 1.0;
    }
    let groups = categories(labels);
    let index: BTreeMap<&str, usize> = groups.keys().enumerate().map(|(c, &l)| (l, c)).collect();
    let cents = centroids(points, labels);
    let sq = |i: usize, c: usize| -> f64 {
        (0..points.ncols())
            .map(|d| (points[(i, d)] - cents[(c, d)]).powi(2))
            .sum()
    };
    let consistent = (0..labels.len())
        .filter(|&i| {
            let own = index[labels[i].as_str()];
            let d_own = sq(i, own);
            (0..cents.nrows()).all(|c| c == own || d_own <= sq(i, c))
        })
        .count();
    consistent as f64 / labels.len() as f64
}

pub fn distance_consistency(plot: &Scatterplot) -> f64 {
    distance_consistency_points(&plot.to_matrix(), plot.labels())
}

pub fn gamma_dc(a: &Scatterplot, b: &Scatterplot) -> Result<f64> {
    check_labels(a.labels(), b.labels())?;
    Ok((distance_consistency(a) - distance_consistency(b)).abs())
}

/// Mean silhouette over a dissimilarity matrix. Points in singleton
/// categories score 0, as does `0 / 0`.
pub fn silhouette_diss(diss: &DissimilarityMatrix, labels: &[String]) -> Result<f64> {
    let groups = categories(labels);
    if groups.len() < 2 {
        return Err(Error::input(
            COMPONENT,
            format!("silhouette needs at least 2 categories, found {}", groups.len()),
        ));
    }
    let n = labels.len();
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i].as_str();
        if groups[own].len() == 1 {
            continue;
        }
        let mut a = 0.0;
        let mut b = f64::INFINITY;
        for (&label, members) in &groups {
            let sum: f64 = members.iter().map(|&j| diss.get(i, j)).sum();
            if label == own {
                a = sum / (members.len() - 1) as f64;
            } else {
                b = b.min(sum / members.len() as f64);
            }
        }
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}

pub fn silhouette(plot: &Scatterplot) -> Result<f64> {
    silhouette_diss(&plot.distances(), plot.labels())
}

/// Rotation in degrees, counterclockwise positive, that best maps the
/// centred `a` onto the centred `b` in the least-squares sense.
pub fn procrustes_rotation(a: &Scatterplot, b: &Scatterplot) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::input(
            COMPONENT,
            format!("Procrustes needs two plots of equal size >= 2, got {} and {}", a.len(), b.len()),
        ));
    }
    let centred = |p: &Scatterplot| {
        let n = p.len() as f64;
        let m = p.points().iter().fold([0.0, 0.0], |s, q| [s[0] + q[0], s[1] + q[1]]);
        let (mx, my) = (m[0] / n, m[1] / n);
        p.points()
            .iter()
            .map(|q| [q[0] - mx, q[1] - my])
            .collect::<Vec<_>>()
    };
    let (pa, pb) = (centred(a), centred(b));
    let spread = |p: &[[f64; 2]]| p.iter().map(|q| q[0] * q[0] + q[1] * q[1]).sum::<f64>();
    if spread(&pa) == 0.0 || spread(&pb) == 0.0 {
        return Err(Error::numerical(COMPONENT, "rotation undefined for coincident points"));
    }
    let (mut sin, mut cos) = (0.0, 0.0);
    for (p, q) in pa.iter().zip(&pb) {
        sin += p[0] * q[1] - p[1] * q[0];
        cos += p[0] * q[0] + p[1] * q[1];
    }
    Ok(sin.atan2(cos).to_degrees())
}

/// Places each document at the θ-weighted mean of the topic positions,
/// after normalizing each row of `theta` to sum to one.
pub fn convex_combination_layout(
    theta: &DMatrix<f64>,
    topic_positions: &[[f64; 2]],
    labels: &[String],
) -> Result<Scatterplot> {
    if theta.ncols() != topic_positions.len() {
        return Err(Error::input(
            COMPONENT,
            format!(
                "{} topic weights per document but {} topic positions",
                theta.ncols(),
                topic_positions.len()
            ),
        ));
    }
    let mut points = Vec::with_capacity(theta.nrows());
    for (i, row) in theta.row_iter().enumerate() {
        if row.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::input(COMPONENT, format!("topic weights of document {i} are not non-negative")));
        }
        let sum = row.sum();
        if sum <= 0.0 {
            return Err(Error::input(COMPONENT, format!("document {i} has all-zero topic weights")));
        }
        let mut p = [0.0, 0.0];
        for (w, t) in row.iter().zip(topic_positions) {
            let w = w / sum;
            p[0] += w * t[0];
            p[1] += w * t[1];
        }
        points.push(p);
    }
    Scatterplot::new(points, labels.to_vec())
}

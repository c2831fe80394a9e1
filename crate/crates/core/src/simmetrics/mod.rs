//! Similarity between two representations of the same labeled corpus.
//!
//! A representation is either a scatterplot or a high-dimensional
//! dissimilarity matrix (optionally with the vectors it came from). Local
//! metrics compare k-nearest-neighbour ranks, global metrics correlate
//! distances, and class-separation metrics compare category centroids.

mod geometry;
mod rank;

use std::borrow::Cow;
use std::path::Path;

use nalgebra::DMatrix;

pub use geometry::{
    categories, centroids, cluster_ordering, cluster_ordering_points, convex_combination_layout,
    distance_consistency, distance_consistency_points, gamma_dc, procrustes_rotation,
    shepard_correlations, silhouette, silhouette_diss,
};
pub use rank::{
    label_preservation, lcmc, lcmc_adjusted, mrre, trustworthiness_continuity, RankStructure,
};

use crate::embed::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::layout::Scatterplot;
use crate::numfmt::{fmt_opt, quantize};

const COMPONENT: &str = "compare";

/// Neighbourhood size used throughout the study.
pub const DEFAULT_K: usize = 7;

/// One side of a comparison.
#[derive(Debug, Clone, Copy)]
pub enum Representation<'a> {
    Plot(&'a Scatterplot),
    Dissimilarity(&'a DissimilarityMatrix),
    /// High-dimensional vectors (one row per document) together with their
    /// dissimilarity. Centroid metrics use the vectors.
    Embedded {
        diss: &'a DissimilarityMatrix,
        points: &'a DMatrix<f64>,
    },
}

impl<'a> Representation<'a> {
    pub fn len(&self) -> usize {
        match self {
            Self::Plot(p) => p.len(),
            Self::Dissimilarity(d) | Self::Embedded { diss: d, .. } => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dissimilarity(&self) -> Cow<'a, DissimilarityMatrix> {
        match *self {
            Self::Plot(p) => Cow::Owned(p.distances()),
            Self::Dissimilarity(d) | Self::Embedded { diss: d, .. } => Cow::Borrowed(d),
        }
    }

    fn points(&self) -> Option<Cow<'a, DMatrix<f64>>> {
        match *self {
            Self::Plot(p) => Some(Cow::Owned(p.to_matrix())),
            Self::Embedded { points, .. } => Some(Cow::Borrowed(points)),
            Self::Dissimilarity(_) => None,
        }
    }
}

/// Eq. (3)-style local aggregate.
pub fn aggregate_alpha(t: f64, c: f64, mm: f64, mf: f64, lc: f64, lp: f64) -> f64 {
    ((t + c + mm + mf) / 4.0 + lc + lp) / 3.0
}

/// Global aggregate mapped from `[-1, 1]` correlations to `[0, 1]`.
pub fn aggregate_beta(pc: f64, sc: f64, co: f64) -> f64 {
    0.5 * ((0.5 * (pc + 1.0) + 0.5 * (sc + 1.0)) / 2.0 + (co + 1.0) / 2.0)
}

pub fn aggregate_gamma(gamma_dc: f64) -> f64 {
    1.0 - gamma_dc
}

/// `1 − |high − low|`: how closely the layout-level similarity follows the
/// high-dimensional one.
pub fn adaptability(high: f64, low: f64) -> f64 {
    1.0 - (high - low).abs()
}

/// Identifies the two layouts behind a record.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairInfo {
    pub pair_id: String,
    pub corpus: String,
    pub embedding: String,
    pub dr: String,
    pub varied_factor: String,
    pub value_a: String,
    pub value_b: String,
}

/// All metrics for one pair. Metrics that do not apply to the pair (e.g.
/// centroid metrics against a bare dissimilarity matrix) are `None`, as are
/// aggregates depending on them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityRecord {
    pub pair: PairInfo,
    pub alpha_t: Option<f64>,
    pub alpha_c: Option<f64>,
    pub alpha_mm: Option<f64>,
    pub alpha_mf: Option<f64>,
    pub alpha_lc: Option<f64>,
    pub alpha_lp: Option<f64>,
    pub beta_pc: Option<f64>,
    pub beta_sc: Option<f64>,
    pub beta_co: Option<f64>,
    pub gamma_dc: Option<f64>,
    pub gamma_sc_abs_diff: Option<f64>,
    pub theta_pa: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

/// Record CSV header.
pub const RECORD_COLUMNS: [&str; 22] = [
    "pair_id",
    "corpus",
    "embedding",
    "dr",
    "varied_factor",
    "value_a",
    "value_b",
    "alpha_T",
    "alpha_C",
    "alpha_MM",
    "alpha_MF",
    "alpha_LC",
    "alpha_LP",
    "beta_PC",
    "beta_SC",
    "beta_CO",
    "gamma_DC",
    "gamma_SC_abs_diff",
    "theta_PA",
    "alpha",
    "beta",
    "gamma",
];

/// Metric columns (everything after the pair description).
pub const METRIC_COLUMNS: [&str; 15] = [
    "alpha_T",
    "alpha_C",
    "alpha_MM",
    "alpha_MF",
    "alpha_LC",
    "alpha_LP",
    "beta_PC",
    "beta_SC",
    "beta_CO",
    "gamma_DC",
    "gamma_SC_abs_diff",
    "theta_PA",
    "alpha",
    "beta",
    "gamma",
];

impl SimilarityRecord {
    fn slots(&self) -> [Option<f64>; 15] {
        [
            self.alpha_t,
            self.alpha_c,
            self.alpha_mm,
            self.alpha_mf,
            self.alpha_lc,
            self.alpha_lp,
            self.beta_pc,
            self.beta_sc,
            self.beta_co,
            self.gamma_dc,
            self.gamma_sc_abs_diff,
            self.theta_pa,
            self.alpha,
            self.beta,
            self.gamma,
        ]
    }

    fn slots_mut(&mut self) -> [&mut Option<f64>; 15] {
        [
            &mut self.alpha_t,
            &mut self.alpha_c,
            &mut self.alpha_mm,
            &mut self.alpha_mf,
            &mut self.alpha_lc,
            &mut self.alpha_lp,
            &mut self.beta_pc,
            &mut self.beta_sc,
            &mut self.beta_co,
            &mut self.gamma_dc,
            &mut self.gamma_sc_abs_diff,
            &mut self.theta_pa,
            &mut self.alpha,
            &mut self.beta,
            &mut self.gamma,
        ]
    }

    /// Every value rounded as it is written to CSV.
    pub fn quantized(mut self) -> Self {
        for v in self.slots_mut() {
            *v = v.map(quantize);
        }
        self
    }

    /// Value of a metric column by its CSV name.
    pub fn metric(&self, column: &str) -> Option<f64> {
        let idx = METRIC_COLUMNS.iter().position(|&c| c == column)?;
        self.slots()[idx]
    }

    /// Recomputes `alpha`, `beta` and `gamma` from the components.
    pub fn with_aggregates(mut self) -> Self {
        self.alpha = (|| {
            Some(aggregate_alpha(
                self.alpha_t?,
                self.alpha_c?,
                self.alpha_mm?,
                self.alpha_mf?,
                self.alpha_lc?,
                self.alpha_lp?,
            ))
        })();
        self.beta = (|| Some(aggregate_beta(self.beta_pc?, self.beta_sc?, self.beta_co?)))();
        self.gamma = self.gamma_dc.map(aggregate_gamma);
        self
    }

    fn to_row(&self) -> Vec<String> {
        let p = &self.pair;
        let mut row = vec![
            p.pair_id.clone(),
            p.corpus.clone(),
            p.embedding.clone(),
            p.dr.clone(),
            p.varied_factor.clone(),
            p.value_a.clone(),
            p.value_b.clone(),
        ];
        row.extend(self.slots().iter().map(|&v| fmt_opt(v)));
        row
    }
}

/// Computes every applicable metric between `a` and `b`.
///
/// `a` plays the reference role for trustworthiness/continuity and MRRE.
pub fn compare(
    a: Representation<'_>,
    b: Representation<'_>,
    labels: &[String],
    k: usize,
) -> Result<SimilarityRecord> {
    let n = labels.len();
    if a.len() != n || b.len() != n {
        return Err(Error::input(
            COMPONENT,
            format!("sizes differ: {} and {} points for {n} labels", a.len(), b.len()),
        ));
    }
    for side in [a, b] {
        if let Representation::Plot(p) = side {
            if p.labels() != labels {
                return Err(Error::input(COMPONENT, "scatterplot labels differ from the corpus labels"));
            }
        }
    }
    let tag = |metric: &'static str| move |e: Error| Error::metric(metric, e);

    let (da, db) = (a.dissimilarity(), b.dissimilarity());
    let ra = RankStructure::new(&da, k).map_err(tag("rank_structure"))?;
    let rb = RankStructure::new(&db, k).map_err(tag("rank_structure"))?;
    let (t, c) = trustworthiness_continuity(&ra, &rb).map_err(tag("trustworthiness_continuity"))?;
    let (mm, mf) = mrre(&ra, &rb).map_err(tag("mrre"))?;
    let lc = lcmc(&ra, &rb).map_err(tag("lcmc"))?;
    let lp = label_preservation(&ra, &rb, labels).map_err(tag("label_preservation"))?;
    let (pc, sc) =
        shepard_correlations(&da.condensed(), &db.condensed()).map_err(tag("shepard_correlations"))?;

    let mut record = SimilarityRecord {
        alpha_t: Some(t),
        alpha_c: Some(c),
        alpha_mm: Some(mm),
        alpha_mf: Some(mf),
        alpha_lc: Some(lc),
        alpha_lp: Some(lp),
        beta_pc: Some(pc),
        beta_sc: Some(sc),
        ..Default::default()
    };

    if let (Some(pa), Some(pb)) = (a.points(), b.points()) {
        record.beta_co =
            Some(cluster_ordering_points(&pa, &pb, labels).map_err(tag("cluster_ordering"))?);
        let dsc_a = distance_consistency_points(&pa, labels);
        let dsc_b = distance_consistency_points(&pb, labels);
        record.gamma_dc = Some((dsc_a - dsc_b).abs());
        let sil_a = silhouette_diss(&da, labels).map_err(tag("silhouette"))?;
        let sil_b = silhouette_diss(&db, labels).map_err(tag("silhouette"))?;
        record.gamma_sc_abs_diff = Some((sil_a - sil_b).abs());
    }
    if let (Representation::Plot(pa), Representation::Plot(pb)) = (a, b) {
        record.theta_pa = Some(procrustes_rotation(pa, pb).map_err(tag("procrustes_rotation"))?);
    }
    Ok(record.with_aggregates())
}

/// Writes records with the [`RECORD_COLUMNS`] header; absent values are
/// empty fields.
pub fn write_records(path: &Path, records: &[SimilarityRecord]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let to_err = |e: csv::Error| Error::run(COMPONENT, format!("csv: {e}"));
        w.write_record(RECORD_COLUMNS).map_err(to_err)?;
        for r in records {
            w.write_record(r.to_row()).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<SimilarityRecord>> {
    let format_err = |line: usize, message: String| Error::Format {
        component: COMPONENT,
        path: path.display().to_string(),
        line,
        message,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| format_err(1, e.to_string()))?.clone();
    if header.iter().ne(RECORD_COLUMNS) {
        return Err(format_err(1, "unexpected record columns".into()));
    }
    let mut out = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| format_err(line, e.to_string()))?;
        let field = |i: usize| row.get(i).unwrap_or_default().to_string();
        let mut rec = SimilarityRecord {
            pair: PairInfo {
                pair_id: field(0),
                corpus: field(1),
                embedding: field(2),
                dr: field(3),
                varied_factor: field(4),
                value_a: field(5),
                value_b: field(6),
            },
            ..Default::default()
        };
        for (slot, i) in rec.slots_mut().into_iter().zip(7..) {
            let s = field(i);
            *slot = if s.is_empty() {
                None
            } else {
                Some(s.parse().map_err(|_| format_err(line, format!("bad number `{s}`")))?)
            };
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot() -> Scatterplot {
        let pts = vec![
            [0.0, 0.0],
            [1.0, 0.2],
            [0.4, 1.1],
            [5.0, 5.0],
            [5.5, 4.2],
            [6.1, 5.3],
            [-3.0, 4.0],
            [-2.2, 4.9],
            [-3.5, 3.1],
            [2.0, -2.0],
        ];
        let labels = "aaabbbcccc".chars().map(String::from).collect();
        Scatterplot::new(pts, labels).unwrap()
    }

    #[test]
    fn aggregates() {
        assert_eq!(aggregate_alpha(1.0, 1.0, 1.0, 1.0, 1.0, 1.0), 1.0);
        assert!((aggregate_alpha(0.8, 0.8, 0.8, 0.8, 0.5, 0.6) - 1.9 / 3.0).abs() < 1e-15);
        assert_eq!(aggregate_beta(0.0, 0.0, 0.0), 0.5);
        assert_eq!(aggregate_beta(-1.0, -1.0, -1.0), 0.0);
        assert_eq!(aggregate_gamma(0.2), 0.8);
        assert!((adaptability(0.9, 0.7) - 0.8).abs() < 1e-15);
        assert_eq!(adaptability(1.0, 0.0), 0.0);
    }

    #[test]
    fn identity_pair() {
        let p = plot();
        let r = compare(Representation::Plot(&p), Representation::Plot(&p), p.labels(), 3).unwrap();
        assert_eq!((r.alpha, r.beta, r.gamma), (Some(1.0), Some(1.0), Some(1.0)));
        assert_eq!(r.theta_pa, Some(0.0));
    }

    #[test]
    fn dissimilarity_side_omits_centroid_metrics() {
        let p = plot();
        let d = p.distances();
        let r = compare(Representation::Dissimilarity(&d), Representation::Plot(&p), p.labels(), 3)
            .unwrap();
        assert!(r.alpha.is_some() && r.beta_pc.is_some() && r.beta_sc.is_some());
        assert!(r.beta_co.is_none() && r.gamma_dc.is_none() && r.theta_pa.is_none());
        assert!(r.beta.is_none() && r.gamma.is_none());
    }

    #[test]
    fn rotation_reported() {
        let p = plot();
        let q = p.transformed(117.0, [3.0, -8.0]);
        let same = compare(Representation::Plot(&p), Representation::Plot(&p), p.labels(), 3).unwrap();
        let rot = compare(Representation::Plot(&p), Representation::Plot(&q), p.labels(), 3).unwrap();
        assert!((rot.theta_pa.unwrap() - 117.0).abs() < 1e-9);
        assert!((rot.alpha.unwrap() - same.alpha.unwrap()).abs() < 1e-9);
        assert!((rot.beta.unwrap() - same.beta.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let p = plot();
        let mut r = compare(Representation::Plot(&p), Representation::Plot(&p), p.labels(), 3).unwrap();
        r.pair.pair_id = "c=x|dr=mds".into();
        r.beta_co = None;
        let r = r.with_aggregates();
        write_records(&path, std::slice::from_ref(&r)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("pair_id,corpus,embedding,dr,varied_factor,value_a,value_b,alpha_T,"));
        assert_eq!(read_records(&path).unwrap(), vec![r]);
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::numfmt::{fmt_opt, fmt_sig};
use crate::rng;
use crate::simmetrics::{PairInfo, SimilarityRecord, METRIC_COLUMNS};
use crate::stats;

use super::jobs::{keys, parse_pair_id, ExperimentKind};
use super::runner::AdaptabilityRecord;
use super::COMPONENT;

/// Outcome of an exact one-sided sign test.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTestResult {
    pub hypothesis: String,
    pub n_trials: u64,
    pub n_successes: u64,
    pub p_value: f64,
}

impl BinaryTestResult {
    /// Null hypothesis rejected at the 5% level.
    pub fn rejected(&self) -> bool {
        self.p_value < 0.05
    }
}

/// Counts `b_i > a_i` (ties are failures) and returns the upper binomial
/// tail `P(X ≥ n)` under `p = 1/2`.
pub fn binary_test(a: &[f64], b: &[f64]) -> Result<BinaryTestResult> {
    if a.len() != b.len() {
        return Err(Error::input(
            COMPONENT,
            format!("binary test needs paired values, got {} and {}", a.len(), b.len()),
        ));
    }
    if a.is_empty() {
        return Err(Error::input(COMPONENT, "binary test needs at least one pair"));
    }
    let m = a.len() as u64;
    let n = a.iter().zip(b).filter(|(x, y)| y > x).count() as u64;
    Ok(BinaryTestResult {
        hypothesis: String::new(),
        n_trials: m,
        n_successes: n,
        p_value: stats::binomial_upper_tail(m, n),
    })
}

pub fn write_binary_tests(path: &Path, results: &[BinaryTestResult]) -> Result<()> {
    let mut text = String::from("hypothesis,m,n,p\n");
    for r in results {
        text.push_str(&format!(
            "{},{},{},{}\n",
            r.hypothesis,
            r.n_trials,
            r.n_successes,
            fmt_sig(r.p_value)
        ));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Five-number summary plus mean and count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Summary {
        count: v.len(),
        min: v[0],
        q1: stats::quantile_sorted(&v, 0.25),
        median: stats::quantile_sorted(&v, 0.5),
        q3: stats::quantile_sorted(&v, 0.75),
        max: v[v.len() - 1],
        mean: v.iter().sum::<f64>() / v.len() as f64,
    })
}

/// One pair with its three stability values (α, β, γ or α̃, β̃, γ̃).
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub pair: PairInfo,
    pub values: [Option<f64>; 3],
}

pub const AGGREGATE_NAMES: [&str; 3] = ["alpha", "beta", "gamma"];
pub const TILDE_NAMES: [&str; 3] = ["alpha_tilde", "beta_tilde", "gamma_tilde"];

pub fn rows_from_records(records: &[SimilarityRecord]) -> Vec<StabilityRow> {
    records
        .iter()
        .map(|r| StabilityRow {
            pair: r.pair.clone(),
            values: [r.alpha, r.beta, r.gamma],
        })
        .collect()
}

pub fn rows_from_adaptability(records: &[AdaptabilityRecord]) -> Vec<StabilityRow> {
    records
        .iter()
        .map(|r| StabilityRow {
            pair: r.pair.clone(),
            values: r.tilde,
        })
        .collect()
}

/// Columns a summary can be grouped by.
pub const GROUP_COLUMNS: [&str; 5] = ["corpus", "embedding", "dr", "varied_factor", "value_a"];
pub const DEFAULT_GROUP_BY: [&str; 3] = ["corpus", "embedding", "dr"];

fn pair_field<'a>(p: &'a PairInfo, column: &str) -> &'a str {
    match column {
        "corpus" => &p.corpus,
        "embedding" => &p.embedding,
        "dr" => &p.dr,
        "varied_factor" => &p.varied_factor,
        "value_a" => &p.value_a,
        _ => "",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group: Vec<String>,
    pub metric: String,
    pub summary: Summary,
}

/// Per-group distribution of each stability value, groups in sorted order.
pub fn distribution_summary(
    rows: &[StabilityRow],
    names: [&str; 3],
    group_by: &[&str],
) -> Result<Vec<SummaryRow>> {
    if let Some(bad) = group_by.iter().find(|c| !GROUP_COLUMNS.contains(c)) {
        return Err(Error::input(COMPONENT, format!("cannot group by `{bad}`")));
    }
    let mut groups: BTreeMap<Vec<String>, [Vec<f64>; 3]> = BTreeMap::new();
    for r in rows {
        let key = group_by.iter().map(|c| pair_field(&r.pair, c).to_string()).collect();
        let slot = groups.entry(key).or_default();
        for (i, v) in r.values.iter().enumerate() {
            if let Some(v) = v {
                slot[i].push(*v);
            }
        }
    }
    let mut out = Vec::new();
    for (group, values) in groups {
        for (name, v) in names.iter().zip(&values) {
            if let Some(summary) = summarize(v) {
                out.push(SummaryRow {
                    group: group.clone(),
                    metric: name.to_string(),
                    summary,
                });
            }
        }
    }
    Ok(out)
}

pub fn write_summary(path: &Path, group_by: &[&str], rows: &[SummaryRow]) -> Result<()> {
    let mut header: Vec<&str> = group_by.to_vec();
    header.extend(["metric", "count", "min", "q1", "median", "q3", "max", "mean"]);
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let to_err = |e: csv::Error| Error::run(COMPONENT, format!("csv: {e}"));
        w.write_record(&header).map_err(to_err)?;
        for r in rows {
            let s = &r.summary;
            let mut row = r.group.clone();
            row.push(r.metric.clone());
            row.push(s.count.to_string());
            row.extend([s.min, s.q1, s.median, s.q3, s.max, s.mean].map(fmt_sig));
            w.write_record(&row).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Metric columns entering the correlation analysis: the ten metrics, the
/// silhouette difference and the Procrustes rotation.
pub fn correlation_columns() -> &'static [&'static str] {
    &METRIC_COLUMNS[..12]
}

/// Symmetric matrix of Pearson correlations between metric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// `None` where a column is constant over the sample.
    pub values: Vec<Vec<Option<f64>>>,
    pub sample_size: usize,
}

/// Correlations over a seeded sample of at most `sample_size` complete
/// records, drawn round-robin across corpora so that each contributes
/// equally when possible.
pub fn metric_correlation_matrix(
    records: &[SimilarityRecord],
    sample_size: usize,
    seed: u64,
) -> Result<CorrelationMatrix> {
    let cols = correlation_columns();
    let complete: Vec<&SimilarityRecord> = records
        .iter()
        .filter(|r| cols.iter().all(|c| r.metric(c).is_some()))
        .collect();
    if complete.len() < 2 {
        return Err(Error::input(
            COMPONENT,
            format!("correlation needs at least 2 complete records, found {}", complete.len()),
        ));
    }
    let mut by_corpus: BTreeMap<&str, Vec<&SimilarityRecord>> = BTreeMap::new();
    for r in complete {
        by_corpus.entry(r.pair.corpus.as_str()).or_default().push(r);
    }
    let mut rng = rng::stream(seed, 0x434f5252);
    for group in by_corpus.values_mut() {
        group.shuffle(&mut rng);
    }
    let mut sample = Vec::new();
    let mut depth = 0;
    while sample.len() < sample_size {
        let before = sample.len();
        for group in by_corpus.values() {
            if sample.len() < sample_size {
                if let Some(r) = group.get(depth) {
                    sample.push(*r);
                }
            }
        }
        if sample.len() == before {
            break;
        }
        depth += 1;
    }
    if sample.len() < 2 {
        return Err(Error::input(COMPONENT, "correlation sample has fewer than 2 records"));
    }
    let columns: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| sample.iter().map(|r| r.metric(c).unwrap_or(f64::NAN)).collect())
        .collect();
    let values = (0..cols.len())
        .map(|i| {
            (0..cols.len())
                .map(|j| stats::pearson(&columns[i], &columns[j]))
                .collect()
        })
        .collect();
    Ok(CorrelationMatrix {
        names: cols.iter().map(|s| s.to_string()).collect(),
        values,
        sample_size: sample.len(),
    })
}

pub fn write_correlation(path: &Path, m: &CorrelationMatrix) -> Result<()> {
    let mut text = format!("metric,{}\n", m.names.join(","));
    for (name, row) in m.names.iter().zip(&m.values) {
        let cells: Vec<String> = row.iter().map(|&v| fmt_opt(v)).collect();
        text.push_str(&format!("{name},{}\n", cells.join(",")));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// The pipeline change a binary test evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// tf-idf weighting (b) against raw counts (a), direct placement.
    Tfidf,
    /// Topic convex-combination placement (b) against direct placement (a).
    TopicConvex,
}

impl Variant {
    fn field(self) -> &'static str {
        match self {
            Variant::Tfidf => keys::WEIGHTING,
            Variant::TopicConvex => keys::PLACEMENT,
        }
    }

    fn values(self) -> (&'static str, &'static str) {
        match self {
            Variant::Tfidf => ("raw", "tfidf"),
            Variant::TopicConvex => ("direct", "topic_convex"),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Variant::Tfidf => "tfidf",
            Variant::TopicConvex => "convex",
        }
    }
}

/// Sign tests of `variant` over matched pairs: one test per (stability,
/// embedding, [weighting,] DR, metric [, corpus]) cell.
///
/// Hypothesis labels read `variant|stability|embedding|...|metric`.
pub fn variant_binary_tests(
    rows: &[StabilityRow],
    stability: &str,
    variant: Variant,
    names: [&str; 3],
    per_corpus: bool,
) -> Vec<BinaryTestResult> {
    let field = variant.field();
    let (va, vb) = variant.values();
    // matched key -> (a values, b values)
    let mut matched: BTreeMap<BTreeMap<String, String>, [Option<[Option<f64>; 3]>; 2]> =
        BTreeMap::new();
    for r in rows {
        let mut fields = parse_pair_id(&r.pair.pair_id);
        if variant == Variant::Tfidf && fields.get(keys::PLACEMENT).map(String::as_str) != Some("direct") {
            continue;
        }
        let Some(value) = fields.remove(field) else { continue };
        let side = if value == va {
            0
        } else if value == vb {
            1
        } else {
            continue;
        };
        matched.entry(fields).or_default()[side] = Some(r.values);
    }
    let mut cells: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (fields, sides) in &matched {
        let [Some(a), Some(b)] = sides else { continue };
        let get = |k: &str| fields.get(k).map(String::as_str).unwrap_or_default();
        let mut parts = vec![variant.label(), stability, get(keys::EMBEDDING)];
        if variant == Variant::TopicConvex {
            parts.push(get(keys::WEIGHTING));
        }
        parts.push(get(keys::DR));
        for (i, name) in names.iter().enumerate() {
            let (Some(x), Some(y)) = (a[i], b[i]) else { continue };
            let mut label = parts.clone();
            label.push(name);
            if per_corpus {
                label.push(get(keys::CORPUS));
            }
            let cell = cells.entry(label.join("|")).or_default();
            cell.0.push(x);
            cell.1.push(y);
        }
    }
    cells
        .into_iter()
        .filter_map(|(hypothesis, (a, b))| {
            binary_test(&a, &b).ok().map(|r| BinaryTestResult { hypothesis, ..r })
        })
        .collect()
}

/// Binary tests for both variants over the three experiments; S1 uses the
/// adaptability values, S2 and S3 the aggregates.
pub fn study_binary_tests(
    experiments: &BTreeMap<ExperimentKind, super::runner::Experiment>,
    variants: &[Variant],
    per_corpus: bool,
) -> Vec<BinaryTestResult> {
    let mut out = Vec::new();
    for &variant in variants {
        for (kind, exp) in experiments {
            let (rows, names) = if *kind == ExperimentKind::InputData {
                (rows_from_adaptability(&exp.adaptability), TILDE_NAMES)
            } else {
                (rows_from_records(&exp.records), AGGREGATE_NAMES)
            };
            out.extend(variant_binary_tests(&rows, kind.stability(), variant, names, per_corpus));
        }
    }
    out
}

//! Stability experiments: layout grids, pairings, similarity records,
//! distribution summaries, metric correlations and binary sign tests.
//!
//! All outputs are sorted by provenance before they are written, so results
//! do not depend on the number of workers.

mod analysis;
mod config;
mod jobs;
mod runner;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::warn;

pub use analysis::{
    binary_test, correlation_columns, distribution_summary, metric_correlation_matrix,
    rows_from_adaptability, rows_from_records, study_binary_tests, summarize,
    variant_binary_tests, write_binary_tests, write_correlation, write_summary, BinaryTestResult,
    CorrelationMatrix, StabilityRow, Summary, SummaryRow, Variant, AGGREGATE_NAMES,
    DEFAULT_GROUP_BY, GROUP_COLUMNS, TILDE_NAMES,
};
pub use config::{
    CorpusSpec, DrGrids, EmbeddingSpec, MdsGrid, Placement, SomGrid, StudyConfig, TsneGrid,
};
pub use jobs::{
    embedding_label, enumerate_layout_jobs, grid_methods, keys, make_pairings, parse_pair_id,
    ExperimentKind, LayoutJob, PairingSpec,
};
pub use runner::{
    compute_layouts, experiment_from_layouts, load_corpora, read_adaptability, run_experiment,
    write_adaptability, AdaptabilityRecord, Experiment, LayoutSet, RunOptions,
    ADAPTABILITY_COLUMNS,
};

use crate::error::{Error, Result};
use crate::simmetrics::{write_records, SimilarityRecord};

const COMPONENT: &str = "study";

/// Records of all three experiments over one set of layouts.
pub fn run_all_experiments(
    config: &StudyConfig,
    options: &RunOptions,
) -> Result<(LayoutSet, BTreeMap<ExperimentKind, Experiment>)> {
    let set = compute_layouts(config, options)?;
    let mut experiments = BTreeMap::new();
    for kind in ExperimentKind::ALL {
        experiments.insert(kind, experiment_from_layouts(config, &set, kind, options)?);
    }
    Ok((set, experiments))
}

fn variant_study(config: &StudyConfig, options: &RunOptions, variant: Variant) -> Result<Vec<BinaryTestResult>> {
    let (_, experiments) = run_all_experiments(config, options)?;
    let tests = study_binary_tests(&experiments, &[variant], config.per_corpus_tests);
    if tests.is_empty() {
        return Err(Error::input(
            COMPONENT,
            match variant {
                Variant::Tfidf => "no matched raw/tf-idf pairs: configure both weightings",
                Variant::TopicConvex => {
                    "no matched direct/topic_convex pairs: configure both placements and a topic model"
                }
            },
        ));
    }
    Ok(tests)
}

/// Does tf-idf weighting beat raw counts? One sign test per cell.
pub fn tfidf_binary_study(config: &StudyConfig, options: &RunOptions) -> Result<Vec<BinaryTestResult>> {
    variant_study(config, options, Variant::Tfidf)
}

/// Does placing documents by topic convex combination beat applying the DR
/// to document vectors? One sign test per cell.
pub fn convex_combination_binary_study(
    config: &StudyConfig,
    options: &RunOptions,
) -> Result<Vec<BinaryTestResult>> {
    variant_study(config, options, Variant::TopicConvex)
}

/// Files written by [`run_study`].
#[derive(Debug, Clone, Default)]
pub struct StudyOutputs {
    pub files: Vec<PathBuf>,
    pub n_layouts: usize,
    pub n_failed: usize,
}

/// Runs the full study and writes
/// `records_{kind}.csv`, `summary_{kind}.csv`, `adaptability_input_data.csv`,
/// `binary_tests.csv` and `metric_correlation.csv` into `out_dir`.
pub fn run_study(config: &StudyConfig, options: &RunOptions, out_dir: &Path) -> Result<StudyOutputs> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let (set, experiments) = run_all_experiments(config, options)?;
    let mut files = Vec::new();
    for (kind, exp) in &experiments {
        let path = out_dir.join(format!("records_{kind}.csv"));
        write_records(&path, &exp.records)?;
        files.push(path);
        if *kind == ExperimentKind::InputData {
            let path = out_dir.join("adaptability_input_data.csv");
            write_adaptability(&path, &exp.adaptability)?;
            files.push(path);
        }
    }
    let report = ReportOptions {
        per_corpus: config.per_corpus_tests,
        correlation_sample_size: config.correlation_sample_size,
        correlation_seed: config.correlation_seed,
    };
    files.extend(write_report(&experiments, &report, out_dir)?);
    Ok(StudyOutputs {
        files,
        n_layouts: set.layouts.len(),
        n_failed: set.failures.len(),
    })
}

/// Settings of the derived outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    pub per_corpus: bool,
    pub correlation_sample_size: usize,
    pub correlation_seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            per_corpus: false,
            correlation_sample_size: 3000,
            correlation_seed: 0,
        }
    }
}

/// Writes `summary_{kind}.csv` for every experiment, `binary_tests.csv`
/// and, when the records allow it, `metric_correlation.csv`.
///
/// The input-data summary covers both the layout-level aggregates and the
/// adaptabilities. Values are rounded as in the record files first, so the
/// outputs are the same whether the records come from memory or from disk.
pub fn write_report(
    experiments: &BTreeMap<ExperimentKind, Experiment>,
    options: &ReportOptions,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let experiments: BTreeMap<ExperimentKind, Experiment> = experiments
        .iter()
        .map(|(kind, exp)| {
            let exp = Experiment {
                records: exp.records.iter().cloned().map(SimilarityRecord::quantized).collect(),
                adaptability: exp.adaptability.iter().cloned().map(AdaptabilityRecord::quantized).collect(),
            };
            (*kind, exp)
        })
        .collect();
    let mut files = Vec::new();
    let mut all_records = Vec::new();
    for (kind, exp) in &experiments {
        let mut rows =
            distribution_summary(&rows_from_records(&exp.records), AGGREGATE_NAMES, &DEFAULT_GROUP_BY)?;
        if !exp.adaptability.is_empty() {
            rows.extend(distribution_summary(
                &rows_from_adaptability(&exp.adaptability),
                TILDE_NAMES,
                &DEFAULT_GROUP_BY,
            )?);
        }
        let path = out_dir.join(format!("summary_{kind}.csv"));
        write_summary(&path, &DEFAULT_GROUP_BY, &sorted(rows))?;
        files.push(path);
        all_records.extend(exp.records.iter().cloned());
    }

    let tests = study_binary_tests(
        &experiments,
        &[Variant::Tfidf, Variant::TopicConvex],
        options.per_corpus,
    );
    let path = out_dir.join("binary_tests.csv");
    write_binary_tests(&path, &tests)?;
    files.push(path);

    all_records.sort_by(|a, b| a.pair.cmp(&b.pair));
    match metric_correlation_matrix(&all_records, options.correlation_sample_size, options.correlation_seed) {
        Ok(m) => {
            let path = out_dir.join("metric_correlation.csv");
            write_correlation(&path, &m)?;
            files.push(path);
        }
        Err(e) => warn!("metric correlation skipped: {e}"),
    }
    Ok(files)
}

fn sorted(mut rows: Vec<SummaryRow>) -> Vec<SummaryRow> {
    rows.sort_by(|a, b| a.group.cmp(&b.group).then_with(|| a.metric.cmp(&b.metric)));
    rows
}

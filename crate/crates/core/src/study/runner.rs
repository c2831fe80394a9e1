use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use log::{info, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::corpus::{self, synthetic, JitterSpec, SparseDtm};
use crate::embed::{
    self, cosine_matrix, DissimilarityMatrix, EmbeddedCorpus, EmbeddingKind, TopicFactorization,
    Vectors, Weighting,
};
use crate::error::{Error, Result};
use crate::layout::{self, read_scatterplot, write_scatterplot, Provenance, Scatterplot};
use crate::numfmt::{fmt_opt, fmt_sig, quantize};
use crate::simmetrics::{adaptability, compare, PairInfo, Representation, SimilarityRecord};

use super::config::{EmbeddingSpec, Placement, StudyConfig};
use super::jobs::{enumerate_layout_jobs, make_pairings, ExperimentKind, LayoutJob, PairingSpec};
use super::COMPONENT;

/// Execution settings that do not affect results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 means one per logical processor.
    pub workers: usize,
    /// Directory holding one scatterplot file per finished layout.
    pub cache_dir: Option<PathBuf>,
}

impl RunOptions {
    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::run(COMPONENT, format!("cannot start worker pool: {e}")))
    }
}

/// Loads or generates every configured corpus.
pub fn load_corpora(config: &StudyConfig) -> Result<BTreeMap<String, SparseDtm>> {
    config
        .corpora
        .iter()
        .map(|c| {
            let dtm = match (&c.dtm, &c.synthetic) {
                (Some(path), _) => corpus::read_dtm(path)?,
                (None, Some(spec)) => synthetic::gaussian_blobs(spec)?,
                (None, None) => unreachable!("validated config"),
            };
            Ok((c.name.clone(), dtm))
        })
        .collect()
}

/// Layouts of one study, keyed by provenance.
#[derive(Debug, Clone)]
pub struct LayoutSet {
    pub corpora: BTreeMap<String, SparseDtm>,
    pub layouts: BTreeMap<Provenance, Scatterplot>,
    /// Failed jobs with their error message.
    pub failures: Vec<(Provenance, String)>,
}

struct Embedding {
    corpus: EmbeddedCorpus,
    topics: Option<TopicFactorization>,
}

type EmbeddingKey = (String, String, EmbeddingSpec);

fn embedding_key(job: &LayoutJob) -> EmbeddingKey {
    (job.corpus.clone(), fmt_sig(job.lambda), job.embedding)
}

fn jittered(dtm: &SparseDtm, lambda: f64, seed: u64) -> Result<SparseDtm> {
    Ok(corpus::jitter(dtm, &JitterSpec::new(lambda, seed)?))
}

fn compute_embedding(dtm: &SparseDtm, spec: EmbeddingSpec, config: &StudyConfig) -> Result<Embedding> {
    let matrix = match spec.weighting {
        Weighting::Raw => dtm.to_matrix(),
        Weighting::Tfidf => corpus::apply_tfidf(dtm),
    };
    let k = spec.topics.unwrap_or(0);
    let (corpus, topics) = match spec.kind {
        EmbeddingKind::Vsm => (embed::embed_vsm(&matrix, spec.weighting), None),
        EmbeddingKind::Lsi => {
            let (c, t) = embed::embed_lsi(&matrix, k, spec.weighting)?;
            (c, Some(t))
        }
        EmbeddingKind::Nmf => {
            let (c, t) = embed::embed_nmf(
                &matrix,
                k,
                config.nmf_max_iter,
                config.embedding_seed,
                spec.weighting,
            )?;
            (c, Some(t))
        }
    };
    Ok(Embedding { corpus, topics })
}

fn corpus_digest(dtm: &SparseDtm) -> String {
    let mut h = Sha256::new();
    for (d, t, f) in dtm.entries() {
        h.update(format!("{d} {t} {f}\n"));
    }
    for l in dtm.labels() {
        h.update(format!("{l}\n"));
    }
    hex::encode(h.finalize())
}

/// Cache file for a job: SHA-256 of its provenance plus the settings that
/// shape the embedding.
fn cache_path(dir: &Path, job: &LayoutJob, config: &StudyConfig, digest: &str) -> PathBuf {
    let mut h = Sha256::new();
    for (k, v) in &job.provenance.0 {
        h.update(format!("{k}={v}\n"));
    }
    h.update(format!(
        "embedding_seed={}\nnmf_max_iter={}\ncorpus_digest={digest}\n",
        config.embedding_seed, config.nmf_max_iter
    ));
    dir.join(format!("{}.txt", hex::encode(h.finalize())))
}

/// Computes one layout; coordinates are quantized to the file precision.
fn run_job(job: &LayoutJob, emb: &Embedding, labels: &[String]) -> Result<Scatterplot> {
    let plot = match job.placement {
        Placement::Direct => {
            layout::layout(&emb.corpus, labels, &job.params, job.provenance.clone())?
        }
        Placement::TopicConvex => {
            let topics = emb.topics.as_ref().ok_or_else(|| {
                Error::input(COMPONENT, "topic placement needs a topic-model embedding")
            })?;
            let topic_corpus = EmbeddedCorpus::new(
                Vectors::Dense(topics.topic_term.clone()),
                emb.corpus.info(),
            )?;
            let positions = layout::layout_points(&topic_corpus, &job.params)?;
            // LSI weights can be negative; their magnitudes act as weights
            let theta = topics.doc_topic.map(f64::abs);
            crate::simmetrics::convex_combination_layout(&theta, &positions, labels)?
                .with_provenance(job.provenance.clone())
        }
    };
    Ok(plot.quantized())
}

fn load_cached(path: &Path, job: &LayoutJob, labels: &[String]) -> Option<Scatterplot> {
    if !path.exists() {
        return None;
    }
    match read_scatterplot(path) {
        Ok(p) if p.provenance == job.provenance && p.labels() == labels => Some(p),
        Ok(_) => {
            warn!("cache entry {} does not match its job; recomputing", path.display());
            None
        }
        Err(e) => {
            warn!("unreadable cache entry {}: {e}; recomputing", path.display());
            None
        }
    }
}

fn store_cached(path: &Path, plot: &Scatterplot) -> Result<()> {
    let tmp = path.with_extension("tmp");
    write_scatterplot(plot, &tmp)?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Runs every layout job of `config`. Failed jobs are logged and recorded
/// in [`LayoutSet::failures`]; the call only fails when no layout succeeds.
pub fn compute_layouts(config: &StudyConfig, options: &RunOptions) -> Result<LayoutSet> {
    let jobs = enumerate_layout_jobs(config)?;
    let corpora = load_corpora(config)?;
    let pool = options.pool()?;
    if let Some(dir) = &options.cache_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let digests: BTreeMap<&str, String> =
        corpora.iter().map(|(n, d)| (n.as_str(), corpus_digest(d))).collect();

    let keys: Vec<EmbeddingKey> = jobs
        .iter()
        .map(embedding_key)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let embeddings: BTreeMap<EmbeddingKey, std::result::Result<Embedding, String>> = pool.install(|| {
        keys.par_iter()
            .map(|key| {
                let (name, _, spec) = key;
                let lambda = jobs
                    .iter()
                    .find(|j| embedding_key(j) == *key)
                    .map(|j| j.lambda)
                    .unwrap_or(0.0);
                let result = jittered(&corpora[name], lambda, config.jitter_seed)
                    .and_then(|dtm| compute_embedding(&dtm, *spec, config))
                    .map_err(|e| e.to_string());
                (key.clone(), result)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    });

    info!("computing {} layouts on {} workers", jobs.len(), pool.current_num_threads());
    let results: Vec<(Provenance, std::result::Result<Scatterplot, String>)> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let labels = corpora[&job.corpus].labels();
                let cache = options
                    .cache_dir
                    .as_ref()
                    .map(|d| cache_path(d, job, config, &digests[job.corpus.as_str()]));
                if let Some(plot) = cache.as_deref().and_then(|p| load_cached(p, job, labels)) {
                    return (job.provenance.clone(), Ok(plot));
                }
                let result = match &embeddings[&embedding_key(job)] {
                    Ok(emb) => run_job(job, emb, labels).and_then(|plot| {
                        if let Some(path) = &cache {
                            store_cached(path, &plot)?;
                        }
                        Ok(plot)
                    }),
                    Err(msg) => Err(Error::run(COMPONENT, format!("embedding failed: {msg}"))),
                }
                .map_err(|e| e.to_string());
                (job.provenance.clone(), result)
            })
            .collect()
    });

    let mut layouts = BTreeMap::new();
    let mut failures = Vec::new();
    for (prov, result) in results {
        match result {
            Ok(plot) => {
                layouts.insert(prov, plot);
            }
            Err(msg) => {
                warn!("layout job failed, skipping its pairings: {msg}");
                failures.push((prov, msg));
            }
        }
    }
    if layouts.is_empty() {
        return Err(Error::run(
            COMPONENT,
            format!("all {} layout jobs failed", failures.len()),
        ));
    }
    Ok(LayoutSet {
        corpora,
        layouts,
        failures,
    })
}

/// High- and low-level similarity of an input-data pair with the derived
/// adaptability values.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptabilityRecord {
    pub pair: PairInfo,
    /// α, β, γ between the DTM and its jittered variant.
    pub high: [Option<f64>; 3],
    /// α, β, γ between the two scatterplots.
    pub low: [Option<f64>; 3],
    /// `1 − |high − low|` per component.
    pub tilde: [Option<f64>; 3],
}

pub const ADAPTABILITY_COLUMNS: [&str; 16] = [
    "pair_id",
    "corpus",
    "embedding",
    "dr",
    "varied_factor",
    "value_a",
    "value_b",
    "alpha_high",
    "beta_high",
    "gamma_high",
    "alpha_low",
    "beta_low",
    "gamma_low",
    "alpha_tilde",
    "beta_tilde",
    "gamma_tilde",
];

fn aggregates(r: &SimilarityRecord) -> [Option<f64>; 3] {
    [r.alpha, r.beta, r.gamma]
}

impl AdaptabilityRecord {
    pub fn new(pair: PairInfo, high: &SimilarityRecord, low: &SimilarityRecord) -> Self {
        let (h, l) = (aggregates(high), aggregates(low));
        let tilde = std::array::from_fn(|i| Some(adaptability(h[i]?, l[i]?)));
        Self {
            pair,
            high: h,
            low: l,
            tilde,
        }
    }

    /// Every value rounded as it is written to CSV.
    pub fn quantized(mut self) -> Self {
        for v in self.high.iter_mut().chain(&mut self.low).chain(&mut self.tilde) {
            *v = v.map(quantize);
        }
        self
    }
}

/// Records of one experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Experiment {
    pub records: Vec<SimilarityRecord>,
    /// Input-data experiment only.
    pub adaptability: Vec<AdaptabilityRecord>,
}

/// High-dimensional representation of a (jittered) DTM: cosine
/// dissimilarities plus L2-normalized rows for the centroid metrics.
struct HighDim {
    diss: DissimilarityMatrix,
    points: DMatrix<f64>,
}

impl HighDim {
    fn new(dtm: &SparseDtm) -> Self {
        let v = Vectors::Sparse(dtm.to_matrix());
        Self {
            diss: cosine_matrix(&v),
            points: v.row_normalized().to_dense(),
        }
    }

    fn repr(&self) -> Representation<'_> {
        Representation::Embedded {
            diss: &self.diss,
            points: &self.points,
        }
    }
}

/// Compares the layouts of every pairing of `kind`. Pairs whose comparison
/// fails are logged and skipped. Records are sorted by pair id.
pub fn experiment_from_layouts(
    config: &StudyConfig,
    set: &LayoutSet,
    kind: ExperimentKind,
    options: &RunOptions,
) -> Result<Experiment> {
    let pairings = make_pairings(set.layouts.keys(), kind, config);
    let pool = options.pool()?;
    let k = config.k_neighbors;

    let records: Vec<(PairingSpec, SimilarityRecord)> = pool.install(|| {
        pairings
            .par_iter()
            .filter_map(|p| {
                let (a, b) = (&set.layouts[&p.a], &set.layouts[&p.b]);
                match compare(Representation::Plot(a), Representation::Plot(b), a.labels(), k) {
                    Ok(mut r) => {
                        r.pair = p.info();
                        Some((p.clone(), r))
                    }
                    Err(e) => {
                        warn!("skipping pair {}: {e}", p.pair_id());
                        None
                    }
                }
            })
            .collect()
    });

    let mut adaptability = Vec::new();
    if kind == ExperimentKind::InputData {
        let mut wanted: BTreeSet<(String, String)> = BTreeSet::new();
        for (p, _) in &records {
            let corpus = p.a.get(super::jobs::keys::CORPUS).unwrap_or_default().to_string();
            wanted.insert((corpus.clone(), p.value_a.clone()));
            wanted.insert((corpus, p.value_b.clone()));
        }
        let lambda_of = |s: &str| -> f64 { s.parse().unwrap_or(0.0) };
        let high_dims: BTreeMap<(String, String), HighDim> = pool.install(|| {
            wanted
                .par_iter()
                .filter_map(|(c, l)| {
                    let dtm = jittered(&set.corpora[c], lambda_of(l), config.jitter_seed).ok()?;
                    Some(((c.clone(), l.clone()), HighDim::new(&dtm)))
                })
                .collect::<Vec<_>>()
                .into_iter()
                .collect()
        });
        let mut high_cache: BTreeMap<(String, String, String), Option<SimilarityRecord>> =
            BTreeMap::new();
        for (p, _) in &records {
            let corpus = p.a.get(super::jobs::keys::CORPUS).unwrap_or_default().to_string();
            high_cache
                .entry((corpus, p.value_a.clone(), p.value_b.clone()))
                .or_insert(None);
        }
        let computed: Vec<_> = pool.install(|| {
            high_cache
                .keys()
                .cloned()
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|key| {
                    let (c, la, lb) = &key;
                    let ha = &high_dims[&(c.clone(), la.clone())];
                    let hb = &high_dims[&(c.clone(), lb.clone())];
                    let labels = set.corpora[c].labels();
                    let r = compare(ha.repr(), hb.repr(), labels, k)
                        .map_err(|e| warn!("high-dimensional comparison {c} {la}~{lb} failed: {e}"))
                        .ok();
                    (key, r)
                })
                .collect()
        });
        high_cache.extend(computed);
        for (p, low) in &records {
            let corpus = p.a.get(super::jobs::keys::CORPUS).unwrap_or_default().to_string();
            if let Some(Some(high)) = high_cache.get(&(corpus, p.value_a.clone(), p.value_b.clone())) {
                adaptability.push(AdaptabilityRecord::new(p.info(), high, low));
            }
        }
        adaptability.sort_by(|a, b| a.pair.cmp(&b.pair));
    }

    let mut records: Vec<SimilarityRecord> = records.into_iter().map(|(_, r)| r).collect();
    records.sort_by(|a, b| a.pair.cmp(&b.pair));
    Ok(Experiment {
        records,
        adaptability,
    })
}

/// Computes the layouts of `config` and the records of one experiment.
pub fn run_experiment(
    config: &StudyConfig,
    kind: ExperimentKind,
    options: &RunOptions,
) -> Result<Experiment> {
    let set = compute_layouts(config, options)?;
    experiment_from_layouts(config, &set, kind, options)
}

pub fn write_adaptability(path: &Path, records: &[AdaptabilityRecord]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let to_err = |e: csv::Error| Error::run(COMPONENT, format!("csv: {e}"));
        w.write_record(ADAPTABILITY_COLUMNS).map_err(to_err)?;
        for r in records {
            let p = &r.pair;
            let mut row = vec![
                p.pair_id.clone(),
                p.corpus.clone(),
                p.embedding.clone(),
                p.dr.clone(),
                p.varied_factor.clone(),
                p.value_a.clone(),
                p.value_b.clone(),
            ];
            row.extend(r.high.iter().chain(&r.low).chain(&r.tilde).map(|&v| fmt_opt(v)));
            w.write_record(row).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_adaptability(path: &Path) -> Result<Vec<AdaptabilityRecord>> {
    let format_err = |line: usize, message: String| Error::Format {
        component: COMPONENT,
        path: path.display().to_string(),
        line,
        message,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| format_err(1, e.to_string()))?.clone();
    if header.iter().ne(ADAPTABILITY_COLUMNS) {
        return Err(format_err(1, "unexpected adaptability columns".into()));
    }
    let mut out = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| format_err(line, e.to_string()))?;
        let field = |i: usize| row.get(i).unwrap_or_default().to_string();
        let num = |i: usize| -> Result<Option<f64>> {
            let s = field(i);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| format_err(line, format!("bad number `{s}`")))
        };
        out.push(AdaptabilityRecord {
            pair: PairInfo {
                pair_id: field(0),
                corpus: field(1),
                embedding: field(2),
                dr: field(3),
                varied_factor: field(4),
                value_a: field(5),
                value_b: field(6),
            },
            high: [num(7)?, num(8)?, num(9)?],
            low: [num(10)?, num(11)?, num(12)?],
            tilde: [num(13)?, num(14)?, num(15)?],
        });
    }
    Ok(out)
}

//! `lstab`: corpus ingestion, embedding, layout, comparison and stability
//! studies from the command line.
//!
//! Exit codes: 0 on success, 1 on input errors (including usage errors),
//! 2 on runtime and numerical errors. Every failure prints one line on
//! stderr, prefixed with the failing component.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use layout_stability::corpus::{self, JitterSpec};
use layout_stability::embed::{self, EmbeddingKind, Weighting};
use layout_stability::layout::{self, DrKind, DrParams, Method, Provenance, Scatterplot};
use layout_stability::numfmt::fmt_sig;
use layout_stability::simmetrics::{self, PairInfo, Representation};
use layout_stability::study::{self, keys, ExperimentKind, Experiment, ReportOptions, RunOptions};
use layout_stability::{Error, Result};

const COMPONENT: &str = "cli";

#[derive(Debug, Parser)]
#[command(name = "lstab", version, about = "Text corpus spatialization and layout stability analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a labeled DTM from whitespace-tokenized documents.
    Ingest(IngestArgs),
    /// Print corpus statistics of a DTM.
    Stats(StatsArgs),
    /// Jitter the term counts of a DTM.
    Perturb(PerturbArgs),
    /// Embed a DTM with VSM, LSI or NMF.
    Embed(EmbedArgs),
    /// Lay out an embedding in the plane.
    Layout(LayoutArgs),
    /// Compare two scatterplots with all similarity metrics.
    Compare(CompareArgs),
    /// Run the stability experiments described by a JSON configuration.
    Study(StudyArgs),
    /// Summaries, binary tests and metric correlations from record files.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// One document per line, tokens separated by whitespace.
    #[arg(long)]
    docs: PathBuf,
    /// One category label per line, parallel to the documents.
    #[arg(long)]
    labels: PathBuf,
    /// One stopword per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct PerturbArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Jitter intensity in [0, 1].
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// vsm, lsi or nmf.
    #[arg(long)]
    kind: EmbeddingKind,
    /// raw or tfidf.
    #[arg(long, default_value = "raw")]
    weighting: Weighting,
    /// Number of topics (lsi, nmf).
    #[arg(long)]
    topics: Option<usize>,
    /// NMF iterations.
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// NMF initialization seed; required for nmf.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write `{prefix}.doc_topic.txt` and `{prefix}.topic_term.txt`.
    #[arg(long)]
    topics_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("label_source").required(true).args(["labels", "dtm"])))]
struct LayoutArgs {
    /// mds, som or tsne.
    #[arg(long)]
    dr: DrKind,
    /// Hyperparameter override, e.g. `perplexity=15`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    seed: u64,
    /// Embedding file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Document labels, one per line.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Take the document labels from this DTM.
    #[arg(long)]
    dtm: Option<PathBuf>,
    /// Corpus name recorded in the provenance.
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Neighborhood size.
    #[arg(long, default_value_t = simmetrics::DEFAULT_K)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct StudyArgs {
    /// JSON study configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads; defaults to the number of logical processors.
    #[arg(long)]
    workers: Option<usize>,
    /// Layout cache directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Record files; experiments are recognized by their varied factor.
    #[arg(long, num_args = 1.., required = true)]
    records: Vec<PathBuf>,
    /// Adaptability records of the input-data experiment.
    #[arg(long)]
    adaptability: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// One binary test per corpus instead of pooling corpora.
    #[arg(long)]
    per_corpus: bool,
    /// Records sampled for the metric correlation matrix.
    #[arg(long, default_value_t = 3000)]
    sample_size: usize,
    /// Seed of the correlation sample.
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    eprintln!("{COMPONENT}: usage error: {}", usage_line(&e.to_string()));
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_string().replace('\n', " "));
            ExitCode::from(if e.is_input() { 1 } else { 2 })
        }
    }
}

/// First line of a clap error without its `error: ` prefix.
fn usage_line(rendered: &str) -> String {
    let first = rendered.lines().next().unwrap_or_default();
    let first = first.strip_prefix("error: ").unwrap_or(first);
    format!("{first} (see --help)")
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Stats(a) => stats(a),
        Command::Perturb(a) => perturb(a),
        Command::Embed(a) => embed_cmd(a),
        Command::Layout(a) => layout_cmd(a),
        Command::Compare(a) => compare(a),
        Command::Study(a) => study_cmd(a),
        Command::Report(a) => report(a),
    }
}

fn ingest(a: IngestArgs) -> Result<()> {
    let raw = corpus::read_raw_corpus(&a.docs, &a.labels)?;
    let stopwords: HashSet<String> = match &a.stopwords {
        Some(p) => corpus::read_lines(p)?.into_iter().collect(),
        None => HashSet::new(),
    };
    corpus::write_dtm(&raw.into_dtm(&stopwords)?, &a.out)
}

fn stats(a: StatsArgs) -> Result<()> {
    let s = corpus::corpus_stats(&corpus::read_dtm(&a.input)?);
    let text = format!(
        "n_docs,n_terms,median_doc_length,n_categories,sparsity\n{},{},{},{},{}\n",
        s.n_docs,
        s.n_terms,
        s.median_doc_length,
        s.n_categories,
        fmt_sig(s.sparsity)
    );
    match &a.out {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io(Path::new("<stdout>"), e)),
    }
}

fn perturb(a: PerturbArgs) -> Result<()> {
    let dtm = corpus::read_dtm(&a.input)?;
    let spec = JitterSpec::new(a.lambda, a.seed)?;
    corpus::write_dtm(&corpus::jitter(&dtm, &spec), &a.out)
}

fn embed_cmd(a: EmbedArgs) -> Result<()> {
    let dtm = corpus::read_dtm(&a.input)?;
    let matrix = match a.weighting {
        Weighting::Raw => dtm.to_matrix(),
        Weighting::Tfidf => corpus::apply_tfidf(&dtm),
    };
    let topics = || {
        a.topics
            .ok_or_else(|| Error::input(COMPONENT, format!("{} needs --topics", a.kind)))
    };
    let (embedded, factorization) = match a.kind {
        EmbeddingKind::Vsm => {
            if a.topics.is_some() {
                return Err(Error::input(COMPONENT, "vsm takes no --topics"));
            }
            (embed::embed_vsm(&matrix, a.weighting), None)
        }
        EmbeddingKind::Lsi => {
            let (e, f) = embed::embed_lsi(&matrix, topics()?, a.weighting)?;
            (e, Some(f))
        }
        EmbeddingKind::Nmf => {
            let seed = a
                .seed
                .ok_or_else(|| Error::input(COMPONENT, "nmf is stochastic and needs --seed"))?;
            let (e, f) = embed::embed_nmf(&matrix, topics()?, a.max_iter, seed, a.weighting)?;
            (e, Some(f))
        }
    };
    embed::write_embedding(&embedded, &a.out)?;
    match (&a.topics_out, factorization) {
        (Some(prefix), Some(f)) => {
            embed::write_topics(&f, embedded.info(), prefix)?;
        }
        (Some(_), None) => return Err(Error::input(COMPONENT, "vsm has no topics to write")),
        _ => {}
    }
    Ok(())
}

fn layout_cmd(a: LayoutArgs) -> Result<()> {
    let embedded = embed::read_embedding(&a.input)?;
    let labels = match (&a.labels, &a.dtm) {
        (Some(p), _) => corpus::read_lines(p)?,
        (None, Some(p)) => corpus::read_dtm(p)?.labels().to_vec(),
        (None, None) => unreachable!("clap requires a label source"),
    };
    let mut method = Method::default_for(a.dr);
    for p in &a.params {
        let (key, value) = p
            .split_once('=')
            .ok_or_else(|| Error::input(COMPONENT, format!("--param `{p}` is not KEY=VALUE")))?;
        method.set(key.trim(), value.trim())?;
    }

    let info = embedded.info();
    let mut provenance = Provenance::default();
    if let Some(name) = &a.corpus {
        provenance.insert(keys::CORPUS, name);
    }
    let family = match info.topics {
        Some(k) => format!("{}-k{k}", info.kind),
        None => info.kind.to_string(),
    };
    provenance.insert(keys::EMBEDDING, family);
    provenance.insert(keys::WEIGHTING, info.weighting);
    provenance.insert(keys::PLACEMENT, "direct");

    let params = DrParams {
        method,
        seed: a.seed,
    };
    let plot = layout::layout(&embedded, &labels, &params, provenance)?;
    layout::write_scatterplot(&plot.quantized(), &a.out)
}

/// Pair columns from the provenance of two plots: shared fields fill the
/// group columns, differing fields the varied factor.
fn pair_info(a: &Scatterplot, b: &Scatterplot, id: String) -> PairInfo {
    let (pa, pb) = (&a.provenance, &b.provenance);
    let shared = |key: &str| match (pa.get(key), pb.get(key)) {
        (Some(x), Some(y)) if x == y => x.to_string(),
        _ => String::new(),
    };
    let all_keys: BTreeSet<&String> = pa.0.keys().chain(pb.0.keys()).collect();
    let varied: Vec<&String> = all_keys
        .into_iter()
        .filter(|k| pa.get(k) != pb.get(k))
        .collect();
    let values = |p: &Provenance| {
        varied
            .iter()
            .map(|k| p.get(k).unwrap_or_default())
            .collect::<Vec<_>>()
            .join("+")
    };
    let embedding = if pa.get(keys::EMBEDDING).is_some() && embedding_matches(pa, pb) {
        study::embedding_label(pa)
    } else {
        String::new()
    };
    PairInfo {
        pair_id: id,
        corpus: shared(keys::CORPUS),
        embedding,
        dr: shared(keys::DR),
        varied_factor: varied
            .iter()
            .map(|k| k.as_str())
            .collect::<Vec<_>>()
            .join("+"),
        value_a: values(pa),
        value_b: values(pb),
    }
}

fn embedding_matches(pa: &Provenance, pb: &Provenance) -> bool {
    [keys::EMBEDDING, keys::WEIGHTING, keys::PLACEMENT]
        .iter()
        .all(|k| pa.get(k) == pb.get(k))
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

fn compare(a: CompareArgs) -> Result<()> {
    let pa = layout::read_scatterplot(&a.a)?;
    let pb = layout::read_scatterplot(&a.b)?;
    if pa.labels() != pb.labels() {
        return Err(Error::input(COMPONENT, "the two scatterplots have different labels"));
    }
    let mut record = simmetrics::compare(
        Representation::Plot(&pa),
        Representation::Plot(&pb),
        pa.labels(),
        a.k,
    )?;
    record.pair = pair_info(&pa, &pb, format!("{}~{}", file_name(&a.a), file_name(&a.b)));
    simmetrics::write_records(&a.out, &[record])
}

fn study_cmd(a: StudyArgs) -> Result<()> {
    let config = study::StudyConfig::load(&a.config)?;
    let options = RunOptions {
        workers: a.workers.unwrap_or(0),
        cache_dir: a.cache_dir,
    };
    let out = study::run_study(&config, &options, &a.out_dir)?;
    if out.n_failed > 0 {
        log::warn!("{} of {} layouts failed", out.n_failed, out.n_failed + out.n_layouts);
    }
    for f in &out.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let mut experiments: BTreeMap<ExperimentKind, Experiment> = BTreeMap::new();
    for path in &a.records {
        for r in simmetrics::read_records(path)? {
            let kind = ExperimentKind::from_varied_factor(&r.pair.varied_factor).ok_or_else(|| {
                Error::input(
                    COMPONENT,
                    format!(
                        "{}: record `{}` has no recognized varied factor",
                        path.display(),
                        r.pair.pair_id
                    ),
                )
            })?;
            experiments.entry(kind).or_default().records.push(r);
        }
    }
    if let Some(path) = &a.adaptability {
        experiments
            .entry(ExperimentKind::InputData)
            .or_default()
            .adaptability = study::read_adaptability(path)?;
    }
    for exp in experiments.values_mut() {
        exp.records.sort_by(|x, y| x.pair.cmp(&y.pair));
    }
    let options = ReportOptions {
        per_corpus: a.per_corpus,
        correlation_sample_size: a.sample_size,
        correlation_seed: a.seed,
    };
    for f in study::write_report(&experiments, &options, &a.out_dir)? {
        println!("{}", f.display());
    }
    Ok(())
}

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::layout::{DrKind, DrParams, LearningRate, Method, Provenance};
use crate::numfmt::fmt_sig;
use crate::simmetrics::PairInfo;

use super::config::{EmbeddingSpec, Placement, StudyConfig};
use super::COMPONENT;

/// Provenance keys of a layout.
pub mod keys {
    pub const CORPUS: &str = "corpus";
    pub const JITTER_LAMBDA: &str = "jitter_lambda";
    pub const JITTER_SEED: &str = "jitter_seed";
    /// Embedding family without weighting, e.g. `lsi-k6`.
    pub const EMBEDDING: &str = "embedding";
    pub const WEIGHTING: &str = "weighting";
    pub const PLACEMENT: &str = "placement";
    pub const DR: &str = "dr";
    pub const DR_SEED: &str = "dr_seed";
}

/// One layout to compute.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutJob {
    pub corpus: String,
    pub lambda: f64,
    pub embedding: EmbeddingSpec,
    pub placement: Placement,
    pub params: DrParams,
    pub provenance: Provenance,
}

impl LayoutJob {
    pub fn new(
        corpus: &str,
        lambda: f64,
        jitter_seed: u64,
        embedding: EmbeddingSpec,
        placement: Placement,
        params: DrParams,
    ) -> Self {
        let mut p = Provenance::default();
        p.insert(keys::CORPUS, corpus);
        p.insert(keys::JITTER_LAMBDA, fmt_sig(lambda));
        p.insert(keys::JITTER_SEED, jitter_seed);
        p.insert(keys::EMBEDDING, embedding.family());
        p.insert(keys::WEIGHTING, embedding.weighting);
        p.insert(keys::PLACEMENT, placement);
        p.insert(keys::DR, params.method.kind());
        for (k, v) in params.method.hyperparameters() {
            p.insert(format!("param.{k}"), v);
        }
        p.insert(keys::DR_SEED, params.seed);
        Self {
            corpus: corpus.to_string(),
            lambda,
            embedding,
            placement,
            params,
            provenance: p,
        }
    }
}

/// Every DR configuration of the grids, in grid order.
pub fn grid_methods(config: &StudyConfig) -> Vec<Method> {
    let g = &config.dr_grids;
    let mut out = Vec::new();
    if let Some(m) = &g.mds {
        out.extend(m.max_iter.iter().map(|&max_iter| Method::Mds { max_iter }));
    }
    if let Some(s) = &g.som {
        for &width in &s.m {
            for &height in &s.n {
                out.push(Method::Som {
                    width,
                    height,
                    dither: s.dither,
                });
            }
        }
    }
    if let Some(t) = &g.tsne {
        for &learning_rate in &t.learning_rate {
            for &n_iter in &t.n_iter {
                for &perplexity in &t.perplexity {
                    out.push(Method::Tsne {
                        perplexity,
                        n_iter,
                        learning_rate,
                    });
                }
            }
        }
    }
    out
}

/// Cartesian product corpus × λ × embedding × placement × DR grid × seed,
/// deduplicated and ordered by provenance. Topic placement is only
/// generated for topic-model embeddings.
pub fn enumerate_layout_jobs(config: &StudyConfig) -> Result<Vec<LayoutJob>> {
    config.validate()?;
    let methods = grid_methods(config);
    let mut jobs = BTreeMap::new();
    for corpus in &config.corpora {
        for &lambda in &config.jitter_lambdas {
            for &embedding in &config.embeddings {
                for &placement in &config.placements {
                    if placement == Placement::TopicConvex && embedding.topics.is_none() {
                        continue;
                    }
                    for &method in &methods {
                        for &seed in &config.seeds {
                            let job = LayoutJob::new(
                                &corpus.name,
                                lambda,
                                config.jitter_seed,
                                embedding,
                                placement,
                                DrParams { method, seed },
                            );
                            jobs.entry(job.provenance.clone()).or_insert(job);
                        }
                    }
                }
            }
        }
    }
    Ok(jobs.into_values().collect())
}

/// The three stability experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    InputData,
    Hyperparameter,
    Randomness,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 3] = [
        ExperimentKind::InputData,
        ExperimentKind::Hyperparameter,
        ExperimentKind::Randomness,
    ];

    /// Short stability label used in binary-test hypotheses.
    pub fn stability(self) -> &'static str {
        match self {
            ExperimentKind::InputData => "S1",
            ExperimentKind::Hyperparameter => "S2",
            ExperimentKind::Randomness => "S3",
        }
    }

    /// Experiment a record belongs to, from its varied factor.
    pub fn from_varied_factor(factor: &str) -> Option<Self> {
        match factor {
            keys::JITTER_LAMBDA => Some(ExperimentKind::InputData),
            keys::DR_SEED => Some(ExperimentKind::Randomness),
            f if f.starts_with("param.") => Some(ExperimentKind::Hyperparameter),
            _ => None,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::InputData => "input_data",
            ExperimentKind::Hyperparameter => "hyperparameter",
            ExperimentKind::Randomness => "randomness",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "input_data" => Ok(ExperimentKind::InputData),
            "hyperparameter" => Ok(ExperimentKind::Hyperparameter),
            "randomness" => Ok(ExperimentKind::Randomness),
            _ => Err(Error::input(COMPONENT, format!("unknown experiment kind `{s}`"))),
        }
    }
}

/// Two layouts differing in exactly one provenance field.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairingSpec {
    pub kind: ExperimentKind,
    pub varied: String,
    pub value_a: String,
    pub value_b: String,
    pub a: Provenance,
    pub b: Provenance,
}

impl PairingSpec {
    /// Canonical id: shared fields as `key=value` joined by `|`, with the
    /// varied field rendered as `key=a~b`.
    pub fn pair_id(&self) -> String {
        self.a
            .0
            .iter()
            .map(|(k, v)| {
                if *k == self.varied {
                    format!("{k}={}~{}", self.value_a, self.value_b)
                } else {
                    format!("{k}={v}")
                }
            })
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn info(&self) -> PairInfo {
        let get = |k: &str| self.a.get(k).unwrap_or_default().to_string();
        PairInfo {
            pair_id: self.pair_id(),
            corpus: get(keys::CORPUS),
            embedding: embedding_label(&self.a),
            dr: get(keys::DR),
            varied_factor: self.varied.clone(),
            value_a: self.value_a.clone(),
            value_b: self.value_b.clone(),
        }
    }
}

/// Human-readable embedding column, e.g. `lsi-tfidf-k6` or
/// `nmf-raw-k6+convex`.
pub fn embedding_label(p: &Provenance) -> String {
    let family = p.get(keys::EMBEDDING).unwrap_or_default();
    let weighting = p.get(keys::WEIGHTING).unwrap_or_default();
    let mut label = match family.split_once('-') {
        Some((kind, rest)) => format!("{kind}-{weighting}-{rest}"),
        None => format!("{family}-{weighting}"),
    };
    if p.get(keys::PLACEMENT) == Some("topic_convex") {
        label.push_str("+convex");
    }
    label
}

/// Parses a pair id back into its fields.
pub fn parse_pair_id(id: &str) -> BTreeMap<String, String> {
    id.split('|')
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn dedup<T: PartialEq>(values: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Groups provenances by everything except `field`.
fn groups_without<'a>(
    layouts: impl IntoIterator<Item = &'a Provenance>,
    field: &str,
) -> BTreeMap<Provenance, BTreeMap<String, Provenance>> {
    let mut groups: BTreeMap<Provenance, BTreeMap<String, Provenance>> = BTreeMap::new();
    for p in layouts {
        let Some(value) = p.get(field) else { continue };
        let mut rest = p.clone();
        rest.0.remove(field);
        groups
            .entry(rest)
            .or_default()
            .insert(value.to_string(), p.clone());
    }
    groups
}

fn push_pairs(
    out: &mut Vec<PairingSpec>,
    kind: ExperimentKind,
    field: &str,
    members: &BTreeMap<String, Provenance>,
    pairs: impl IntoIterator<Item = (String, String)>,
) {
    for (va, vb) in pairs {
        if let (Some(a), Some(b)) = (members.get(&va), members.get(&vb)) {
            out.push(PairingSpec {
                kind,
                varied: field.to_string(),
                value_a: va,
                value_b: vb,
                a: a.clone(),
                b: b.clone(),
            });
        }
    }
}

/// Hyperparameter grids as the strings used in provenance, in grid order.
fn grid_value_lists(config: &StudyConfig) -> Vec<(DrKind, &'static str, Vec<String>)> {
    let g = &config.dr_grids;
    let counts = |v: &[usize]| dedup(v.iter().map(|x| x.to_string()));
    let mut out = Vec::new();
    if let Some(m) = &g.mds {
        out.push((DrKind::Mds, "max_iter", counts(&m.max_iter)));
    }
    if let Some(s) = &g.som {
        out.push((DrKind::Som, "m", counts(&s.m)));
        out.push((DrKind::Som, "n", counts(&s.n)));
    }
    if let Some(t) = &g.tsne {
        out.push((
            DrKind::Tsne,
            "learning_rate",
            dedup(t.learning_rate.iter().map(LearningRate::to_string)),
        ));
        out.push((DrKind::Tsne, "n_iter", counts(&t.n_iter)));
        out.push((
            DrKind::Tsne,
            "perplexity",
            dedup(t.perplexity.iter().map(|&p| fmt_sig(p))),
        ));
    }
    out
}

/// Pairings of one experiment among the given (successfully computed)
/// layouts.
///
/// * input data: each λ = 0 layout against each jittered counterpart;
/// * hyperparameter: consecutive values of one grid, everything else fixed;
/// * randomness: all unordered seed pairs.
pub fn make_pairings<'a>(
    layouts: impl IntoIterator<Item = &'a Provenance> + Clone,
    kind: ExperimentKind,
    config: &StudyConfig,
) -> Vec<PairingSpec> {
    let mut out = Vec::new();
    match kind {
        ExperimentKind::InputData => {
            let lambdas = dedup(config.jitter_lambdas.iter().map(|&l| fmt_sig(l)));
            let base = fmt_sig(0.0);
            if lambdas.contains(&base) {
                for members in groups_without(layouts, keys::JITTER_LAMBDA).values() {
                    let pairs = lambdas
                        .iter()
                        .filter(|l| **l != base)
                        .map(|l| (base.clone(), l.clone()));
                    push_pairs(&mut out, kind, keys::JITTER_LAMBDA, members, pairs);
                }
            }
        }
        ExperimentKind::Randomness => {
            let seeds = dedup(config.seeds.iter().map(u64::to_string));
            for members in groups_without(layouts, keys::DR_SEED).values() {
                let pairs = (0..seeds.len()).flat_map(|i| {
                    let seeds = &seeds;
                    (i + 1..seeds.len()).map(move |j| (seeds[i].clone(), seeds[j].clone()))
                });
                push_pairs(&mut out, kind, keys::DR_SEED, members, pairs);
            }
        }
        ExperimentKind::Hyperparameter => {
            for (dr, name, values) in grid_value_lists(config) {
                if values.len() < 2 {
                    continue;
                }
                let dr_name = dr.to_string();
                let field = format!("param.{name}");
                let of_dr = layouts
                    .clone()
                    .into_iter()
                    .filter(|p| p.get(keys::DR) == Some(dr_name.as_str()));
                for members in groups_without(of_dr, &field).values() {
                    let pairs = values.windows(2).map(|w| (w[0].clone(), w[1].clone()));
                    push_pairs(&mut out, kind, &field, members, pairs);
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{EmbeddingKind, Weighting};
    use crate::study::config::{DrGrids, TsneGrid};

    fn config(json_extra: &str) -> StudyConfig {
        StudyConfig::from_json(&format!(
            r#"{{
            "corpora": [{{"name": "toy", "synthetic": {{"n_docs": 30, "n_categories": 3, "n_terms": 20, "seed": 1}}}}],
            "embeddings": [{{"kind": "vsm", "weighting": "raw"}}],
            {json_extra}
        }}"#
        ))
        .unwrap()
    }

    #[test]
    fn tsne_grid_product() {
        let mut c = config(r#""seeds": [1], "jitter_lambdas": [0]"#);
        c.dr_grids = DrGrids {
            mds: None,
            som: None,
            ..DrGrids::default()
        };
        assert_eq!(enumerate_layout_jobs(&c).unwrap().len(), 144);
        c.dr_grids = DrGrids {
            som: None,
            tsne: None,
            ..DrGrids::default()
        };
        assert_eq!(enumerate_layout_jobs(&c).unwrap().len(), 5);
    }

    #[test]
    fn jobs_are_deterministic_and_unique() {
        let c = config(r#""seeds": [3, 1, 3], "jitter_lambdas": [0, 0.5]"#);
        let a = enumerate_layout_jobs(&c).unwrap();
        assert_eq!(a, enumerate_layout_jobs(&c).unwrap());
        let mut provs: Vec<_> = a.iter().map(|j| &j.provenance).collect();
        let n = provs.len();
        provs.dedup();
        assert_eq!(provs.len(), n);
        assert!(a.windows(2).all(|w| w[0].provenance < w[1].provenance));
    }

    #[test]
    fn pairing_rules() {
        let mut c = config(r#""seeds": [1, 2, 3], "jitter_lambdas": [0, 0.25, 0.5]"#);
        c.dr_grids = DrGrids {
            mds: None,
            som: None,
            tsne: Some(TsneGrid {
                learning_rate: vec![LearningRate::Auto],
                n_iter: vec![1000],
                perplexity: vec![5.0, 15.0, 25.0],
            }),
        };
        let jobs = enumerate_layout_jobs(&c).unwrap();
        let provs: Vec<&Provenance> = jobs.iter().map(|j| &j.provenance).collect();

        let hyper = make_pairings(provs.iter().copied(), ExperimentKind::Hyperparameter, &c);
        let first_group: Vec<_> = hyper
            .iter()
            .filter(|p| p.a.get(keys::DR_SEED) == Some("1") && p.a.get(keys::JITTER_LAMBDA) == Some("0"))
            .map(|p| (p.value_a.as_str(), p.value_b.as_str()))
            .collect();
        assert_eq!(first_group, vec![("15", "25"), ("5", "15")]);

        let seeds = make_pairings(provs.iter().copied(), ExperimentKind::Randomness, &c);
        assert_eq!(seeds.len(), 3 * 3 * 3);
        let mut s: Vec<_> = seeds
            .iter()
            .filter(|p| p.a.get("param.perplexity") == Some("5") && p.a.get(keys::JITTER_LAMBDA) == Some("0"))
            .map(|p| (p.value_a.clone(), p.value_b.clone()))
            .collect();
        s.sort();
        assert_eq!(
            s,
            vec![("1".into(), "2".into()), ("1".into(), "3".into()), ("2".into(), "3".into())]
        );

        let input = make_pairings(provs.iter().copied(), ExperimentKind::InputData, &c);
        assert!(input.iter().all(|p| p.value_a == "0"));
        assert_eq!(input.len(), 2 * 3 * 3);

        for p in hyper.iter().chain(&seeds).chain(&input) {
            let differing: Vec<_> = p.a.0.keys().filter(|k| p.a.get(k) != p.b.get(k)).collect();
            assert_eq!(differing, vec![&p.varied]);
        }
    }

    #[test]
    fn pair_id_round_trip() {
        let job = LayoutJob::new(
            "toy",
            0.25,
            0,
            EmbeddingSpec {
                kind: EmbeddingKind::Lsi,
                weighting: Weighting::Tfidf,
                topics: Some(6),
            },
            Placement::TopicConvex,
            DrParams {
                method: Method::Mds { max_iter: 100 },
                seed: 4,
            },
        );
        assert_eq!(embedding_label(&job.provenance), "lsi-tfidf-k6+convex");
        let mut b = job.provenance.clone();
        b.insert(keys::DR_SEED, 5);
        let p = PairingSpec {
            kind: ExperimentKind::Randomness,
            varied: keys::DR_SEED.into(),
            value_a: "4".into(),
            value_b: "5".into(),
            a: job.provenance.clone(),
            b,
        };
        let fields = parse_pair_id(&p.pair_id());
        assert_eq!(fields["dr_seed"], "4~5");
        assert_eq!(fields["weighting"], "tfidf");
        assert_eq!(fields["embedding"], "lsi-k6");
    }
}

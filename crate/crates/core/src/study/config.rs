use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::synthetic::SyntheticSpec;
use crate::embed::{EmbeddingKind, Weighting};
use crate::error::{Error, Result};
use crate::layout::LearningRate;
use crate::simmetrics::DEFAULT_K;

use super::COMPONENT;

/// Where a corpus comes from: a DTM file or a synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dtm: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub kind: EmbeddingKind,
    pub weighting: Weighting,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topics: Option<usize>,
}

impl EmbeddingSpec {
    /// Name without the weighting, e.g. `lsi-k6`.
    pub fn family(&self) -> String {
        match self.topics {
            Some(k) => format!("{}-k{k}", self.kind),
            None => self.kind.to_string(),
        }
    }
}

impl fmt::Display for EmbeddingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind, self.weighting)?;
        if let Some(k) = self.topics {
            write!(f, "-k{k}")?;
        }
        Ok(())
    }
}

/// How document positions are obtained from an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// DR applied to the document vectors.
    Direct,
    /// DR applied to the topics; documents placed as θ-weighted means of
    /// the topic positions.
    TopicConvex,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::Direct => "direct",
            Placement::TopicConvex => "topic_convex",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdsGrid {
    pub max_iter: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SomGrid {
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    #[serde(default = "yes")]
    pub dither: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TsneGrid {
    pub learning_rate: Vec<LearningRate>,
    pub n_iter: Vec<usize>,
    pub perplexity: Vec<f64>,
}

/// Hyperparameter grids; a DR without a grid is not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrGrids {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mds: Option<MdsGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub som: Option<SomGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tsne: Option<TsneGrid>,
}

impl Default for DrGrids {
    /// The full published grids.
    fn default() -> Self {
        let steps = |lo: usize, hi: usize, step: usize| (lo..=hi).step_by(step).collect::<Vec<_>>();
        Self {
            mds: Some(MdsGrid {
                max_iter: steps(100, 300, 50),
            }),
            som: Some(SomGrid {
                m: steps(5, 30, 5),
                n: steps(5, 30, 5),
                dither: true,
            }),
            tsne: Some(TsneGrid {
                learning_rate: [10.0, 28.0, 129.0, 359.0, 1000.0]
                    .into_iter()
                    .map(LearningRate::Fixed)
                    .chain([LearningRate::Auto])
                    .collect(),
                n_iter: vec![1000, 2500, 5000, 10000],
                perplexity: [5.0, 15.0, 25.0, 35.0, 45.0, 55.0].to_vec(),
            }),
        }
    }
}

fn default_lambdas() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 1.0]
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_nmf_iter() -> usize {
    200
}

fn default_placements() -> Vec<Placement> {
    vec![Placement::Direct]
}

fn default_sample() -> usize {
    3000
}

/// One experiment: corpora × jitter × embeddings × DR grids × seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub corpora: Vec<CorpusSpec>,
    #[serde(default = "default_lambdas")]
    pub jitter_lambdas: Vec<f64>,
    /// Seed of the jitter noise matrix, shared by all λ.
    #[serde(default)]
    pub jitter_seed: u64,
    pub embeddings: Vec<EmbeddingSpec>,
    #[serde(default)]
    pub dr_grids: DrGrids,
    pub seeds: Vec<u64>,
    #[serde(default = "default_k")]
    pub k_neighbors: usize,
    /// Seed of the embedding stage (SVD start, NMF init), held fixed so
    /// that layout pairs differ only in what the experiment varies.
    #[serde(default)]
    pub embedding_seed: u64,
    #[serde(default = "default_nmf_iter")]
    pub nmf_max_iter: usize,
    #[serde(default = "default_placements")]
    pub placements: Vec<Placement>,
    /// Run binary tests per corpus instead of pooling corpora.
    #[serde(default)]
    pub per_corpus_tests: bool,
    #[serde(default = "default_sample")]
    pub correlation_sample_size: usize,
    #[serde(default)]
    pub correlation_seed: u64,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)
            .map_err(|e| Error::input(COMPONENT, format!("invalid study configuration: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text)?;
        // DTM paths are relative to the configuration file
        if let Some(dir) = path.parent() {
            for c in &mut config.corpora {
                if let Some(p) = &mut c.dtm {
                    if p.is_relative() {
                        *p = dir.join(&*p);
                    }
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::input(COMPONENT, m));
        if self.corpora.is_empty() {
            return fail("no corpora configured".into());
        }
        let mut names: Vec<&str> = self.corpora.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return fail("corpus names must be unique".into());
        }
        for c in &self.corpora {
            let ok_name = !c.name.is_empty()
                && c.name
                    .chars()
                    .all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch));
            if !ok_name {
                return fail(format!("corpus name `{}` must use [A-Za-z0-9._-]", c.name));
            }
            if c.dtm.is_some() == c.synthetic.is_some() {
                return fail(format!("corpus `{}` needs exactly one of dtm, synthetic", c.name));
            }
        }
        if self.jitter_lambdas.is_empty() {
            return fail("jitter_lambdas is empty".into());
        }
        if let Some(l) = self.jitter_lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return fail(format!("jitter lambda {l} outside [0, 1]"));
        }
        if self.embeddings.is_empty() {
            return fail("embeddings is empty".into());
        }
        for e in &self.embeddings {
            match (e.kind, e.topics) {
                (EmbeddingKind::Vsm, Some(_)) => return fail("vsm takes no topic count".into()),
                (EmbeddingKind::Lsi | EmbeddingKind::Nmf, None | Some(0)) => {
                    return fail(format!("{} needs a positive topic count", e.kind))
                }
                _ => {}
            }
        }
        if self.seeds.is_empty() {
            return fail("seeds is empty".into());
        }
        if self.k_neighbors == 0 {
            return fail("k_neighbors must be positive".into());
        }
        if self.placements.is_empty() {
            return fail("placements is empty".into());
        }
        let g = &self.dr_grids;
        if g.mds.is_none() && g.som.is_none() && g.tsne.is_none() {
            return fail("no DR grid configured".into());
        }
        let empty = g.mds.as_ref().is_some_and(|m| m.max_iter.is_empty())
            || g.som.as_ref().is_some_and(|s| s.m.is_empty() || s.n.is_empty())
            || g.tsne.as_ref().is_some_and(|t| {
                t.learning_rate.is_empty() || t.n_iter.is_empty() || t.perplexity.is_empty()
            });
        if empty {
            return fail("every configured grid list must be non-empty".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "corpora": [{"name": "toy", "synthetic": {"n_docs": 30, "n_categories": 3, "n_terms": 20, "seed": 1}}],
        "embeddings": [{"kind": "vsm", "weighting": "raw"}],
        "seeds": [1, 2]
    }"#;

    #[test]
    fn defaults_follow_published_grids() {
        let c = StudyConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.jitter_lambdas, vec![0.0, 0.25, 0.5, 1.0]);
        assert_eq!(c.k_neighbors, 7);
        assert_eq!(c.dr_grids.mds.unwrap().max_iter, vec![100, 150, 200, 250, 300]);
        let t = c.dr_grids.tsne.unwrap();
        assert_eq!(t.learning_rate.last(), Some(&LearningRate::Auto));
        assert_eq!(t.perplexity.len() * t.n_iter.len() * t.learning_rate.len(), 144);
        assert_eq!(c.dr_grids.som.unwrap().m, vec![5, 10, 15, 20, 25, 30]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let unknown = MINIMAL.replace("\"seeds\"", "\"sedes\": [], \"seeds\"");
        assert!(StudyConfig::from_json(&unknown).unwrap_err().is_input());
        let no_seeds = MINIMAL.replace("[1, 2]", "[]");
        assert!(StudyConfig::from_json(&no_seeds).unwrap_err().is_input());
        let lsi = MINIMAL.replace(r#""kind": "vsm""#, r#""kind": "lsi""#);
        assert!(StudyConfig::from_json(&lsi).unwrap_err().is_input());
    }
}

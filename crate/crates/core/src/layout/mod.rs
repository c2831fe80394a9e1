//! Two-dimensional layouts: SMACOF MDS, batch SOM and exact t-SNE.
//!
//! Every layout is a deterministic function of its input, hyperparameters
//! and seed.

mod io;
pub mod mds;
pub mod pca;
pub mod som;
pub mod tsne;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use io::{read_scatterplot, write_scatterplot};

use crate::embed::{dissimilarity_matrix, DissimilarityMatrix, EmbeddedCorpus};
use crate::error::{Error, Result};
use crate::numfmt::{fmt_sig, quantize};

const COMPONENT: &str = "layout";

/// Ordered `key=value` provenance of a scatterplot.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provenance(pub BTreeMap<String, String>);

impl Provenance {
    pub fn insert(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.insert(key.into(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// N labeled points in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatterplot {
    points: Vec<[f64; 2]>,
    labels: Vec<String>,
    pub provenance: Provenance,
}

impl Scatterplot {
    pub fn new(points: Vec<[f64; 2]>, labels: Vec<String>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::input(
                COMPONENT,
                format!("{} points but {} labels", points.len(), labels.len()),
            ));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::numerical(COMPONENT, "layout has non-finite coordinates"));
        }
        Ok(Self {
            points,
            labels,
            provenance: Provenance::default(),
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// N × 2 coordinate matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), 2, |i, c| self.points[i][c])
    }

    pub fn distances(&self) -> DissimilarityMatrix {
        DissimilarityMatrix::euclidean(&self.to_matrix())
    }

    /// Applies `p ↦ R(degrees) p + shift` to every point.
    pub fn transformed(&self, degrees: f64, shift: [f64; 2]) -> Self {
        let (s, c) = degrees.to_radians().sin_cos();
        let points = self
            .points
            .iter()
            .map(|&[x, y]| [c * x - s * y + shift[0], s * x + c * y + shift[1]])
            .collect();
        Self {
            points,
            labels: self.labels.clone(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self.points.iter().map(|&[x, y]| [x * factor, y * factor]).collect(),
            labels: self.labels.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Coordinates rounded to what the file format stores.
    pub fn quantized(&self) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|&[x, y]| [quantize(x), quantize(y)])
                .collect(),
            labels: self.labels.clone(),
            provenance: self.provenance.clone(),
        }
    }
}

/// t-SNE step size: fixed or `max(N / 12, 50)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRate {
    Fixed(f64),
    Auto,
}

impl LearningRate {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            LearningRate::Fixed(v) => v,
            LearningRate::Auto => (n as f64 / 12.0).max(50.0),
        }
    }
}

impl fmt::Display for LearningRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearningRate::Fixed(v) => f.write_str(&fmt_sig(*v)),
            LearningRate::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for LearningRate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(LearningRate::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(LearningRate::Fixed(v)),
            _ => Err(Error::input(
                COMPONENT,
                format!("learning_rate must be positive or `auto`, got `{s}`"),
            )),
        }
    }
}

impl Serialize for LearningRate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LearningRate::Fixed(v) => s.serialize_f64(*v),
            LearningRate::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for LearningRate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v > 0.0 => Ok(LearningRate::Fixed(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!(
                "learning_rate must be positive, got {v}"
            ))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrKind {
    Mds,
    Som,
    Tsne,
}

impl fmt::Display for DrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DrKind::Mds => "mds",
            DrKind::Som => "som",
            DrKind::Tsne => "tsne",
        })
    }
}

impl FromStr for DrKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mds" => Ok(DrKind::Mds),
            "som" => Ok(DrKind::Som),
            "tsne" | "t-sne" => Ok(DrKind::Tsne),
            _ => Err(Error::input(COMPONENT, format!("unknown DR `{s}`"))),
        }
    }
}

/// Hyperparameters of one dimensionality reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Mds {
        max_iter: usize,
    },
    /// `width` (m) × `height` (n) unit grid.
    Som {
        width: usize,
        height: usize,
        dither: bool,
    },
    Tsne {
        perplexity: f64,
        n_iter: usize,
        learning_rate: LearningRate,
    },
}

impl Method {
    pub fn kind(&self) -> DrKind {
        match self {
            Method::Mds { .. } => DrKind::Mds,
            Method::Som { .. } => DrKind::Som,
            Method::Tsne { .. } => DrKind::Tsne,
        }
    }

    /// Defaults used when a CLI invocation leaves a hyperparameter unset.
    pub fn default_for(kind: DrKind) -> Self {
        match kind {
            DrKind::Mds => Method::Mds { max_iter: 300 },
            DrKind::Som => Method::Som {
                width: 10,
                height: 10,
                dither: true,
            },
            DrKind::Tsne => Method::Tsne {
                perplexity: 30.0,
                n_iter: 1000,
                learning_rate: LearningRate::Auto,
            },
        }
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::input(COMPONENT, format!("{key} must be a count, got `{v}`")))
        };
        match (self, key) {
            (Method::Mds { max_iter }, "max_iter") => *max_iter = count(value)?,
            (Method::Som { width, .. }, "m") => *width = count(value)?,
            (Method::Som { height, .. }, "n") => *height = count(value)?,
            (Method::Som { dither, .. }, "dither") => {
                *dither = value.parse().map_err(|_| {
                    Error::input(COMPONENT, format!("dither must be true/false, got `{value}`"))
                })?
            }
            (Method::Tsne { perplexity, .. }, "perplexity") => {
                *perplexity = value.parse().map_err(|_| {
                    Error::input(COMPONENT, format!("perplexity must be a number, got `{value}`"))
                })?
            }
            (Method::Tsne { n_iter, .. }, "n_iter") => *n_iter = count(value)?,
            (Method::Tsne { learning_rate, .. }, "learning_rate") => {
                *learning_rate = value.parse()?
            }
            (m, _) => {
                return Err(Error::input(
                    COMPONENT,
                    format!("unknown parameter `{key}` for {}", m.kind()),
                ))
            }
        }
        Ok(())
    }

    /// Hyperparameters as ordered `(name, value)` pairs.
    pub fn hyperparameters(&self) -> Vec<(&'static str, String)> {
        match *self {
            Method::Mds { max_iter } => vec![("max_iter", max_iter.to_string())],
            Method::Som {
                width,
                height,
                dither,
            } => {
                let mut v = vec![("m", width.to_string()), ("n", height.to_string())];
                if !dither {
                    v.push(("dither", "false".to_string()));
                }
                v
            }
            Method::Tsne {
                perplexity,
                n_iter,
                learning_rate,
            } => vec![
                ("learning_rate", learning_rate.to_string()),
                ("n_iter", n_iter.to_string()),
                ("perplexity", fmt_sig(perplexity)),
            ],
        }
    }
}

/// A DR method together with its seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrParams {
    pub method: Method,
    pub seed: u64,
}

/// Places the rows of `corpus` in the plane. The returned points are in
/// document order.
pub fn layout_points(corpus: &EmbeddedCorpus, params: &DrParams) -> Result<Vec<[f64; 2]>> {
    match params.method {
        Method::Mds { max_iter } => {
            let diss = dissimilarity_matrix(corpus);
            Ok(mds::smacof(&diss, max_iter, params.seed)?.points)
        }
        Method::Som {
            width,
            height,
            dither,
        } => som::layout_som(corpus.vectors(), width, height, dither, params.seed),
        Method::Tsne {
            perplexity,
            n_iter,
            learning_rate,
        } => {
            let diss = dissimilarity_matrix(corpus);
            let run = tsne::tsne(&diss, perplexity, n_iter, learning_rate, params.seed)?;
            Ok(run.points)
        }
    }
}

/// Lays out `corpus` and attaches `labels`; hyperparameters, DR name and
/// seed are added to `provenance`.
pub fn layout(
    corpus: &EmbeddedCorpus,
    labels: &[String],
    params: &DrParams,
    mut provenance: Provenance,
) -> Result<Scatterplot> {
    if labels.len() != corpus.n_docs() {
        return Err(Error::input(
            COMPONENT,
            format!("{} labels for {} documents", labels.len(), corpus.n_docs()),
        ));
    }
    let points = layout_points(corpus, params)?;
    provenance.insert("dr", params.method.kind());
    for (k, v) in params.method.hyperparameters() {
        provenance.insert(format!("param.{k}"), v);
    }
    provenance.insert("dr_seed", params.seed);
    Ok(Scatterplot::new(points, labels.to_vec())?.with_provenance(provenance))
}

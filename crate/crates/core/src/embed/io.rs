use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::{EmbeddedCorpus, EmbeddingInfo, EmbeddingKind, TopicFactorization, Vectors, Weighting};
use crate::error::{Error, Result};
use crate::numfmt::fmt_sig;

const COMPONENT: &str = "embed";

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        component: COMPONENT,
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Header of the dense row format: `N D name weighting K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseHeader {
    pub name: String,
    pub weighting: String,
    pub topics: Option<usize>,
}

/// Writes `m` as a header line followed by one space-separated row per line.
pub fn write_dense(path: &Path, m: &DMatrix<f64>, header: &DenseHeader) -> Result<()> {
    let mut out = String::new();
    let k = header.topics.map_or("-".to_string(), |k| k.to_string());
    writeln!(
        out,
        "{} {} {} {} {}",
        m.nrows(),
        m.ncols(),
        header.name,
        header.weighting,
        k
    )
    .unwrap();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| fmt_sig(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_dense(path: &Path) -> Result<(DenseHeader, DMatrix<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| format_err(path, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let &[n, d, name, weighting, k] = fields.as_slice() else {
        return Err(format_err(path, 1, "header must be `N D name weighting K`"));
    };
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format_err(path, 1, format!("bad dimension `{s}`")))
    };
    let (n, d) = (parse_dim(n)?, parse_dim(d)?);
    let topics = match k {
        "-" => None,
        other => Some(parse_dim(other)?),
    };
    let mut data = Vec::with_capacity(n * d);
    for (i, line) in lines.enumerate() {
        if i >= n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(format_err(path, i + 2, "more rows than declared"));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| format_err(path, i + 2, format!("bad number `{tok}`")))?;
            data.push(v);
        }
        if data.len() - before != d {
            return Err(format_err(path, i + 2, format!("expected {d} values")));
        }
    }
    if data.len() != n * d {
        return Err(format_err(path, n + 1, format!("expected {n} rows")));
    }
    Ok((
        DenseHeader {
            name: name.to_string(),
            weighting: weighting.to_string(),
            topics,
        },
        DMatrix::from_row_slice(n, d, &data),
    ))
}

pub fn write_embedding(corpus: &EmbeddedCorpus, path: &Path) -> Result<()> {
    let info = corpus.info();
    write_dense(
        path,
        &corpus.vectors().to_dense(),
        &DenseHeader {
            name: info.kind.to_string(),
            weighting: info.weighting.to_string(),
            topics: info.topics,
        },
    )
}

pub fn read_embedding(path: &Path) -> Result<EmbeddedCorpus> {
    let (header, m) = read_dense(path)?;
    let kind: EmbeddingKind = header.name.parse()?;
    let weighting: Weighting = header.weighting.parse()?;
    EmbeddedCorpus::new(
        Vectors::Dense(m),
        EmbeddingInfo {
            kind,
            weighting,
            topics: header.topics,
        },
    )
}

/// Writes `{prefix}.doc_topic.txt` and `{prefix}.topic_term.txt`; returns
/// both paths.
pub fn write_topics(
    topics: &TopicFactorization,
    info: EmbeddingInfo,
    prefix: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let with_suffix = |suffix: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(suffix);
        PathBuf::from(p)
    };
    let doc_path = with_suffix(".doc_topic.txt");
    let term_path = with_suffix(".topic_term.txt");
    let header = |part: &str| DenseHeader {
        name: format!("{}.{part}", info.kind),
        weighting: info.weighting.to_string(),
        topics: Some(topics.n_topics()),
    };
    write_dense(&doc_path, &topics.doc_topic, &header("doc_topic"))?;
    write_dense(&term_path, &topics.topic_term, &header("topic_term"))?;
    Ok((doc_path, term_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.txt");
        let m = DMatrix::from_row_slice(2, 3, &[0.5, -1.25, 3.0, 0.0, 1e-3, 2.0]);
        let corpus = EmbeddedCorpus::new(
            Vectors::Dense(m.clone()),
            EmbeddingInfo {
                kind: EmbeddingKind::Lsi,
                weighting: Weighting::Tfidf,
                topics: Some(3),
            },
        )
        .unwrap();
        write_embedding(&corpus, &p).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "2 3 lsi tfidf 3\n0.5 -1.25 3\n0 0.001 2\n"
        );
        assert_eq!(read_embedding(&p).unwrap(), corpus);
    }

    #[test]
    fn rejects_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.txt");
        fs::write(&p, "2 2 vsm raw -\n1 2\n3\n").unwrap();
        assert!(read_dense(&p).unwrap_err().is_input());
    }
}

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ingest_documents, SparseDtm, COMPONENT};
use crate::error::{Error, Result};

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        component: COMPONENT,
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Non-empty, trimmed lines of a text file.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Reads the DTM text format:
///
/// ```text
/// N n k
/// doc term freq      (one line per nonzero, 0-based)
/// ...
/// label              (N lines)
/// ```
///
/// Term names are not part of the format; the vocabulary is filled with
/// `t{index}` placeholders.
pub fn read_dtm(path: &Path) -> Result<SparseDtm> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<&str> = text.lines().collect();
    let header = lines.first().ok_or_else(|| format_err(path, 1, "empty file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| format_err(path, 1, "header must be `N n k`"))?;
    let &[n_docs, n_terms, k] = dims.as_slice() else {
        return Err(format_err(path, 1, "header must be `N n k`"));
    };
    if lines.len() < 1 + n_docs {
        return Err(format_err(path, lines.len(), format!("expected {n_docs} label lines")));
    }
    let label_start = lines.len() - n_docs;
    let mut rows = vec![Vec::new(); n_docs];
    for (offset, line) in lines[1..label_start].iter().enumerate() {
        let lineno = offset + 2;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let &[d, t, f] = fields.as_slice() else {
            return Err(format_err(path, lineno, "expected `doc term freq`"));
        };
        let parse = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| format_err(path, lineno, format!("not a non-negative integer: {s}")))
        };
        let (d, t, f) = (parse(d)? as usize, parse(t)? as usize, parse(f)?);
        if d >= n_docs || t >= n_terms {
            return Err(format_err(path, lineno, "index out of range"));
        }
        rows[d].push((t, f));
    }
    let labels: Vec<String> = lines[label_start..]
        .iter()
        .map(|l| l.trim().to_string())
        .collect();
    if labels.iter().any(String::is_empty) {
        return Err(format_err(path, label_start + 1, "empty label line"));
    }
    let vocabulary = (0..n_terms).map(|t| format!("t{t}")).collect();
    let dtm = SparseDtm::new(n_terms, rows, labels, vocabulary)?;
    if dtm.n_categories() != k {
        return Err(format_err(
            path,
            1,
            format!("header declares k={k} but labels have {} categories", dtm.n_categories()),
        ));
    }
    Ok(dtm)
}

pub fn write_dtm(dtm: &SparseDtm, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{} {} {}", dtm.n_docs(), dtm.n_terms(), dtm.n_categories()).unwrap();
    for (d, t, f) in dtm.entries() {
        writeln!(out, "{d} {t} {f}").unwrap();
    }
    for l in dtm.labels() {
        writeln!(out, "{l}").unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Tokenized documents with labels, read from one-document-per-line text.
#[derive(Debug, Clone)]
pub struct RawCorpus {
    pub docs: Vec<Vec<String>>,
    pub labels: Vec<String>,
}

impl RawCorpus {
    pub fn into_dtm(self, stopwords: &HashSet<String>) -> Result<SparseDtm> {
        ingest_documents(&self.docs, &self.labels, stopwords)
    }
}

/// Reads whitespace-tokenized documents (one per line, blank lines are empty
/// documents) and a parallel label file.
pub fn read_raw_corpus(docs: &Path, labels: &Path) -> Result<RawCorpus> {
    let text = fs::read_to_string(docs).map_err(|e| Error::io(docs, e))?;
    let docs: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect();
    let labels = read_lines(labels)?;
    Ok(RawCorpus { docs, labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dtm_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.txt");
        let d = SparseDtm::new(
            3,
            vec![vec![(2, 5), (0, 1)], vec![], vec![(1, 2)]],
            vec!["a".into(), "b".into(), "a".into()],
            vec!["t0".into(), "t1".into(), "t2".into()],
        )
        .unwrap();
        write_dtm(&d, &p).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "3 3 2\n0 0 1\n0 2 5\n2 1 2\na\nb\na\n"
        );
        assert_eq!(read_dtm(&p).unwrap(), d);
    }

    #[test]
    fn dtm_file_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.txt");
        fs::write(&p, "2 3\n0 0 1\na\nb\n").unwrap();
        assert!(read_dtm(&p).unwrap_err().is_input());
        fs::write(&p, "2 3 1\n0 0 1\na\nb\n").unwrap();
        assert!(read_dtm(&p).is_err());
    }
}

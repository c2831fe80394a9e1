use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Provenance, Scatterplot, COMPONENT};
use crate::error::{Error, Result};
use crate::numfmt::fmt_sig;

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        component: COMPONENT,
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Serializes a scatterplot:
///
/// ```text
/// N
/// # key=value        (provenance, sorted by key)
/// x y label          (N rows, 9 significant digits)
/// ```
pub fn scatterplot_to_string(plot: &Scatterplot) -> String {
    let mut out = String::new();
    writeln!(out, "{}", plot.len()).unwrap();
    for (k, v) in &plot.provenance.0 {
        writeln!(out, "# {k}={v}").unwrap();
    }
    for (p, l) in plot.points().iter().zip(plot.labels()) {
        writeln!(out, "{} {} {}", fmt_sig(p[0]), fmt_sig(p[1]), l).unwrap();
    }
    out
}

pub fn write_scatterplot(plot: &Scatterplot, path: &Path) -> Result<()> {
    fs::write(path, scatterplot_to_string(plot)).map_err(|e| Error::io(path, e))
}

pub fn read_scatterplot(path: &Path) -> Result<Scatterplot> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| format_err(path, 1, "empty file"))?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|_| format_err(path, 1, "header must be the point count N"))?;
    let mut provenance = Provenance::default();
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (idx, line) in lines {
        let lineno = idx + 1;
        if let Some(comment) = line.strip_prefix('#') {
            let (k, v) = comment
                .trim()
                .split_once('=')
                .ok_or_else(|| format_err(path, lineno, "provenance must be `key=value`"))?;
            provenance.insert(k.trim(), v.trim());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let &[x, y, label] = fields.as_slice() else {
            return Err(format_err(path, lineno, "expected `x y label`"));
        };
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| format_err(path, lineno, format!("bad coordinate `{s}`")))
        };
        points.push([parse(x)?, parse(y)?]);
        labels.push(label.to_string());
    }
    if points.len() != n {
        return Err(format_err(
            path,
            1,
            format!("header declares {n} points, found {}", points.len()),
        ));
    }
    Ok(Scatterplot::new(points, labels)?.with_provenance(provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_quantized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.txt");
        let mut prov = Provenance::default();
        prov.insert("dr", "mds");
        prov.insert("corpus", "toy");
        let plot = Scatterplot::new(
            vec![[1.0 / 3.0, -2.0], [1e-7, 12345.678901]],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
        .with_provenance(prov);
        write_scatterplot(&plot, &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "2\n# corpus=toy\n# dr=mds\n0.333333333 -2 a\n0.0000001 12345.6789 b\n"
        );
        assert_eq!(read_scatterplot(&path).unwrap(), plot.quantized());
    }

    #[test]
    fn rejects_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.txt");
        fs::write(&path, "3\n0 0 a\n").unwrap();
        assert!(read_scatterplot(&path).unwrap_err().is_input());
    }
}

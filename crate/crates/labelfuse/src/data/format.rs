//! The sparse dataset text format.
//!
//! UTF-8, LF line endings. Lines starting with `#` are comments; blank lines
//! are skipped. Each data line is `LABELS SP FEATURES` where
//!
//! * `LABELS` is a comma-separated list of 0-based category indices with no
//!   spaces, or the literal `?` for an empty label set (only accepted when
//!   `allow_empty_labels` is enabled);
//! * `FEATURES` is zero or more `index:value` tokens separated by single
//!   spaces, with strictly increasing 0-based term indices and non-negative
//!   finite decimal values.
//!
//! A comment of the form `# dims: M P` declares the dimensions; the writer
//! always emits one so that parsing a written file reconstructs the exact
//! dataset. Explicitly passed dimensions take precedence over the directive,
//! which takes precedence over inference from the largest indices seen.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{Dataset, SparseDocument};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn dims_directive(text: &str) -> Option<(usize, usize)> {
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# dims:") {
            let mut it = rest.split_whitespace();
            if let (Some(m), Some(p)) = (it.next(), it.next()) {
                if let (Ok(m), Ok(p)) = (m.parse(), p.parse()) {
                    return Some((m, p));
                }
            }
        }
    }
    None
}

/// Parse the text format into a [`Dataset`].
///
/// Line order becomes `doc_id` order. With `declared_dims` (or an in-file
/// `# dims:` directive) every index is validated against the declared
/// bounds; otherwise dimensions are inferred as largest index + 1.
pub fn parse_dataset(
    text: &str,
    declared_dims: Option<(usize, usize)>,
    allow_empty_labels: bool,
) -> Result<Dataset> {
    let dims = declared_dims.or_else(|| dims_directive(text));
    let mut documents = Vec::new();
    let mut max_term = 0usize;
    let mut max_label = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }

        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-blank line has a first token");

        let mut labels = BTreeSet::new();
        if label_tok == "?" {
            if !allow_empty_labels {
                return Err(parse_err(lineno, "empty label set ('?') not allowed here"));
            }
        } else {
            for part in label_tok.split(',') {
                let l: usize = part.parse().map_err(|_| {
                    parse_err(lineno, format!("bad label index '{part}'"))
                })?;
                if let Some((_, p)) = dims {
                    if l >= p {
                        return Err(parse_err(
                            lineno,
                            format!("label index {l} >= declared p={p}"),
                        ));
                    }
                }
                max_label = max_label.max(l);
                labels.insert(l);
            }
            if labels.is_empty() {
                return Err(parse_err(lineno, "empty label list"));
            }
        }

        let mut features: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("bad feature token '{tok}'")))?;
            let t: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad term index '{idx}'")))?;
            let v: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature value '{val}'")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(parse_err(lineno, format!("feature value {v} must be finite and >= 0")));
            }
            if let Some(&(prev, _)) = features.last() {
                if t == prev {
                    return Err(parse_err(lineno, format!("duplicate term index {t}")));
                }
                if t < prev {
                    return Err(parse_err(
                        lineno,
                        format!("term index {t} not strictly increasing after {prev}"),
                    ));
                }
            }
            if let Some((m, _)) = dims {
                if t >= m {
                    return Err(parse_err(lineno, format!("term index {t} >= declared m={m}")));
                }
            }
            max_term = max_term.max(t);
            features.push((t, v));
        }

        let doc_id = documents.len();
        documents.push(
            SparseDocument::new(doc_id, features, labels)
                .map_err(|e| parse_err(lineno, e.to_string()))?,
        );
    }

    let (m, p) = dims.unwrap_or_else(|| {
        let m = if documents.iter().all(|d| d.features.is_empty()) { 0 } else { max_term + 1 };
        let p = if documents.iter().all(|d| d.labels.is_empty()) { 1 } else { max_label + 1 };
        (m, p)
    });
    Dataset::new(m, p.max(1), documents)
}

/// Serialize a dataset to the text format, including the dims directive.
pub fn write_dataset(ds: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# dims: {} {}", ds.n_terms(), ds.n_categories());
    for doc in ds.documents() {
        if doc.labels.is_empty() {
            out.push('?');
        } else {
            let mut first = true;
            for l in &doc.labels {
                if !first {
                    out.push(',');
                }
                let _ = write!(out, "{l}");
                first = false;
            }
        }
        for &(t, v) in &doc.features {
            let _ = write!(out, " {t}:{v}");
        }
        out.push('\n');
    }
    out
}

pub fn read_dataset_file(
    path: impl AsRef<Path>,
    declared_dims: Option<(usize, usize)>,
    allow_empty_labels: bool,
) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, declared_dims, allow_empty_labels)
}

pub fn write_dataset_file(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    std::fs::write(path, write_dataset(ds))?;
    Ok(())
}

/// 1-based raw line number of the `i`-th data line (0-based), for error
/// messages that must name a line in the original file.
pub fn nth_data_line(text: &str, i: usize) -> Option<usize> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
        .nth(i)
        .map(|(n, _)| n + 1)
}

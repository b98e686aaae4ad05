//! Serialization of score matrices and prediction files.
//!
//! Score CSV: one row per document, `p` comma-separated columns, 9
//! significant digits, no header.
//!
//! Prediction file: the dataset line grammar with features replaced by `p`
//! space-separated scores — `LABELS SP s_0 .. s_{p-1}`, where `LABELS` is
//! the thresholded prediction (`?` for an empty set). Rows align
//! positionally with the evaluated corpus.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::ScoreMatrix;

fn fmt_score(s: f64) -> String {
    format!("{s:.8e}")
}

/// CSV with 9 significant digits per entry.
pub fn scores_to_csv(scores: &ScoreMatrix) -> String {
    let mut out = String::new();
    for row in scores.rows() {
        for (j, &s) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_score(s));
        }
        out.push('\n');
    }
    out
}

pub fn write_scores_csv(path: impl AsRef<Path>, scores: &ScoreMatrix) -> Result<()> {
    std::fs::write(path, scores_to_csv(scores))?;
    Ok(())
}

/// Render predicted label sets plus their soft scores.
pub fn predictions_to_string(pred_sets: &[BTreeSet<usize>], scores: &ScoreMatrix) -> Result<String> {
    if pred_sets.len() != scores.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} prediction rows vs {} score rows",
            pred_sets.len(),
            scores.n_rows()
        )));
    }
    let mut out = String::new();
    let _ = writeln!(out, "# dims: {} {}", scores.n_cols(), scores.n_cols());
    for (set, row) in pred_sets.iter().zip(scores.rows()) {
        if set.is_empty() {
            out.push('?');
        } else {
            let mut first = true;
            for l in set {
                if !first {
                    out.push(',');
                }
                let _ = write!(out, "{l}");
                first = false;
            }
        }
        for &s in row {
            out.push(' ');
            out.push_str(&fmt_score(s));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_predictions(
    path: impl AsRef<Path>,
    pred_sets: &[BTreeSet<usize>],
    scores: &ScoreMatrix,
) -> Result<()> {
    std::fs::write(path, predictions_to_string(pred_sets, scores)?)?;
    Ok(())
}

/// Parse a prediction file back into label sets and a score matrix.
pub fn parse_predictions(text: &str) -> Result<(Vec<BTreeSet<usize>>, ScoreMatrix)> {
    let mut sets: Vec<BTreeSet<usize>> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut p: Option<usize> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-blank line has a first token");
        let mut labels = BTreeSet::new();
        if label_tok != "?" {
            for part in label_tok.split(',') {
                let l: usize = part.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad label index '{part}'"),
                })?;
                labels.insert(l);
            }
        }
        let row: Vec<f64> = tokens
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad score '{t}'"),
                })
            })
            .collect::<Result<_>>()?;
        if let Some(p) = p {
            if row.len() != p {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {p} scores, found {}", row.len()),
                });
            }
        } else {
            if row.is_empty() {
                return Err(Error::Parse { line: lineno, msg: "no scores on line".into() });
            }
            p = Some(row.len());
        }
        if let Some(&l) = labels.iter().next_back() {
            if l >= row.len() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("label index {l} out of range for p={}", row.len()),
                });
            }
        }
        sets.push(labels);
        rows.push(row);
    }

    let matrix = ScoreMatrix::from_rows(rows)?;
    Ok((sets, matrix))
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<(Vec<BTreeSet<usize>>, ScoreMatrix)> {
    parse_predictions(&std::fs::read_to_string(path)?)
}

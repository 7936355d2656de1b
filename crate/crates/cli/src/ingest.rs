//! CSV ingestion of compositional data.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use coda_core::Composition;

/// Entries down to this (negative) value are rounding noise and clamp to 0.
pub const CLAMP_TOL: f64 = 1e-12;
/// Rows whose parts sum to 1 within this are accepted as they are.
pub const SUM_TOL: f64 = 1e-6;
/// Largest deviation `--renormalize` will correct.
pub const RENORMALIZE_TOL: f64 = 1e-2;
/// Number of rejected rows listed in full in an error message.
const MAX_LISTED: usize = 20;

/// How rows whose parts do not sum to 1 are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Renormalize {
    /// Accept only sums within [`SUM_TOL`] of 1.
    Off,
    /// Rescale sums within [`RENORMALIZE_TOL`] of 1.
    Near,
    /// Divide every row by its sum (counts or percentages).
    Counts,
}

impl fmt::Display for Renormalize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Renormalize::Off => "off",
            Renormalize::Near => "near",
            Renormalize::Counts => "counts",
        })
    }
}

/// Validated compositions read from a file.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub rows: Vec<Composition>,
    /// One label per part, from the header line or generated as `x1, x2, ...`.
    pub labels: Vec<String>,
    /// Response column, when requested.
    pub responses: Option<Vec<f64>>,
    pub source: PathBuf,
    /// Rows whose sum was not exactly 1 and were rescaled.
    pub rows_adjusted: usize,
    /// Largest `|sum - 1|` among the rescaled rows.
    pub max_adjustment: f64,
}

impl Dataset {
    /// Simplex dimension `d`.
    pub fn dim(&self) -> usize {
        self.labels.len() - 1
    }
}

struct Rejection {
    row: usize,
    line: usize,
    reason: String,
}

/// Reads compositions, one comma-separated row per observation. With
/// `with_response` the last column is a real-valued response and the rest
/// are the parts.
pub fn ingest(path: &Path, mode: Renormalize, with_response: bool) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text, path, mode, with_response)
}

fn parse(text: &str, path: &Path, mode: Renormalize, with_response: bool) -> Result<Dataset> {
    let mut labels: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut rows = Vec::new();
    let mut responses = Vec::new();
    let mut rejected = Vec::new();
    let (mut rows_adjusted, mut max_adjustment) = (0usize, 0.0f64);
    let mut row_no = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let values: Option<Vec<f64>> = fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        let Some(values) = values else {
            if width.is_none() && labels.is_none() {
                labels = Some(fields.iter().map(|f| f.to_string()).collect());
                width = Some(fields.len());
                continue;
            }
            row_no += 1;
            rejected.push(Rejection { row: row_no, line: line_no, reason: "non-numeric entry".into() });
            continue;
        };
        row_no += 1;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                bail!("{}: line {line_no} has {} columns, expected {w}", path.display(), values.len());
            }
            _ => {}
        }
        let (parts, response) = if with_response {
            let (last, parts) = values.split_last().expect("row has at least one field");
            (parts.to_vec(), Some(*last))
        } else {
            (values, None)
        };
        if let Some(r) = response {
            if !r.is_finite() {
                rejected.push(Rejection { row: row_no, line: line_no, reason: "response is not finite".into() });
                continue;
            }
        }
        match clean_row(parts, mode) {
            Ok((comp, adjustment)) => {
                if adjustment > 0.0 {
                    rows_adjusted += 1;
                    max_adjustment = max_adjustment.max(adjustment);
                }
                rows.push(comp);
                if let Some(r) = response {
                    responses.push(r);
                }
            }
            Err(reason) => rejected.push(Rejection { row: row_no, line: line_no, reason }),
        }
    }

    let min_parts = 2;
    let width = width.unwrap_or(0);
    let parts = if with_response { width.saturating_sub(1) } else { width };
    if parts < min_parts && row_no > 0 {
        bail!(
            "{}: need at least {min_parts} composition columns{}, found {parts}",
            path.display(),
            if with_response { " plus a response column" } else { "" }
        );
    }
    if !rejected.is_empty() {
        let mut msg = format!("{}: {} row(s) rejected", path.display(), rejected.len());
        for r in rejected.iter().take(MAX_LISTED) {
            msg.push_str(&format!("\n  row {} (line {}): {}", r.row, r.line, r.reason));
        }
        if rejected.len() > MAX_LISTED {
            msg.push_str(&format!("\n  ... and {} more", rejected.len() - MAX_LISTED));
        }
        bail!(msg);
    }
    if rows.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let labels = match labels {
        Some(mut l) => {
            l.truncate(parts);
            l
        }
        None => (1..=parts).map(|k| format!("x{k}")).collect(),
    };
    Ok(Dataset {
        rows,
        labels,
        responses: with_response.then_some(responses),
        source: path.to_path_buf(),
        rows_adjusted,
        max_adjustment,
    })
}

/// Clamps, checks and rescales one row; returns the composition and
/// `|sum - 1|` when the row was rescaled (0 otherwise).
fn clean_row(mut parts: Vec<f64>, mode: Renormalize) -> std::result::Result<(Composition, f64), String> {
    for (k, v) in parts.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(format!("part {} is not finite", k + 1));
        }
        if *v < -CLAMP_TOL {
            return Err(format!("part {} is negative ({v})", k + 1));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = parts.iter().sum();
    let dev = (sum - 1.0).abs();
    let limit = match mode {
        Renormalize::Off => SUM_TOL,
        Renormalize::Near => RENORMALIZE_TOL,
        Renormalize::Counts => f64::INFINITY,
    };
    if sum <= 0.0 {
        return Err("parts sum to zero".into());
    }
    if dev > limit {
        return Err(format!("parts sum to {sum}, tolerance is {limit:e}"));
    }
    let adjustment = if sum == 1.0 { 0.0 } else { dev };
    if adjustment > 0.0 {
        for v in parts.iter_mut() {
            *v /= sum;
        }
    }
    Composition::new(parts).map(|c| (c, adjustment)).map_err(|e| e.to_string())
}

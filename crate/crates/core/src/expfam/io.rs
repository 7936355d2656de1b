//! Plain-text parameter files.
//!
//! ```text
//! # free-form comment lines
//! d 2
//! m 2
//! log_partition 4.5158270528945482e-1
//! log_partition_se 0.0000000000000000e0
//! mc_samples 1000000
//! seed 7
//! 2 0 0 -2.0000000000000000e0
//! 1 1 0 9.0000000000000000e0
//! ...
//! ```
//!
//! Only `d`, `m` and the coefficient lines are required; unlisted multi-indices
//! have coefficient zero. Floats are written with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::{ExpFamilyModel, ThetaPoly};

/// Parsed contents of a parameter file.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaFile {
    pub theta: ThetaPoly,
    pub log_partition: Option<f64>,
    pub log_partition_se: Option<f64>,
    pub mc_samples: Option<usize>,
    pub seed: Option<u64>,
}

impl ThetaFile {
    /// The stored model, when the file carries a log-partition.
    pub fn model(&self) -> Option<ExpFamilyModel> {
        Some(ExpFamilyModel::from_parts(
            self.theta.clone(),
            self.log_partition?,
            self.log_partition_se.unwrap_or(0.0),
            self.mc_samples.unwrap_or(0),
            self.seed.unwrap_or(0),
        ))
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes a model: optional `#` comment lines from `header`, then the
/// key-value block and one coefficient line per multi-index in basis order.
pub fn write_model(model: &ExpFamilyModel, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    let t = &model.theta;
    let _ = writeln!(out, "d {}", t.dim());
    let _ = writeln!(out, "m {}", t.degree());
    let _ = writeln!(out, "log_partition {}", fmt_f64(model.log_partition));
    let _ = writeln!(out, "log_partition_se {}", fmt_f64(model.log_partition_se));
    let _ = writeln!(out, "mc_samples {}", model.mc_samples);
    let _ = writeln!(out, "seed {}", model.seed);
    for (alpha, c) in t.terms() {
        let idx: Vec<String> = alpha.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{} {}", idx.join(" "), fmt_f64(c));
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line, format!("cannot parse {what} from '{s}'")))
}

/// Parses a parameter file.
pub fn parse_theta_file(text: &str) -> Result<ThetaFile> {
    let mut d: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut log_partition = None;
    let mut log_partition_se = None;
    let mut mc_samples = None;
    let mut seed = None;
    let mut terms: Vec<(usize, Vec<u32>, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        match fields[0] {
            "d" | "m" | "log_partition" | "log_partition_se" | "mc_samples" | "seed" => {
                if fields.len() != 2 {
                    return Err(parse_err(line_no, format!("'{}' takes one value", fields[0])));
                }
                let v = fields[1];
                match fields[0] {
                    "d" => d = Some(parse_num(v, line_no, "d")?),
                    "m" => m = Some(parse_num(v, line_no, "m")?),
                    "log_partition" => log_partition = Some(parse_num(v, line_no, "log_partition")?),
                    "log_partition_se" => {
                        log_partition_se = Some(parse_num(v, line_no, "log_partition_se")?)
                    }
                    "mc_samples" => mc_samples = Some(parse_num(v, line_no, "mc_samples")?),
                    _ => seed = Some(parse_num(v, line_no, "seed")?),
                }
            }
            _ => {
                let (idx, coef) = fields.split_at(fields.len() - 1);
                if idx.is_empty() {
                    return Err(parse_err(line_no, format!("unrecognized line '{line}'")));
                }
                let alpha = idx
                    .iter()
                    .map(|s| parse_num::<u32>(s, line_no, "multi-index entry"))
                    .collect::<Result<Vec<u32>>>()?;
                let c: f64 = parse_num(coef[0], line_no, "coefficient")?;
                terms.push((line_no, alpha, c));
            }
        }
    }
    let d = d.ok_or_else(|| parse_err(0, "missing 'd' line"))?;
    let m = m.ok_or_else(|| parse_err(0, "missing 'm' line"))?;
    let mut theta = ThetaPoly::zeros(d, m)?;
    let mut seen = vec![false; theta.len()];
    for (line_no, alpha, c) in terms {
        let idx = theta
            .basis()
            .iter()
            .position(|b| *b == alpha)
            .ok_or_else(|| parse_err(line_no, format!("{alpha:?} is not a degree-{m} multi-index in {} variables", d + 1)))?;
        if seen[idx] {
            return Err(parse_err(line_no, format!("duplicate multi-index {alpha:?}")));
        }
        seen[idx] = true;
        theta.set(&alpha, c).map_err(|e| parse_err(line_no, e.to_string()))?;
    }
    Ok(ThetaFile { theta, log_partition, log_partition_se, mc_samples, seed })
}

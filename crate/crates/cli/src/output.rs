//! Run configuration headers and text output.

use std::fmt::{Display, Write as _};
use std::path::Path;

use anyhow::{Context, Result};

use crate::ingest::Dataset;

/// Shortest round-tripping scientific form: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// The settings of one run, echoed as `key=value` lines at the top of every
/// output file. Worker count and output path are deliberately left out so
/// that reruns compare byte for byte.
#[derive(Clone, Debug)]
pub struct RunConfig {
    entries: Vec<(String, String)>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self { entries: vec![("command".into(), command.into())] }
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn set_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, fmt_f64(value))
    }

    /// Records where the data came from and how it was cleaned.
    pub fn set_dataset(&mut self, data: &Dataset) -> &mut Self {
        self.set("input", data.source.display())
            .set("rows", data.rows.len())
            .set("d", data.dim())
            .set("labels", data.labels.join(";"))
            .set("rows_renormalized", data.rows_adjusted)
            .set_f64("max_renormalization", data.max_adjustment)
    }

    /// Header lines without the comment marker.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("coda {}", coda_core::VERSION)];
        out.extend(self.entries.iter().map(|(k, v)| format!("{k}={v}")));
        out
    }

    /// The header as `# `-prefixed lines.
    pub fn header(&self) -> String {
        let mut s = String::new();
        for l in self.lines() {
            let _ = writeln!(s, "# {l}");
        }
        s
    }
}

/// A header followed by comma-separated rows.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(config: &RunConfig, columns: &[String]) -> Self {
        let mut text = config.header();
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// `binom(R + 2, 2)` barycentric vertices `(i, j, k) / R` with `i + j + k = R`,
/// in descending lexicographic order of `(i, j, k)`.
pub fn lattice(resolution: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity((resolution + 1) * (resolution + 2) / 2);
    for i in (0..=resolution).rev() {
        for j in (0..=resolution - i).rev() {
            out.push([i, j, resolution - i - j]);
        }
    }
    out
}

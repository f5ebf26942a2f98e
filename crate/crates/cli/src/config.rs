//! Run configuration: defaults, `key = value` files, and range checks.

use std::path::{Path, PathBuf};

use dirac_scatter::spectrum::LatticeKind;
use serde::Serialize;

use crate::output::Ext;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub lattice: LatticeKind,
    pub a: f64,
    /// `f64::INFINITY` for the free operator.
    pub alpha: Ext,
    pub jmax: usize,
    pub mesh_n: usize,
    pub tolerance: f64,
    pub output_format: OutputFormat,
    /// `None` writes to stdout.
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lattice: LatticeKind::Honeycomb,
            a: 1.0,
            alpha: Ext(0.0),
            jmax: 8,
            mesh_n: 16,
            tolerance: 1e-10,
            output_format: OutputFormat::Csv,
            output_path: None,
        }
    }
}

pub const JMAX_RANGE: (usize, usize) = (1, 24);
pub const MESH_RANGE: (usize, usize) = (4, 512);
pub const TOL_RANGE: (f64, f64) = (1e-12, 1e-4);

fn bad(key: &str, value: &str) -> CliError {
    CliError::Config(format!("invalid value '{}' for {}", value, key))
}

/// Parses a strength; `inf` selects the free operator.
pub fn parse_alpha(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => return Ok(f64::INFINITY),
        _ => {}
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(bad("alpha", s)),
    }
}

fn parse_num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V, CliError> {
    value.trim().parse().map_err(|_| bad(key, value))
}

impl RunConfig {
    /// Sets one field from its textual form. Keys use the field names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "lattice" => self.lattice = value.trim().parse().map_err(|_| bad(key, value))?,
            "a" => self.a = parse_num(key, value)?,
            "alpha" => self.alpha = Ext(parse_alpha(value)?),
            "jmax" => self.jmax = parse_num(key, value)?,
            "mesh_n" => self.mesh_n = parse_num(key, value)?,
            "tolerance" => self.tolerance = parse_num(key, value)?,
            "output_format" => {
                self.output_format = match value.trim() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad(key, value)),
                }
            }
            "output_path" => {
                let v = value.trim();
                self.output_path = if v.is_empty() || v == "-" {
                    None
                } else {
                    Some(PathBuf::from(v))
                };
            }
            _ => return Err(CliError::Config(format!("unknown key '{}'", key))),
        }
        Ok(())
    }

    /// Applies a `key = value` file on top of `self`. Blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {}", path.display(), e)))?;
        self.apply_str(&text)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(CliError::Config(format!("a = {} must be positive", self.a)));
        }
        if !(JMAX_RANGE.0..=JMAX_RANGE.1).contains(&self.jmax) {
            return Err(CliError::Config(format!(
                "jmax = {} outside [{}, {}]",
                self.jmax, JMAX_RANGE.0, JMAX_RANGE.1
            )));
        }
        if !(MESH_RANGE.0..=MESH_RANGE.1).contains(&self.mesh_n) {
            return Err(CliError::Config(format!(
                "mesh_n = {} outside [{}, {}]",
                self.mesh_n, MESH_RANGE.0, MESH_RANGE.1
            )));
        }
        if !(self.tolerance >= TOL_RANGE.0 && self.tolerance <= TOL_RANGE.1) {
            return Err(CliError::Config(format!(
                "tolerance = {:e} outside [1e-12, 1e-4]",
                self.tolerance
            )));
        }
        Ok(())
    }
}

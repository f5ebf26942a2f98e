//! CSV and JSON emission.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::CliError;

/// Schema tag written as the first line of every CSV file and into every JSON document.
pub const SCHEMA: &str = "dirac-scatter v1";

/// An extended real: finite values serialize as numbers, infinities as `"inf"` / `"-inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ext(pub f64);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&num(self.0))
        }
    }
}

/// Full-precision scientific notation (17 significant digits); round-trips through `str::parse`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{:.16e}", x)
    }
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn io_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.map_or("stdout".into(), |p| p.display().to_string()),
        source: e,
    }
}

/// Writes `# dirac-scatter v1`, the `meta` comment lines, the column header and the rows.
pub fn write_csv(
    path: Option<&Path>,
    meta: &[String],
    columns: &[&str],
    rows: &[Vec<String>],
    trailer: &[String],
) -> Result<(), CliError> {
    let err = io_err(path);
    let mut out = open(path)?;
    writeln!(out, "# {}", SCHEMA).map_err(&err)?;
    for m in meta {
        writeln!(out, "# {}", m).map_err(&err)?;
    }
    {
        let mut w = csv::WriterBuilder::new()
            .flexible(false)
            .from_writer(&mut out);
        w.write_record(columns).map_err(|e| err(e.into()))?;
        for r in rows {
            w.write_record(r).map_err(|e| err(e.into()))?;
        }
        w.flush().map_err(&err)?;
    }
    for t in trailer {
        writeln!(out, "# {}", t).map_err(&err)?;
    }
    out.flush().map_err(&err)
}

pub fn write_json<V: Serialize>(path: Option<&Path>, value: &V) -> Result<(), CliError> {
    let err = io_err(path);
    let mut out = open(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| err(e.into()))?;
    writeln!(out).map_err(&err)?;
    out.flush().map_err(&err)
}

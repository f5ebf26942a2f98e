//! Command-line front end: band surfaces and paths, spectrum scans over alpha, cone diagnostics and
//! direct Green's function probes, written as CSV or JSON.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{OutputFormat, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(dirac_scatter::Error),
}

impl CliError {
    /// 1 for configuration and I/O problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<dirac_scatter::Error> for CliError {
    fn from(e: dirac_scatter::Error) -> Self {
        use dirac_scatter::Error as E;
        match e {
            E::NonPositiveLatticeConstant(_)
            | E::InvalidArgument(_)
            | E::NotAFreeEigenvalue(_)
            | E::OnLattice(..) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dirac-scatter",
    version,
    about = "Floquet bands of point scatterers on triangular and honeycomb lattices"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags mirroring [`RunConfig`]; they override the config file.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// key = value file applied before the flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// triangular | honeycomb
    #[arg(long, global = true)]
    pub lattice: Option<String>,
    /// Lattice constant
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Scatterer strength, or "inf"
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true)]
    pub jmax: Option<usize>,
    #[arg(long = "mesh-n", global = true)]
    pub mesh_n: Option<usize>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// csv | json
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Output file (stdout when absent)
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band values on the mesh, along a path, or at listed points
    Bands {
        /// Waypoints such as G-K-M-G
        #[arg(long)]
        path: Option<String>,
        /// Points per path segment
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Explicit momentum "kx,ky" (repeatable)
        #[arg(long = "k", allow_hyphen_values = true)]
        k: Vec<String>,
        /// Set alpha to the left limit at this free level (one honeycomb point only)
        #[arg(long, allow_hyphen_values = true)]
        case3: Option<f64>,
    },
    /// Spectrum intervals for equally spaced alpha values
    SpectrumScan {
        #[arg(long, allow_hyphen_values = true)]
        alpha_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha_max: f64,
        #[arg(long)]
        steps: usize,
        /// Bands whose extrema are refined off the mesh (default: all)
        #[arg(long)]
        polish_bands: Option<usize>,
    },
    /// Cone slopes at K against the predicted value
    Cone {
        /// Lower band of the pair (default 2 triangular, 1 honeycomb)
        #[arg(long)]
        pair: Option<usize>,
        /// Step sizes, descending
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3")]
        deltas: Vec<f64>,
    },
    /// Evaluate g_lambda(x, k) directly
    GreensProbe {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// "kx,ky" (default Gamma)
        #[arg(long = "k", allow_hyphen_values = true)]
        k: Option<String>,
        /// Off-lattice point "x,y" or "x0"; the diagonal when absent
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Treat lambda as a free level and print its pole data
        #[arg(long)]
        pole: bool,
    },
}

/// Merges the config file and flags into a validated [`RunConfig`].
pub fn resolve_config(c: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &c.config {
        cfg.apply_file(p)?;
    }
    if let Some(v) = &c.lattice {
        cfg.set("lattice", v)?;
    }
    if let Some(v) = c.a {
        cfg.a = v;
    }
    if let Some(v) = &c.alpha {
        cfg.set("alpha", v)?;
    }
    if let Some(v) = c.jmax {
        cfg.jmax = v;
    }
    if let Some(v) = c.mesh_n {
        cfg.mesh_n = v;
    }
    if let Some(v) = c.tolerance {
        cfg.tolerance = v;
    }
    if let Some(v) = &c.format {
        cfg.set("output_format", v)?;
    }
    if let Some(v) = &c.output {
        cfg.output_path = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(&cli.common)?;
    match &cli.command {
        Command::Bands {
            path,
            steps,
            k,
            case3,
        } => commands::bands(&cfg, path.as_deref(), *steps, k, *case3),
        Command::SpectrumScan {
            alpha_min,
            alpha_max,
            steps,
            polish_bands,
        } => commands::spectrum_scan(&cfg, *alpha_min, *alpha_max, *steps, *polish_bands),
        Command::Cone { pair, deltas } => commands::cone(&cfg, *pair, deltas),
        Command::GreensProbe { lambda, k, x, pole } => {
            commands::greens_probe(&cfg, *lambda, k.as_deref(), x.as_deref(), *pole)
        }
    }
}

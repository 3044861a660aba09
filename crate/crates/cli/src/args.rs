//! Command-line definitions and validation into resolved configs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use filmspec::routes::{DEFAULT_CUTOFF, MIN_NYSTROM_NODES};
use filmspec::Execution;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "filmspec",
    version,
    about = "Spectra of the rotating-film operator family and its eps -> 0 limit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Pretty, global = true)]
    pub format: Format,

    /// Output file; relative paths resolve against FILM_SPECTRUM_OUT_DIR when set.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Default output directory; without --output the file is `<command>.<ext>` there.
    #[arg(long, env = "FILM_SPECTRUM_OUT_DIR", global = true, hide_env_values = true)]
    pub out_dir: Option<PathBuf>,

    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Pretty,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Pretty => "txt",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues for one eps (or the limit) by one or both routes.
    Spectrum(SpectrumArgs),
    /// Eigenvalue and HS-distance convergence sweep over a decreasing eps list.
    Converge(ConvergeArgs),
    /// HS norm of the limit inverse, or HS distances for given eps.
    Hsnorm(HsnormArgs),
    /// Pointwise kernel-difference bound and dominating-function audits.
    Audit(AuditArgs),
    /// Exact eigenpolynomial coefficients and Gram checks.
    Eigenpoly(EigenpolyArgs),
    /// Reduced-size run of the property suite.
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Converge(_) => "converge",
            Command::Hsnorm(_) => "hsnorm",
            Command::Audit(_) => "audit",
            Command::Eigenpoly(_) => "eigenpoly",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteArg {
    Fourier,
    Nystrom,
    Both,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepRouteArg {
    Nystrom,
    Fourier,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Discretization {
    /// Nystrom node count.
    #[arg(long, default_value_t = 400)]
    pub nodes: usize,
    /// Nystrom cutoff in the stretched coordinate.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: f64,
    /// Starting Fourier truncation size.
    #[arg(long, default_value_t = 80)]
    pub trunc: usize,
    /// Largest Fourier truncation tried.
    #[arg(long, default_value_t = 65536)]
    pub max_trunc: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, conflicts_with = "limit")]
    pub eps: Option<f64>,
    /// Use the eps = 0 limit kernel (routes nystrom or exact).
    #[arg(long)]
    pub limit: bool,
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = RouteArg::Both)]
    pub route: RouteArg,
    #[command(flatten)]
    pub disc: Discretization,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergeArgs {
    /// Strictly decreasing eps values.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 0.1, 0.05, 0.025])]
    pub eps_list: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = SweepRouteArg::Nystrom)]
    pub route: SweepRouteArg,
    #[command(flatten)]
    pub disc: Discretization,
    /// Relative tolerance of the HS integrals.
    #[arg(long, default_value_t = 1e-4)]
    pub hs_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HsnormArgs {
    /// Norm of the limit inverse plus the weighted bound.
    #[arg(long)]
    pub limit: bool,
    /// HS distance to the limit for each eps.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AuditArgs {
    #[arg(long)]
    pub eps: f64,
    /// Points per axis of the log grid.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EigenpolyArgs {
    #[arg(long)]
    pub n: usize,
}

fn config_err(field: &'static str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field,
        message: message.into(),
    }
}

fn check_eps(field: &'static str, e: f64) -> Result<(), CliError> {
    if e.is_finite() && e > 0.0 && e < 1.0 {
        Ok(())
    } else {
        Err(config_err(field, format!("eps must lie in (0, 1), got {e}")))
    }
}

fn check_n_max(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(config_err("n_max", "must be at least 1"));
    }
    Ok(())
}

impl Discretization {
    fn validate(&self, n_max: usize) -> Result<(), CliError> {
        if self.nodes < MIN_NYSTROM_NODES {
            return Err(config_err(
                "nodes",
                format!("must be at least {MIN_NYSTROM_NODES}, got {}", self.nodes),
            ));
        }
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return Err(config_err("cutoff", format!("must be positive, got {}", self.cutoff)));
        }
        if self.trunc < 4 * n_max {
            return Err(config_err(
                "trunc",
                format!("must be at least 4 n_max = {}, got {}", 4 * n_max, self.trunc),
            ));
        }
        if self.max_trunc < self.trunc {
            return Err(config_err("max_trunc", "must not be below trunc"));
        }
        Ok(())
    }
}

impl Cli {
    pub fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    /// Checks every numeric field before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.command {
            Command::Spectrum(a) => {
                check_n_max(a.n_max)?;
                match (a.eps, a.limit) {
                    (Some(e), _) => check_eps("eps", e)?,
                    (None, true) => {
                        if matches!(a.route, RouteArg::Fourier | RouteArg::Both) {
                            return Err(config_err(
                                "route",
                                "the limit kernel has only the nystrom and exact routes",
                            ));
                        }
                    }
                    (None, false) => return Err(config_err("eps", "give --eps or --limit")),
                }
                if a.route == RouteArg::Exact && !a.limit {
                    return Err(config_err("route", "the exact route exists only for --limit"));
                }
                a.disc.validate(a.n_max)
            }
            Command::Converge(a) => {
                check_n_max(a.n_max)?;
                if a.eps_list.is_empty() {
                    return Err(config_err("eps_list", "must not be empty"));
                }
                for &e in &a.eps_list {
                    check_eps("eps_list", e)?;
                }
                if a.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(config_err("eps_list", "must be strictly decreasing"));
                }
                if !(a.hs_tol >= 1e-5) {
                    return Err(config_err("hs_tol", format!("must be at least 1e-5, got {}", a.hs_tol)));
                }
                a.disc.validate(a.n_max)
            }
            Command::Hsnorm(a) => {
                if !a.limit && a.eps.is_empty() {
                    return Err(config_err("eps", "give --limit or at least one --eps"));
                }
                for &e in &a.eps {
                    check_eps("eps", e)?;
                }
                if !(a.tol >= 1e-5) {
                    return Err(config_err("tol", format!("must be at least 1e-5, got {}", a.tol)));
                }
                Ok(())
            }
            Command::Audit(a) => {
                check_eps("eps", a.eps)?;
                if a.grid < 2 {
                    return Err(config_err("grid", "must be at least 2"));
                }
                if !(a.tol >= 1e-5) {
                    return Err(config_err("tol", format!("must be at least 1e-5, got {}", a.tol)));
                }
                Ok(())
            }
            Command::Eigenpoly(a) => {
                if a.n == 0 || a.n > filmspec::limit::MAX_EXACT_INDEX {
                    return Err(config_err(
                        "n",
                        format!("must lie in 1..={}", filmspec::limit::MAX_EXACT_INDEX),
                    ));
                }
                Ok(())
            }
            Command::Selftest => Ok(()),
        }
    }

    /// Where the output goes; `None` means stdout.
    pub fn destination(&self) -> Option<PathBuf> {
        match (&self.output, &self.out_dir) {
            (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
            (Some(p), _) => Some(p.clone()),
            (None, Some(dir)) => Some(dir.join(format!("{}.{}", self.command.name(), self.format.extension()))),
            (None, None) => None,
        }
    }

    /// The full resolved configuration, embedded in every JSON document.
    pub fn resolved(&self) -> serde_json::Value {
        let args = match &self.command {
            Command::Spectrum(a) => serde_json::to_value(a),
            Command::Converge(a) => serde_json::to_value(a),
            Command::Hsnorm(a) => serde_json::to_value(a),
            Command::Audit(a) => serde_json::to_value(a),
            Command::Eigenpoly(a) => serde_json::to_value(a),
            Command::Selftest => Ok(serde_json::json!({})),
        }
        .unwrap_or(serde_json::Value::Null);
        serde_json::json!({
            "command": self.command.name(),
            "args": args,
            "format": self.format,
            "execution": if self.sequential { "sequential" } else { "parallel" },
        })
    }
}

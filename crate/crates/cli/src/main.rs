//! `besov`: command-line driver for sequence norms, approximation runs,
//! width sweeps and the corner-singularity benchmark.
//!
//! Exit codes: 0 success, 1 a pass/fail check failed, 2 usage or parse
//! error, 3 uncovered parameter regime.

mod commands;
mod config;
mod family;
mod parse;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "besov", version, about = "Besov sequence-space approximation experiments")]
struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Continuous,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Extremal,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionArg {
    Corner,
    Cusp,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the b^s_{p,q} norm of a sequence file.
    Norm {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Space as `s,p,q,d`.
        #[arg(long)]
        space: Option<String>,
        /// Write a JSON summary here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Approximate a sequence with n terms.
    Approx {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Source space `s,p,q,d` (needed by `continuous`).
        #[arg(long)]
        source: Option<String>,
        /// Target space `s,p,q,d` (error norm).
        #[arg(long)]
        target: Option<String>,
        /// Write the approximation result here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sweep n, fit rates and compare with the width asymptotics.
    Widths {
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        target: Option<String>,
        /// `2^a..2^b` or a comma list.
        #[arg(long)]
        n: Option<String>,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// Sequences in the random family.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Slope tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Comma list of Linear, NTerm, Manifold, Gelfand, Bernstein.
        #[arg(long)]
        kinds: Option<String>,
        /// Output prefix: writes `<out>.csv` and `<out>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear vs nonlinear rates for a corner singularity or radial cusp.
    Poisson {
        #[arg(long, value_enum)]
        function: Option<FunctionArg>,
        /// Interior angle, e.g. `3pi/2`.
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        /// Dimension of the cusp grid.
        #[arg(long)]
        dim: Option<u32>,
        /// Grid level L (2^L points per axis).
        #[arg(long, allow_hyphen_values = true)]
        level: Option<i64>,
        /// `4^a..4^b` or a comma list.
        #[arg(long)]
        n: Option<String>,
        /// `haar` or `spline(m,m_dual)`.
        #[arg(long)]
        wavelet: Option<String>,
        #[arg(long)]
        t_nominal: Option<f64>,
        /// Required linear-minus-nonlinear slope gap.
        #[arg(long)]
        min_gap: Option<f64>,
        /// Output prefix: writes `<out>.csv` and `<out>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(besov_core::Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(path.to_path_buf(), e)
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(besov_core::Error::UncoveredRegime(_)) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<besov_core::Error> for CliError {
    fn from(e: besov_core::Error) -> Self {
        CliError::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("besov: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Returns whether every pass/fail check passed.
fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let exec = commands::execution(cli.threads.or(cfg.threads))?;
    match cli.command {
        Command::Norm { input, space, json } => commands::norm(commands::NormArgs {
            input: required(input.or(cfg.input), "--input")?,
            space: required(space.or(cfg.space), "--space")?,
            json: json.or(cfg.json),
        }),
        Command::Approx { input, n, method, source, target, out, json } => {
            let method = match method {
                Some(m) => m,
                None => match cfg.method.as_deref() {
                    Some(s) => Method::from_str(s, true).map_err(|_| CliError::Usage(format!("invalid method '{s}'")))?,
                    None => return Err(CliError::Usage("missing --method".into())),
                },
            };
            commands::approx(commands::ApproxArgs {
                input: required(input.or(cfg.input), "--input")?,
                n: required(n.or(cfg.n.as_deref().map(parse_single_n).transpose()?), "--n")?,
                method,
                source: source.or(cfg.source),
                target: required(target.or(cfg.target), "--target")?,
                out: out.or(cfg.out),
                json: json.or(cfg.json),
            })
        }
        Command::Widths { source, target, n, family, samples, seed, tol, kinds, out } => {
            let family = match family {
                Some(f) => f,
                None => match cfg.family.as_deref() {
                    Some(s) => FamilyArg::from_str(s, true).map_err(|_| CliError::Usage(format!("invalid family '{s}'")))?,
                    None => FamilyArg::Extremal,
                },
            };
            commands::widths(
                commands::WidthsArgs {
                    source: required(source.or(cfg.source), "--source")?,
                    target: required(target.or(cfg.target), "--target")?,
                    n: n.or(cfg.n).unwrap_or_else(|| "2^4..2^13".into()),
                    family,
                    samples: samples.or(cfg.samples).unwrap_or(32),
                    seed: seed.or(cfg.seed).unwrap_or(0),
                    tol: tol.or(cfg.tol).unwrap_or(besov_core::widths::DEFAULT_SLOPE_TOL),
                    kinds: kinds.or(cfg.kinds).unwrap_or_else(|| "Linear,NTerm".into()),
                    out: out.or(cfg.out),
                },
                exec,
            )
        }
        Command::Poisson { function, omega, m, cutoff, alpha, beta, dim, level, n, wavelet, t_nominal, min_gap, out } => {
            let function = match function {
                Some(f) => f,
                None => match cfg.function.as_deref() {
                    Some(s) => FunctionArg::from_str(s, true).map_err(|_| CliError::Usage(format!("invalid function '{s}'")))?,
                    None => FunctionArg::Corner,
                },
            };
            let level = match level.or(cfg.level.map(i64::from)) {
                Some(l) if l < 0 => return Err(CliError::Usage(format!("grid level must be >= 0, got {l}"))),
                Some(l) => l as u32,
                None => besov_core::poisson::DEFAULT_GRID_LEVEL,
            };
            commands::poisson(
                commands::PoissonArgs {
                    function,
                    omega: omega.or(cfg.omega.map(|o| o.into_text())).unwrap_or_else(|| "3pi/2".into()),
                    m: m.or(cfg.m).unwrap_or(1),
                    cutoff: cutoff.or(cfg.cutoff),
                    alpha: alpha.or(cfg.alpha).unwrap_or(0.5),
                    beta: beta.or(cfg.beta).unwrap_or(0.0),
                    dim: dim.or(cfg.dim).unwrap_or(2),
                    level,
                    n: n.or(cfg.n),
                    wavelet: wavelet.or(cfg.wavelet).unwrap_or_else(|| "spline(3,3)".into()),
                    t_nominal: t_nominal.or(cfg.t_nominal).unwrap_or(1.0),
                    min_gap: min_gap.or(cfg.min_gap).unwrap_or(0.2),
                    out: out.or(cfg.out),
                },
                exec,
            )
        }
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing {flag}")))
}

fn parse_single_n(s: &str) -> Result<usize, CliError> {
    s.trim().parse().map_err(|_| CliError::Usage(format!("bad n '{s}'")))
}

//! `ksym` — command-line harness around the `ksym-core` integrators:
//! trajectory simulation, tableau condition checking, strong-convergence and
//! error-table studies, phase-area evolution, and structure-defect scans.
//! All outputs are deterministic functions of the flag set; CSV goes to
//! stdout unless `--output` names a file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod exec;
mod outfmt;
mod parse;
mod schemes;
mod tableau_text;

/// A command failure, carrying the process exit code: 1 for numeric or
/// runtime failures, 2 for usage and parse errors.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) => m,
        }
    }
}

/// Shorthand constructors used across the command modules.
pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn numeric(msg: impl ToString) -> Failure {
    Failure::Numeric(msg.to_string())
}

#[derive(Parser)]
#[command(
    name = "ksym",
    version,
    about = "Structure-preserving stochastic integrators: simulation and experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect coefficient tableaus
    Tableau {
        #[command(subcommand)]
        sub: TableauSub,
    },
    /// Integrate one trajectory and write `t,x,y` CSV
    Simulate(SimulateArgs),
    /// Strong-convergence study: L1 error vs step size with slope fits
    Convergence(ConvergenceArgs),
    /// L1 error table over a list of horizons at one step size
    Table(TableArgs),
    /// Phase-area evolution of a triangle under each scheme vs the reference
    PhaseArea(PhaseAreaArgs),
    /// Finite-difference defect scan of the preserved two-form
    Defect(DefectArgs),
    /// Dump one path's Wiener increments as `step,increment` CSV
    Increments(IncrementsArgs),
}

#[derive(Subcommand)]
enum TableauSub {
    /// Verify the structure and weight-sum conditions of a tableau
    Check(TableauCheckArgs),
}

#[derive(Args)]
struct TableauCheckArgs {
    /// Built-in scheme id (1-4)
    #[arg(long, conflicts_with = "file")]
    builtin: Option<u8>,
    /// Tableau text file (sections A, B, alpha, beta; tilde forms for
    /// partitioned methods)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Free coefficients a11,b11 of the one-parameter-pair family
    #[arg(long, value_parser = parse::parse_free_params)]
    free_params: Option<(f64, f64)>,
}

/// Flags shared by every CSV-producing subcommand.
#[derive(Args)]
struct OutputOpts {
    /// RNG seed (echoed into the output header)
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write CSV here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Model coefficients flag.
#[derive(Args)]
struct ModelOpts {
    /// Model coefficients gamma1,gamma2,eta1,eta2,sigma1,sigma2
    #[arg(long, default_value = "1,1,1.5,1,1,0")]
    params: String,
}

/// Implicit-stage iteration settings.
#[derive(Args)]
struct FpOpts {
    /// Stage fixed-point tolerance
    #[arg(long, value_parser = parse::parse_real, default_value = "1e-12")]
    fp_tol: f64,
    /// Stage fixed-point iteration cap
    #[arg(long, default_value_t = 200)]
    fp_max_iter: u32,
}

impl FpOpts {
    fn to_opts(&self) -> schemes::FixedPointOpts {
        schemes::FixedPointOpts { tol: self.fp_tol, max_iter: self.fp_max_iter }
    }
}

/// Monte Carlo scale settings shared by convergence and table runs.
#[derive(Args)]
struct ScaleOpts {
    /// Monte Carlo path count (default 200; 1000 with --full-scale)
    #[arg(long)]
    paths: Option<u64>,
    /// Reference step size (default 2^-11; 2^-12 with --full-scale)
    #[arg(long, value_parser = parse::parse_real)]
    h_ref: Option<f64>,
    /// Larger preset: 1000 paths, reference step 2^-12, convergence steps
    /// down to 2^-9
    #[arg(long)]
    full_scale: bool,
    /// Worker thread count for path-parallel runs (output is identical for
    /// any value)
    #[arg(long)]
    threads: Option<usize>,
}

impl ScaleOpts {
    fn resolve_paths(&self) -> u64 {
        self.paths.unwrap_or(if self.full_scale {
            ksym_core::experiments::FULL_N_PATHS
        } else {
            ksym_core::experiments::DESK_N_PATHS
        })
    }

    fn resolve_h_ref(&self) -> f64 {
        self.h_ref.unwrap_or(if self.full_scale {
            ksym_core::experiments::FULL_H_REF
        } else {
            ksym_core::experiments::DESK_H_REF
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Scheme label: 1, 2, 3, 4, em, or milstein
    #[arg(long)]
    scheme: String,
    /// Step size (power notation like 2^-5 accepted)
    #[arg(long, value_parser = parse::parse_real)]
    h: f64,
    /// Horizon (rounded to a whole number of steps; realized value echoed)
    #[arg(long = "T", value_parser = parse::parse_real)]
    t_final: f64,
    /// Wiener path id
    #[arg(long, default_value_t = 0)]
    path_id: u64,
    /// Initial x
    #[arg(long, value_parser = parse::parse_real, default_value = "1")]
    x0: f64,
    /// Initial y
    #[arg(long, value_parser = parse::parse_real, default_value = "2")]
    y0: f64,
    /// Free coefficients a11,b11 for scheme 2
    #[arg(long, value_parser = parse::parse_free_params, default_value = "0.125,0.25")]
    free_params: (f64, f64),
    #[command(flatten)]
    fp: FpOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Schemes to study, comma-separated
    #[arg(long, default_value = "em,milstein,1,4")]
    schemes: String,
    /// Step sizes, comma-separated and strictly decreasing
    /// (default 2^-4..2^-8; 2^-4..2^-9 with --full-scale)
    #[arg(long)]
    h_list: Option<String>,
    /// Horizon
    #[arg(long = "T", value_parser = parse::parse_real, default_value = "1")]
    t_final: f64,
    /// Initial x
    #[arg(long, value_parser = parse::parse_real, default_value = "1")]
    x0: f64,
    /// Initial y
    #[arg(long, value_parser = parse::parse_real, default_value = "2")]
    y0: f64,
    /// Reference scheme id (4, or 1 for cross-validation)
    #[arg(long, default_value_t = 4)]
    ref_scheme: u8,
    /// Free coefficients a11,b11 for scheme 2
    #[arg(long, value_parser = parse::parse_free_params, default_value = "0.125,0.25")]
    free_params: (f64, f64),
    #[command(flatten)]
    scale: ScaleOpts,
    #[command(flatten)]
    fp: FpOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct TableArgs {
    /// Schemes to tabulate, comma-separated
    #[arg(long, default_value = "1,4,em,milstein")]
    schemes: String,
    /// Horizons, comma-separated
    #[arg(long = "T", default_value = "0.5,1,5,10,20")]
    t_list: String,
    /// Step size
    #[arg(long, value_parser = parse::parse_real, default_value = "2^-6")]
    h: f64,
    /// Initial x
    #[arg(long, value_parser = parse::parse_real, default_value = "1")]
    x0: f64,
    /// Initial y
    #[arg(long, value_parser = parse::parse_real, default_value = "2")]
    y0: f64,
    /// Reference scheme id (4, or 1 for cross-validation)
    #[arg(long, default_value_t = 4)]
    ref_scheme: u8,
    /// Free coefficients a11,b11 for scheme 2
    #[arg(long, value_parser = parse::parse_free_params, default_value = "0.125,0.25")]
    free_params: (f64, f64),
    #[command(flatten)]
    scale: ScaleOpts,
    #[command(flatten)]
    fp: FpOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct PhaseAreaArgs {
    /// Triangle vertices x1,y1,x2,y2,x3,y3
    #[arg(long, default_value = "1,7,7,1,2,8")]
    triangle: String,
    /// Step size
    #[arg(long, value_parser = parse::parse_real, default_value = "2^-5")]
    h: f64,
    /// Horizon (rounded to a whole number of steps; realized value echoed)
    #[arg(long = "T", value_parser = parse::parse_real, default_value = "0.2")]
    t_final: f64,
    /// Schemes to propagate, comma-separated
    #[arg(long, default_value = "1,milstein")]
    schemes: String,
    /// Reference scheme id (4, or 1 for cross-validation)
    #[arg(long, default_value_t = 4)]
    ref_scheme: u8,
    /// Reference step size (default 2^-11; 2^-12 with --full-scale)
    #[arg(long, value_parser = parse::parse_real)]
    h_ref: Option<f64>,
    /// Use the larger preset's reference step 2^-12
    #[arg(long)]
    full_scale: bool,
    /// Free coefficients a11,b11 for scheme 2
    #[arg(long, value_parser = parse::parse_free_params, default_value = "0.125,0.25")]
    free_params: (f64, f64),
    #[command(flatten)]
    fp: FpOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct DefectArgs {
    /// Schemes to scan, comma-separated
    #[arg(long, default_value = "1,2,3,4,em,milstein")]
    schemes: String,
    /// Number of probe states (log-uniform in the state box)
    #[arg(long, default_value_t = 20)]
    states: usize,
    /// Probe state box lo,hi (both coordinates)
    #[arg(long, default_value = "0.1,10")]
    state_box: String,
    /// Step sizes, comma-separated; each probed at J in {0, +sqrt(h), -sqrt(h)}
    #[arg(long, default_value = "2^-4,2^-6")]
    h_list: String,
    /// Free coefficients a11,b11 for scheme 2
    #[arg(long, value_parser = parse::parse_free_params, default_value = "0.125,0.25")]
    free_params: (f64, f64),
    #[command(flatten)]
    fp: FpOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct IncrementsArgs {
    /// Horizon
    #[arg(long = "T", value_parser = parse::parse_real)]
    t_final: f64,
    /// Number of increments
    #[arg(long)]
    n: usize,
    /// Wiener path id
    #[arg(long, default_value_t = 0)]
    path_id: u64,
    #[command(flatten)]
    out: OutputOpts,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    let result = match cli.cmd {
        Cmd::Tableau { sub: TableauSub::Check(args) } => commands::tableau::run(args),
        Cmd::Simulate(args) => commands::simulate::run(args),
        Cmd::Convergence(args) => commands::convergence::run(args),
        Cmd::Table(args) => commands::table::run(args),
        Cmd::PhaseArea(args) => commands::phase::run(args),
        Cmd::Defect(args) => commands::defect::run(args),
        Cmd::Increments(args) => commands::increments::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

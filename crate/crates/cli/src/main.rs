//! `zipper`: builds steric-zipper fibril models and runs the underlying
//! optimization problems from the command line.
//!
//! Exit codes: 0 success, 1 gradient check failed, 2 parse or usage error,
//! 3 optimization error, 4 I/O, lookup or structure error, 5 network error.

// `!(x <= tol)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use zipper_core::fibril::{TransformMode, DEFAULT_ARCHIVE_URL};
use zipper_core::optim::Method;

use crate::output::CliError;

#[derive(Debug, Parser)]
#[command(name = "zipper", version, about = "Steric-zipper fibril model builder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a 12-chain fibril model and its contact report.
    Build(BuildArgs),
    /// Solve a sensor/anchor distance-geometry problem.
    SolveDg(SolveDgArgs),
    /// Fit a strand axis by gradient descent and by the inertia eigenvector.
    FitAxis(FitAxisArgs),
    /// Lennard-Jones cluster minimization or pair-curve tabulation.
    Lj(LjArgs),
    /// Compare analytic gradients with central finite differences.
    CheckGrad(CheckGradArgs),
}

/// Optimizer selection and configuration shared by the optimizing commands.
#[derive(Debug, Args)]
struct OptimizerArgs {
    /// sd, cg, lbfgs, sa, sdcg-sa-sdcg or saec.
    #[arg(long, value_parser = parse_method)]
    optimizer: Option<Method>,
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key=value optimizer config file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Single config override, e.g. `--set sa.t_initial=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the optimizer trace as CSV.
    #[arg(long, value_name = "CSV")]
    trace: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: zipper_core::Error| e.to_string())
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").args(["template", "fetch"])))]
#[command(group(ArgGroup::new("spec").required(true).args(["model", "recipe"])))]
struct BuildArgs {
    /// Template structure file. Either this, --fetch or a template named in the
    /// recipe is required.
    #[arg(long, value_name = "PATH")]
    template: Option<PathBuf>,
    /// Download the template by 4-character id (cached).
    #[arg(long, value_name = "ID")]
    fetch: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    model: Option<u8>,
    /// Build recipe JSON.
    #[arg(long, value_name = "FILE")]
    recipe: Option<PathBuf>,
    #[arg(long, value_enum)]
    transform: Option<TransformArg>,
    #[command(flatten)]
    opt: OptimizerArgs,
    /// Output PDB (12 chains).
    #[arg(long, value_name = "PDB")]
    out: PathBuf,
    /// Contact report JSON; printed to stdout when omitted.
    #[arg(long, value_name = "JSON")]
    report: Option<PathBuf>,
    /// Write the 4-chain optimized core as well.
    #[arg(long, value_name = "PDB")]
    core_out: Option<PathBuf>,
    /// Template cache directory; defaults to $ZIPPER_CACHE_DIR or the user cache.
    #[arg(long, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_name = "URL", default_value = DEFAULT_ARCHIVE_URL, hide = true)]
    archive_url: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformArg {
    Shipped,
    Derived,
}

impl From<TransformArg> for TransformMode {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Shipped => TransformMode::Shipped,
            TransformArg::Derived => TransformMode::Derived,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["problem", "builtin"])))]
struct SolveDgArgs {
    /// Problem JSON.
    #[arg(long, value_name = "FILE")]
    problem: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    builtin: Option<u8>,
    #[command(flatten)]
    opt: OptimizerArgs,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["pdb", "builtin_strand"])))]
struct FitAxisArgs {
    #[arg(long, value_name = "PATH", requires = "chain")]
    pdb: Option<PathBuf>,
    /// Chain id; repeatable.
    #[arg(long, value_name = "ID")]
    chain: Vec<char>,
    #[arg(long, value_enum)]
    builtin_strand: Option<StrandArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "UPPER")]
enum StrandArg {
    A,
    B,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["cluster", "curve"])))]
struct LjArgs {
    /// Minimize an N-atom cluster in reduced units.
    #[arg(long, value_name = "N")]
    cluster: Option<usize>,
    /// Tabulate the 12-6 pair curve.
    #[arg(long)]
    curve: bool,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Curve start, in units of sigma.
    #[arg(long, default_value_t = 0.9)]
    r_min: f64,
    /// Curve end, in units of sigma.
    #[arg(long, default_value_t = 3.0)]
    r_max: f64,
    #[arg(long, default_value_t = 2101)]
    samples: usize,
    /// Curve CSV; printed to stdout when omitted.
    #[arg(long, value_name = "CSV", requires = "curve")]
    out: Option<PathBuf>,
    #[command(flatten)]
    opt: OptimizerArgs,
}

#[derive(Debug, Args)]
struct CheckGradArgs {
    #[arg(long, value_enum)]
    objective: GradObjective,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-6)]
    step: f64,
    /// Atoms in the lj-cluster objective.
    #[arg(long, default_value_t = 5)]
    atoms: usize,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GradObjective {
    #[value(name = "lj-cluster")]
    LjCluster,
    #[value(name = "dg-model1")]
    DgModel1,
    #[value(name = "dg-model2")]
    DgModel2,
    #[value(name = "dg-model3")]
    DgModel3,
    #[value(name = "axis-fit")]
    AxisFit,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return CliError::usage(e.render().to_string().trim_end()).report();
        }
    };
    let result = match cli.command {
        Command::Build(a) => commands::build(a),
        Command::SolveDg(a) => commands::solve_dg(a),
        Command::FitAxis(a) => commands::fit_axis_command(a),
        Command::Lj(a) => commands::lj(a),
        Command::CheckGrad(a) => commands::check_grad(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => e.report(),
    }
}

//! Error mapping to exit codes and the JSON documents printed by each command.

use std::process::ExitCode;

use serde::Serialize;
use zipper_core::fibril::{OptimizerSummary, StrandAxis};
use zipper_core::geomopt::{Edge, EndpointRef};
use zipper_core::optim::{Method, OptimizationResult, OptimizerConfig, StageSummary, StopReason};
use zipper_core::Error;

/// Format version of every JSON document the CLI prints.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Usage,
    Parse,
    Optimize,
    Io,
    Lookup,
    Structure,
    Network,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Usage | ErrorKind::Parse => 2,
            ErrorKind::Optimize => 3,
            ErrorKind::Io | ErrorKind::Lookup | ErrorKind::Structure => 4,
            ErrorKind::Network => 5,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub exit_code: u8,
}

#[derive(Serialize)]
struct ErrorDocument<'a> {
    error: &'a CliError,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into(), exit_code: kind.exit_code() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Usage, message)
    }

    pub fn io(context: &str, e: std::io::Error) -> Self {
        Self::new(ErrorKind::Io, format!("{context}: {e}"))
    }

    /// Prints `{"error": {...}}` on stderr and returns the exit code.
    pub fn report(&self) -> ExitCode {
        let doc = serde_json::to_string(&ErrorDocument { error: self })
            .unwrap_or_else(|_| format!("{{\"error\":{{\"message\":{:?}}}}}", self.message));
        eprintln!("{doc}");
        ExitCode::from(self.exit_code)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Parse { .. } | Error::Argument(_) | Error::Json(_) => ErrorKind::Parse,
            Error::Domain(_) | Error::Evaluation(_) | Error::Divergence { .. } => ErrorKind::Optimize,
            Error::Lookup(_) => ErrorKind::Lookup,
            Error::Structure(_) => ErrorKind::Structure,
            Error::Format(_) | Error::Io(_) => ErrorKind::Io,
            Error::Network(_) | Error::NotFound { .. } | Error::CorruptDownload(_) => ErrorKind::Network,
        };
        CliError::new(kind, e.to_string())
    }
}

impl OptimizerRun {
    pub fn new(method: Method, cfg: &OptimizerConfig, f_initial: f64, r: &OptimizationResult) -> Self {
        Self {
            method: method.name().to_string(),
            seed: cfg.rng_seed,
            f_initial,
            f_best: r.f_best,
            iterations: r.iterations,
            function_evals: r.function_evals,
            gradient_evals: r.gradient_evals,
            converged: r.converged,
            reason: r.reason,
            stages: r.stages.clone(),
        }
    }
}

/// Optimizer outcome without the iterate or the trace.
#[derive(Debug, Serialize)]
pub struct OptimizerRun {
    pub method: String,
    pub seed: u64,
    pub f_initial: f64,
    pub f_best: f64,
    pub iterations: usize,
    pub function_evals: usize,
    pub gradient_evals: usize,
    pub converged: bool,
    pub reason: StopReason,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageSummary>,
}

#[derive(Debug, Serialize)]
pub struct EdgeOut {
    pub from: String,
    pub to: String,
    pub target: f64,
    pub distance: f64,
    pub deviation: f64,
}

impl EdgeOut {
    pub fn new(edge: &Edge, distance: f64, label: impl Fn(EndpointRef) -> String) -> Self {
        Self {
            from: label(edge.a),
            to: label(edge.b),
            target: edge.target,
            distance,
            deviation: distance - edge.target,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MarginOut {
    pub sensor: String,
    pub anchors: [String; 2],
    pub anchor_gap: f64,
    pub upper_margin: f64,
    pub lower_margin: f64,
    pub feasible: bool,
}

#[derive(Debug, Serialize)]
pub struct SolveDgOutput {
    pub schema_version: u32,
    pub problem: String,
    pub optimizer: OptimizerRun,
    pub x: Vec<f64>,
    pub sensors: Vec<[f64; 3]>,
    pub objective: f64,
    pub edges: Vec<EdgeOut>,
    pub triangle_margins: Vec<MarginOut>,
    pub feasible: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ReferenceComparison {
    pub direction: [f64; 3],
    pub cosine: f64,
    pub meets_target: bool,
}

#[derive(Debug, Serialize)]
pub struct AxisOut {
    #[serde(flatten)]
    pub axis: StrandAxis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceComparison>,
}

#[derive(Debug, Serialize)]
pub struct FitAxisOutput {
    pub schema_version: u32,
    pub source: String,
    pub axes: Vec<AxisOut>,
}

#[derive(Debug, Serialize)]
pub struct LjClusterOutput {
    pub schema_version: u32,
    pub n_atoms: usize,
    pub energy: f64,
    pub coordinates: Vec<[f64; 3]>,
    pub optimizer: OptimizerRun,
}

#[derive(Debug, Serialize)]
pub struct GradCheckOutput {
    pub schema_version: u32,
    pub objective: String,
    pub trials: usize,
    pub seed: u64,
    pub step: f64,
    pub tolerance: f64,
    pub max_relative_error: f64,
    pub max_abs_error: f64,
    pub failures: usize,
    pub passed: bool,
}

/// Plain-text summary of a build, for humans.
pub fn build_summary(report: &zipper_core::fibril::ContactReport, out: &str) -> String {
    let OptimizerSummary { method, f_best, iterations, .. } = &report.optimizer;
    let mut s = format!(
        "{} ({}): {method} f = {f_best:.3e} after {iterations} iterations, wrote {out}\n",
        report.recipe, report.sequence
    );
    for c in &report.contacts {
        s.push_str(&format!(
            "  {} - {}: initial {:.3} Å, optimized {:.3} Å, emitted {:.3} Å\n",
            c.from, c.to, c.initial, c.optimized, c.emitted
        ));
    }
    s.push_str(&format!(
        "  backbone H-bonds {} ({} of template retained), clashes {}\n",
        report.hbonds.total,
        report.hbonds.retained,
        report.clashes.len()
    ));
    for n in &report.notes {
        s.push_str(&format!("  note: {n}\n"));
    }
    s
}

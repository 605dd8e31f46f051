//! Unconstrained minimizers behind a single objective contract.
//!
//! Local methods ([`steepest_descent`], [`conjugate_gradient`], [`lbfgs`]) need
//! gradients. [`simulated_annealing`] and [`saec`] only use values.
//! [`sdcg_sa_sdcg`] chains local and global search.
//!
//! All stochastic methods draw from a ChaCha8 stream seeded with
//! [`OptimizerConfig::rng_seed`], so a run is bit-reproducible from
//! (seed, config, objective).

mod annealing;
mod config;
mod descent;
mod gradcheck;
mod hybrid;
mod lbfgs;
mod line_search;
mod saec;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use annealing::simulated_annealing;
pub use config::{OptimizerConfig, SaConfig, SaecConfig};
pub use descent::{conjugate_gradient, steepest_descent};
pub use gradcheck::{check_gradient, finite_diff_gradient, GradientCheck};
pub use hybrid::sdcg_sa_sdcg;
pub use lbfgs::lbfgs;
pub use saec::{saec, SearchBox};

/// Objective function of n variables.
///
/// Implementations must be deterministic and free of hidden mutable state:
/// population and multistart drivers call them from several runs at once.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes ∇f(x) into `grad` and returns f(x), or `None` if the objective has
    /// no analytic gradient.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let _ = (x, grad);
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        (**self).value_and_gradient(x, grad)
    }
}

/// Value-only objective from a closure.
pub struct ValueFn<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> ValueFn<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for ValueFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Objective from a closure that fills the gradient and returns the value.
pub struct ValueGradFn<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) -> f64 + Sync> ValueGradFn<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) -> f64 + Sync> Objective for ValueGradFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.dim];
        (self.f)(x, &mut scratch)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        Some((self.f)(x, grad))
    }
}

/// ‖g‖₂ / √n.
pub fn grad_rms(g: &[f64]) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    (g.iter().map(|v| v * v).sum::<f64>() / g.len() as f64).sqrt()
}

/// maxᵢ |gᵢ|.
pub fn grad_max(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GradRms,
    GradMax,
    MaxIterations,
    LineSearchFailed,
    /// Stage-1 hand-off: grad RMS improved by less than 1% over 10 iterations.
    Stalled,
    ScheduleComplete,
    GenerationsComplete,
}

impl StopReason {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            Self::GradRms | Self::GradMax | Self::ScheduleComplete | Self::GenerationsComplete
        )
    }
}

/// One trace sample. `grad_rms` is absent for gradient-free methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub f: f64,
    pub grad_rms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub name: String,
    pub f_best: f64,
    pub iterations: usize,
    pub reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub x_best: Vec<f64>,
    /// Objective re-evaluated at `x_best` when the run ends.
    pub f_best: f64,
    pub iterations: usize,
    pub function_evals: usize,
    pub gradient_evals: usize,
    pub converged: bool,
    pub reason: StopReason,
    pub trace: Vec<TracePoint>,
    /// Per-stage summaries for multi-stage methods; empty otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageSummary>,
    /// Annealing proposals discarded because the objective was not finite there.
    #[serde(default)]
    pub rejected_proposals: usize,
}

impl OptimizationResult {
    /// Trace as CSV with header `iteration,f,grad_rms`.
    pub fn trace_csv(&self) -> String {
        trace_csv(&self.trace)
    }
}

pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("iteration,f,grad_rms\n");
    for p in trace {
        match p.grad_rms {
            Some(g) => writeln!(out, "{},{},{}", p.iteration, p.f, g),
            None => writeln!(out, "{},{},", p.iteration, p.f),
        }
        .unwrap();
    }
    out
}

/// Counts evaluations and remembers the best point seen during one run.
pub(crate) struct Tracker<'a> {
    obj: &'a dyn Objective,
    pub function_evals: usize,
    pub gradient_evals: usize,
    pub best_x: Vec<f64>,
    pub best_f: f64,
}

impl<'a> Tracker<'a> {
    pub fn new(obj: &'a dyn Objective) -> Self {
        Self {
            obj,
            function_evals: 0,
            gradient_evals: 0,
            best_x: Vec::new(),
            best_f: f64::INFINITY,
        }
    }

    fn note(&mut self, x: &[f64], f: f64) {
        if f < self.best_f || self.best_x.is_empty() && f.is_finite() {
            self.best_f = f;
            self.best_x.clear();
            self.best_x.extend_from_slice(x);
        }
    }

    pub fn value(&mut self, x: &[f64]) -> f64 {
        self.function_evals += 1;
        let f = self.obj.value(x);
        self.note(x, f);
        f
    }

    pub fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.function_evals += 1;
        self.gradient_evals += 1;
        let f = self
            .obj
            .value_and_gradient(x, grad)
            .ok_or_else(|| Error::Argument("this optimizer needs an objective with a gradient".into()))?;
        self.note(x, f);
        Ok(f)
    }

    /// Builds the final result, re-evaluating f at the best point.
    pub fn finish(
        mut self,
        fallback_x: &[f64],
        iterations: usize,
        reason: StopReason,
        trace: Vec<TracePoint>,
    ) -> OptimizationResult {
        let x_best = if self.best_x.is_empty() {
            fallback_x.to_vec()
        } else {
            std::mem::take(&mut self.best_x)
        };
        self.function_evals += 1;
        let f_best = self.obj.value(&x_best);
        OptimizationResult {
            x_best,
            f_best,
            iterations,
            function_evals: self.function_evals,
            gradient_evals: self.gradient_evals,
            converged: reason.is_converged(),
            reason,
            trace,
            stages: Vec::new(),
            rejected_proposals: 0,
        }
    }
}

pub(crate) fn check_start(x0: &[f64], dim: usize) -> Result<()> {
    if x0.len() != dim {
        return Err(Error::Argument(format!(
            "starting point has {} components, objective expects {dim}",
            x0.len()
        )));
    }
    Ok(())
}

pub(crate) fn divergence(iteration: usize, reason: &str, x: &[f64], f: f64) -> Error {
    Error::Divergence {
        iteration,
        reason: reason.to_string(),
        last_good: x.to_vec(),
        last_good_f: f,
    }
}

pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Optimizer selection by name, as used in recipes and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "sd")]
    SteepestDescent,
    #[serde(rename = "cg")]
    ConjugateGradient,
    #[serde(rename = "lbfgs")]
    Lbfgs,
    #[serde(rename = "sa")]
    SimulatedAnnealing,
    #[serde(rename = "sdcg-sa-sdcg")]
    SdcgSaSdcg,
    #[serde(rename = "saec")]
    Saec,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::SteepestDescent,
        Method::ConjugateGradient,
        Method::Lbfgs,
        Method::SimulatedAnnealing,
        Method::SdcgSaSdcg,
        Method::Saec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SteepestDescent => "sd",
            Method::ConjugateGradient => "cg",
            Method::Lbfgs => "lbfgs",
            Method::SimulatedAnnealing => "sa",
            Method::SdcgSaSdcg => "sdcg-sa-sdcg",
            Method::Saec => "saec",
        }
    }

    /// Runs the method. `search_box` is only used by SAEC.
    pub fn run(
        self,
        obj: &dyn Objective,
        x0: &[f64],
        search_box: &SearchBox,
        cfg: &OptimizerConfig,
    ) -> Result<OptimizationResult> {
        match self {
            Method::SteepestDescent => steepest_descent(obj, x0, cfg),
            Method::ConjugateGradient => conjugate_gradient(obj, x0, cfg),
            Method::Lbfgs => lbfgs(obj, x0, cfg),
            Method::SimulatedAnnealing => simulated_annealing(obj, x0, cfg),
            Method::SdcgSaSdcg => sdcg_sa_sdcg(obj, x0, cfg),
            Method::Saec => saec(obj, search_box, cfg),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        match key.as_str() {
            "sd" | "steepest-descent" => Ok(Method::SteepestDescent),
            "cg" | "conjugate-gradient" => Ok(Method::ConjugateGradient),
            "lbfgs" | "l-bfgs" => Ok(Method::Lbfgs),
            "sa" | "simulated-annealing" => Ok(Method::SimulatedAnnealing),
            "sdcg-sa-sdcg" | "hybrid" => Ok(Method::SdcgSaSdcg),
            "saec" => Ok(Method::Saec),
            _ => Err(Error::Argument(format!(
                "unknown optimizer {s:?} (expected one of sd, cg, lbfgs, sa, sdcg-sa-sdcg, saec)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_statistics() {
        let g = [3.0, -4.0];
        assert_eq!(grad_max(&g), 4.0);
        assert!((grad_rms(&g) - (25.0f64 / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("newton".parse::<Method>().is_err());
    }

    #[test]
    fn trace_csv_format() {
        let csv = trace_csv(&[
            TracePoint { iteration: 0, f: 1.5, grad_rms: Some(0.25) },
            TracePoint { iteration: 1, f: 0.5, grad_rms: None },
        ]);
        assert_eq!(csv, "iteration,f,grad_rms\n0,1.5,0.25\n1,0.5,\n");
    }
}

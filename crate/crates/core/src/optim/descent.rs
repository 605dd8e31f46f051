use super::line_search::armijo;
use super::{
    all_finite, check_start, divergence, grad_max, grad_rms, Objective, OptimizationResult,
    OptimizerConfig, StopReason, TracePoint, Tracker,
};
use crate::error::Result;

/// Outcome of one local run inside a shared tracker.
pub(crate) struct Segment {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub reason: StopReason,
    pub trace: Vec<TracePoint>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Steepest { stop_on_stall: bool },
    PolakRibiere,
}

const STALL_WINDOW: usize = 10;
const STALL_RATIO: f64 = 0.99;

pub(crate) fn converged(g: &[f64], cfg: &OptimizerConfig) -> Option<StopReason> {
    if grad_rms(g) <= cfg.grad_rms_tol {
        Some(StopReason::GradRms)
    } else if grad_max(g) <= cfg.gmax_tol {
        Some(StopReason::GradMax)
    } else {
        None
    }
}

/// Shared SD / CG loop.
pub(crate) fn descend(
    t: &mut Tracker,
    x0: &[f64],
    cfg: &OptimizerConfig,
    rule: Direction,
    max_iters: usize,
) -> Result<Segment> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = t.value_grad(&x, &mut g)?;
    if !f.is_finite() || !all_finite(&g) {
        return Err(divergence(0, "non-finite objective or gradient at the starting point", &x, f));
    }
    let mut trace = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut g_prev_sq = 0.0;
    let mut g_prev = g.clone();
    let mut alpha_prev: Option<f64> = None;
    let mut since_restart = 0usize;
    let mut iteration = 0usize;

    let reason = loop {
        let rms = grad_rms(&g);
        trace.push(TracePoint { iteration, f, grad_rms: Some(rms) });
        if let Some(r) = converged(&g, cfg) {
            break r;
        }
        if iteration >= max_iters {
            break StopReason::MaxIterations;
        }
        if let Direction::Steepest { stop_on_stall: true } = rule {
            history.push(rms);
            if history.len() > STALL_WINDOW && rms > STALL_RATIO * history[history.len() - 1 - STALL_WINDOW] {
                break StopReason::Stalled;
            }
        }

        let gg: f64 = g.iter().map(|v| v * v).sum();
        match rule {
            Direction::Steepest { .. } => {
                for (di, gi) in d.iter_mut().zip(&g) {
                    *di = -gi;
                }
            }
            Direction::PolakRibiere => {
                let restart = iteration == 0 || since_restart >= n || g_prev_sq == 0.0;
                let beta = if restart {
                    0.0
                } else {
                    let num: f64 = g.iter().zip(&g_prev).map(|(a, b)| a * (a - b)).sum();
                    (num / g_prev_sq).max(0.0)
                };
                for (di, gi) in d.iter_mut().zip(&g) {
                    *di = -gi + beta * *di;
                }
                let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
                if beta == 0.0 || !(slope < 0.0) {
                    for (di, gi) in d.iter_mut().zip(&g) {
                        *di = -gi;
                    }
                    since_restart = 0;
                }
                since_restart += 1;
            }
        }

        let dnorm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let alpha0 = match alpha_prev {
            Some(a) => 2.0 * a,
            None => 1.0 / dnorm.max(1.0),
        };
        let Some(step) = armijo(t, &x, f, &g, &d, alpha0)? else {
            break StopReason::LineSearchFailed;
        };
        iteration += 1;
        if !step.f.is_finite() || !all_finite(&step.g) {
            return Err(divergence(iteration, "non-finite objective or gradient", &x, f));
        }
        alpha_prev = Some(step.alpha);
        g_prev_sq = gg;
        g_prev.copy_from_slice(&g);
        x = step.x;
        f = step.f;
        g = step.g;
    };

    Ok(Segment { x, f, iterations: iteration, reason, trace })
}

fn run(obj: &dyn Objective, x0: &[f64], cfg: &OptimizerConfig, rule: Direction) -> Result<OptimizationResult> {
    cfg.validate()?;
    check_start(x0, obj.dim())?;
    let mut t = Tracker::new(obj);
    let seg = descend(&mut t, x0, cfg, rule, cfg.max_iters)?;
    Ok(t.finish(&seg.x, seg.iterations, seg.reason, seg.trace))
}

/// Steepest descent with a backtracking line search along −∇f.
///
/// Stops when grad RMS or the largest gradient component drops below its
/// tolerance, after `max_iters` steps, or when no step decreases f.
pub fn steepest_descent(obj: &dyn Objective, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    run(obj, x0, cfg, Direction::Steepest { stop_on_stall: false })
}

/// Nonlinear conjugate gradient, Polak–Ribière with β clipped at zero.
///
/// The direction resets to −∇f every n steps and whenever it fails to descend.
pub fn conjugate_gradient(obj: &dyn Objective, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    run(obj, x0, cfg, Direction::PolakRibiere)
}

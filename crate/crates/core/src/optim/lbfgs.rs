use std::collections::VecDeque;

use super::descent::converged;
use super::line_search::strong_wolfe;
use super::{
    all_finite, check_start, divergence, grad_rms, Objective, OptimizationResult, OptimizerConfig,
    StopReason, TracePoint, Tracker,
};
use crate::error::{Error, Result};

/// Stored curvature pair with ρ = 1/(sᵀy).
pub(crate) struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two-loop recursion: returns −H·g for the inverse-Hessian estimate H built
/// from `history` (oldest first) on top of γI, γ = sᵀy / yᵀy of the newest pair.
/// With no history the result is −g.
pub(crate) fn two_loop_direction(history: &VecDeque<Pair>, g: &[f64]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = vec![0.0; history.len()];
    for (k, p) in history.iter().enumerate().rev() {
        let a = p.rho * dot(&p.s, &q);
        alphas[k] = a;
        for (qi, yi) in q.iter_mut().zip(&p.y) {
            *qi -= a * yi;
        }
    }
    let gamma = history.back().map_or(1.0, |p| 1.0 / (p.rho * dot(&p.y, &p.y)));
    for qi in &mut q {
        *qi *= gamma;
    }
    for (k, p) in history.iter().enumerate() {
        let b = p.rho * dot(&p.y, &q);
        for (qi, si) in q.iter_mut().zip(&p.s) {
            *qi += (alphas[k] - b) * si;
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}

/// Limited-memory BFGS with a strong-Wolfe line search.
///
/// Keeps the last `lbfgs_memory` pairs (s, y); pairs with sᵀy ≤ 0 are dropped.
/// A failed line search ends the run unconverged with the best iterate.
pub fn lbfgs(obj: &dyn Objective, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    check_start(x0, obj.dim())?;
    if cfg.lbfgs_memory == 0 {
        return Err(Error::Argument("lbfgs_memory must be at least 1".into()));
    }
    let n = x0.len();
    let mut t = Tracker::new(obj);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = t.value_grad(&x, &mut g)?;
    if !f.is_finite() || !all_finite(&g) {
        return Err(divergence(0, "non-finite objective or gradient at the starting point", &x, f));
    }
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(cfg.lbfgs_memory);
    let mut trace = Vec::new();
    let mut iteration = 0;

    let reason = loop {
        trace.push(TracePoint { iteration, f, grad_rms: Some(grad_rms(&g)) });
        if let Some(r) = converged(&g, cfg) {
            break r;
        }
        if iteration >= cfg.max_iters {
            break StopReason::MaxIterations;
        }
        let mut d = two_loop_direction(&history, &g);
        if !(dot(&d, &g) < 0.0) {
            history.clear();
            d = g.iter().map(|v| -v).collect();
        }
        let alpha0 = if history.is_empty() {
            let norm = dot(&d, &d).sqrt();
            1.0 / norm.max(1.0)
        } else {
            1.0
        };
        let Some(step) = strong_wolfe(&mut t, &x, f, &g, &d, alpha0)? else {
            break StopReason::LineSearchFailed;
        };
        iteration += 1;
        if !step.f.is_finite() || !all_finite(&step.g) {
            return Err(divergence(iteration, "non-finite objective or gradient", &x, f));
        }
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 0.0 && dot(&y, &y) > 0.0 {
            if history.len() == cfg.lbfgs_memory {
                history.pop_front();
            }
            history.push_back(Pair { s, y, rho: 1.0 / sy });
        }
        x = step.x;
        f = step.f;
        g = step.g;
    };

    Ok(t.finish(&x, iteration, reason, trace))
}

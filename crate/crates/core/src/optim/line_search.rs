//! One-dimensional searches along a descent direction.

use super::{all_finite, Tracker};
use crate::error::Result;

/// Accepted point of a line search.
pub(crate) struct Step {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
}

const ARMIJO_C1: f64 = 1e-4;
const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const MAX_BACKTRACKS: usize = 60;
const MAX_WOLFE_EVALS: usize = 40;

fn trial_point(x: &[f64], d: &[f64], alpha: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(x.iter().zip(d).map(|(xi, di)| xi + alpha * di));
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizer of the parabola through φ(0) = f0, φ'(0) = slope, φ(alpha) = fa.
fn quadratic_minimizer(f0: f64, slope: f64, alpha: f64, fa: f64) -> Option<f64> {
    let curv = fa - f0 - slope * alpha;
    if curv > 0.0 {
        let a = -slope * alpha * alpha / (2.0 * curv);
        a.is_finite().then_some(a)
    } else {
        None
    }
}

/// Backtracking search for the sufficient-decrease condition
/// φ(α) ≤ φ(0) + c₁αφ'(0), shrinking by safeguarded quadratic interpolation.
/// Once a step is accepted, the interpolated line minimizer is tried as well and
/// kept if it is lower.
///
/// Returns `Ok(None)` when no acceptable step is found.
pub(crate) fn armijo(
    t: &mut Tracker,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha0: f64,
) -> Result<Option<Step>> {
    let slope = dot(g0, d);
    if !(slope < 0.0) {
        return Ok(None);
    }
    let mut alpha = alpha0;
    let mut xt = Vec::with_capacity(x.len());
    let mut accepted = None;
    for _ in 0..MAX_BACKTRACKS {
        trial_point(x, d, alpha, &mut xt);
        if xt.as_slice() == x {
            break;
        }
        let ft = t.value(&xt);
        if ft.is_finite() && ft <= f0 + ARMIJO_C1 * alpha * slope {
            accepted = Some((alpha, ft));
            break;
        }
        alpha = match quadratic_minimizer(f0, slope, alpha, ft) {
            Some(a) if ft.is_finite() => a.clamp(0.1 * alpha, 0.5 * alpha),
            _ => 0.1 * alpha,
        };
    }
    let Some((mut alpha, mut fa)) = accepted else {
        return Ok(None);
    };
    if let Some(a) = quadratic_minimizer(f0, slope, alpha, fa) {
        if a > 0.0 && a < 4.0 * alpha && (a - alpha).abs() > 1e-3 * alpha {
            trial_point(x, d, a, &mut xt);
            let fq = t.value(&xt);
            if fq.is_finite() && fq < fa {
                alpha = a;
                fa = fq;
            }
        }
    }
    trial_point(x, d, alpha, &mut xt);
    let mut g = vec![0.0; x.len()];
    let f = t.value_grad(&xt, &mut g)?;
    debug_assert!(!(f.is_finite() && fa.is_finite()) || (f - fa).abs() <= 1e-9 * fa.abs().max(1.0));
    Ok(Some(Step { alpha, x: xt, f, g }))
}

#[derive(Clone)]
struct Sample {
    alpha: f64,
    f: f64,
    slope: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

impl Sample {
    fn finite(&self) -> bool {
        self.f.is_finite() && self.slope.is_finite() && all_finite(&self.g)
    }

    fn into_step(self) -> Step {
        Step { alpha: self.alpha, x: self.x, f: self.f, g: self.g }
    }
}

fn sample(t: &mut Tracker, x: &[f64], d: &[f64], alpha: f64) -> Result<Sample> {
    let mut xt = Vec::with_capacity(x.len());
    trial_point(x, d, alpha, &mut xt);
    let mut g = vec![0.0; x.len()];
    let f = t.value_grad(&xt, &mut g)?;
    let slope = dot(&g, d);
    Ok(Sample { alpha, f, slope, x: xt, g })
}

/// Minimizer of the cubic matching values and slopes at `a` and `b`,
/// kept inside the middle 80% of the interval; bisection when undefined.
fn cubic_step(a: &Sample, b: &Sample) -> f64 {
    let (lo, hi) = if a.alpha < b.alpha { (a.alpha, b.alpha) } else { (b.alpha, a.alpha) };
    let width = hi - lo;
    let mid = 0.5 * (lo + hi);
    if !(a.finite() && b.finite()) {
        return mid;
    }
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let c = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    if c.is_finite() {
        c.clamp(lo + 0.1 * width, hi - 0.1 * width)
    } else {
        mid
    }
}

/// Line search for the strong Wolfe conditions (bracketing then zoom with cubic
/// interpolation). When the accepted step is not a line minimizer, one secant
/// step on φ' is tried and kept if it is lower and still satisfies both
/// conditions; on a quadratic that step is exact.
///
/// Returns `Ok(None)` when no acceptable step is found.
pub(crate) fn strong_wolfe(
    t: &mut Tracker,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha0: f64,
) -> Result<Option<Step>> {
    let slope0 = dot(g0, d);
    if !(slope0 < 0.0) {
        return Ok(None);
    }
    let sufficient = |s: &Sample| s.f.is_finite() && s.f <= f0 + WOLFE_C1 * s.alpha * slope0;
    let curvature = |s: &Sample| s.slope.abs() <= -WOLFE_C2 * slope0;

    let origin = Sample { alpha: 0.0, f: f0, slope: slope0, x: x.to_vec(), g: g0.to_vec() };
    let mut prev = origin.clone();
    let mut alpha = alpha0;
    let mut evals = 0;
    let mut found: Option<Sample> = None;
    let mut bracket: Option<(Sample, Sample)> = None;

    while evals < MAX_WOLFE_EVALS {
        let cur = sample(t, x, d, alpha)?;
        evals += 1;
        if !cur.finite() || !sufficient(&cur) || (prev.alpha > 0.0 && cur.f >= prev.f) {
            bracket = Some((prev, cur));
            break;
        }
        if curvature(&cur) {
            found = Some(cur);
            break;
        }
        if cur.slope >= 0.0 {
            bracket = Some((cur, prev));
            break;
        }
        alpha = 2.0 * cur.alpha;
        prev = cur;
    }

    if let Some((mut lo, mut hi)) = bracket {
        while found.is_none() && evals < MAX_WOLFE_EVALS {
            if (hi.alpha - lo.alpha).abs() <= f64::EPSILON * lo.alpha.abs().max(1e-300) {
                break;
            }
            let a = cubic_step(&lo, &hi);
            let cur = sample(t, x, d, a)?;
            evals += 1;
            if !cur.finite() || !sufficient(&cur) || cur.f >= lo.f {
                hi = cur;
            } else {
                if curvature(&cur) {
                    found = Some(cur);
                    break;
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
        if found.is_none() && lo.alpha > 0.0 && lo.f < f0 {
            // Sufficient decrease without the curvature condition.
            found = Some(lo);
        }
    }

    let Some(best) = found else {
        return Ok(None);
    };
    let curvature_change = best.slope - slope0;
    if curvature_change > 0.0 && best.slope.abs() > 1e-8 * slope0.abs() {
        let a = best.alpha * (-slope0) / curvature_change;
        if a.is_finite() && a > 0.0 && (a - best.alpha).abs() > 1e-6 * best.alpha {
            let refined = sample(t, x, d, a)?;
            if refined.finite() && refined.f < best.f && sufficient(&refined) && curvature(&refined) {
                return Ok(Some(refined.into_step()));
            }
        }
    }
    Ok(Some(best.into_step()))
}

use serde::Serialize;

use super::Objective;
use crate::error::{Error, Result};

/// Central-difference gradient with a fixed step per coordinate.
pub fn finite_diff_gradient(obj: &dyn Objective, x: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Argument(format!("finite-difference step must be positive, got {step}")));
    }
    if x.len() != obj.dim() {
        return Err(Error::Argument(format!("point has {} components, objective expects {}", x.len(), obj.dim())));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let fp = obj.value(&probe);
        probe[i] = x[i] - step;
        let fm = obj.value(&probe);
        probe[i] = x[i];
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite value while differencing coordinate {i}")));
        }
        grad.push((fp - fm) / (2.0 * step));
    }
    Ok(grad)
}

/// Analytic versus central-difference gradient at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheck {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_abs_error: f64,
    /// max|analytic − numeric| / max(1, max|analytic|).
    pub relative_error: f64,
}

pub fn check_gradient(obj: &dyn Objective, x: &[f64], step: f64) -> Result<GradientCheck> {
    let numeric = finite_diff_gradient(obj, x, step)?;
    let mut analytic = vec![0.0; x.len()];
    obj.value_and_gradient(x, &mut analytic)
        .ok_or_else(|| Error::Argument("objective has no analytic gradient".into()))?;
    let max_abs_error = analytic.iter().zip(&numeric).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = analytic.iter().fold(1.0f64, |m, a| m.max(a.abs()));
    Ok(GradientCheck { analytic, numeric, max_abs_error, relative_error: max_abs_error / scale })
}

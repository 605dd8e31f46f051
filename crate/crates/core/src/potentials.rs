//! Pair potentials and the reduced-unit Lennard-Jones cluster energy.
//!
//! No cutoffs or switching functions: every pair is summed.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::optim::Objective;

/// 12-6 Lennard-Jones parameters: well depth ε and atom diameter σ (Å).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LjParams {
    epsilon: f64,
    sigma: f64,
}

impl LjParams {
    pub fn new(epsilon: f64, sigma: f64) -> Result<Self> {
        if !(epsilon > 0.0 && sigma > 0.0 && epsilon.is_finite() && sigma.is_finite()) {
            return Err(Error::Argument(format!(
                "LJ parameters must be positive (epsilon = {epsilon}, sigma = {sigma})"
            )));
        }
        Ok(Self { epsilon, sigma })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// A = 4εσ¹², B = 4εσ⁶.
    pub fn to_ab(&self) -> LjAbParams {
        LjAbParams {
            a: 4.0 * self.epsilon * self.sigma.powi(12),
            b: 4.0 * self.epsilon * self.sigma.powi(6),
        }
    }

    /// Distance of the well bottom, 2^(1/6)·σ.
    pub fn r_min(&self) -> f64 {
        2f64.powf(1.0 / 6.0) * self.sigma
    }
}

/// Lennard-Jones in A/r¹² − B/r⁶ form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LjAbParams {
    a: f64,
    b: f64,
}

impl LjAbParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Argument(format!(
                "LJ coefficients must be positive (A = {a}, B = {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// 12-10 hydrogen-bond potential C/r¹² − D/r¹⁰.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbParams {
    c: f64,
    d: f64,
}

impl HbParams {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        if !(c > 0.0 && d > 0.0 && c.is_finite() && d.is_finite()) {
            return Err(Error::Argument(format!(
                "HB coefficients must be positive (C = {c}, D = {d})"
            )));
        }
        Ok(Self { c, d })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

fn check_distance(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "pair distance must be positive and finite, got {r}"
        )))
    }
}

/// 4ε[(σ/r)¹² − (σ/r)⁶].
pub fn lj_pair(r: f64, p: &LjParams) -> Result<f64> {
    check_distance(r)?;
    let s6 = (p.sigma / r).powi(6);
    Ok(4.0 * p.epsilon * (s6 * s6 - s6))
}

/// A/r¹² − B/r⁶.
pub fn lj_pair_ab(r: f64, p: &LjAbParams) -> Result<f64> {
    check_distance(r)?;
    let inv6 = r.powi(-6);
    Ok(p.a * inv6 * inv6 - p.b * inv6)
}

/// C/r¹² − D/r¹⁰.
pub fn hb_pair(r: f64, p: &HbParams) -> Result<f64> {
    check_distance(r)?;
    let inv2 = r.powi(-2);
    let inv10 = inv2.powi(5);
    Ok(p.c * inv10 * inv2 - p.d * inv10)
}

/// Samples of the 12-6 curve on a uniform grid over `[r_min, r_max]`.
pub fn lj_curve(p: &LjParams, r_min: f64, r_max: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(Error::Argument(format!(
            "curve range must satisfy 0 < r_min < r_max (got {r_min}, {r_max})"
        )));
    }
    if samples < 2 {
        return Err(Error::Argument("a curve needs at least 2 samples".into()));
    }
    let step = (r_max - r_min) / (samples - 1) as f64;
    (0..samples)
        .map(|k| {
            let r = if k == samples - 1 { r_max } else { r_min + step * k as f64 };
            lj_pair(r, p).map(|v| (r, v))
        })
        .collect()
}

/// Formats `v` with `digits` significant digits, `%g` style.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, v);
        let (mantissa, exponent) = s.split_once('e').unwrap();
        format!("{}e{}", trim(mantissa.to_string()), exponent)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{v:.decimals$}"))
    }
}

/// CSV rendering of [`lj_curve`]: header `r,V`, 9 significant digits.
pub fn curve_csv(table: &[(f64, f64)]) -> String {
    let mut out = String::from("r,V\n");
    for (r, v) in table {
        writeln!(out, "{},{}", format_significant(*r, 9), format_significant(*v, 9)).unwrap();
    }
    out
}

/// Reduced-unit (ε = σ = 1) Lennard-Jones energy of N atoms with coordinates
/// flattened as x = (x₁, y₁, z₁, x₂, ...):
///
/// f(x) = 4 Σ_{i<j} (1/t_ij⁶ − 1/t_ij³), t_ij = |p_i − p_j|².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LjCluster {
    n_atoms: usize,
}

impl LjCluster {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms < 2 {
            return Err(Error::Argument(format!(
                "an LJ cluster needs at least 2 atoms, got {n_atoms}"
            )));
        }
        Ok(Self { n_atoms })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Energy and gradient; fills `grad` (length 3N).
    fn eval_into(&self, x: &[f64], mut grad: Option<&mut [f64]>) -> Result<f64> {
        let n = self.n_atoms;
        if x.len() != 3 * n {
            return Err(Error::Argument(format!(
                "expected {} coordinates, got {}",
                3 * n,
                x.len()
            )));
        }
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut f = 0.0;
        for i in 0..n {
            for j in 0..i {
                let d = [
                    x[3 * i] - x[3 * j],
                    x[3 * i + 1] - x[3 * j + 1],
                    x[3 * i + 2] - x[3 * j + 2],
                ];
                let t = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                if t <= 0.0 {
                    return Err(Error::Evaluation(format!(
                        "atoms {i} and {j} coincide"
                    )));
                }
                let inv3 = 1.0 / (t * t * t);
                f += inv3 * inv3 - inv3;
                if let Some(g) = grad.as_deref_mut() {
                    // d/dt [4(t⁻⁶ − t⁻³)] · dt/dp_i, dt/dp_i = 2(p_i − p_j)
                    let dfdt = 4.0 * (-6.0 * inv3 * inv3 + 3.0 * inv3) / t;
                    for k in 0..3 {
                        let c = 2.0 * dfdt * d[k];
                        g[3 * i + k] += c;
                        g[3 * j + k] -= c;
                    }
                }
            }
        }
        Ok(4.0 * f)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval_into(x, None)
    }

    pub fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut g = vec![0.0; x.len()];
        let f = self.eval_into(x, Some(&mut g))?;
        Ok((f, g))
    }
}

/// `lj_cluster_value_grad(x, N)`.
pub fn lj_cluster_value_grad(x: &[f64], n_atoms: usize) -> Result<(f64, Vec<f64>)> {
    LjCluster::new(n_atoms)?.value_grad(x)
}

/// Coincident atoms evaluate to +∞ so optimizers reject the point.
impl Objective for LjCluster {
    fn dim(&self) -> usize {
        3 * self.n_atoms
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval_into(x, None).unwrap_or(f64::INFINITY)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        Some(self.eval_into(x, Some(grad)).unwrap_or(f64::INFINITY))
    }
}

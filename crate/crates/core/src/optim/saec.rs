use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::annealing::anneal;
use super::{Objective, OptimizationResult, OptimizerConfig, StopReason, TracePoint, Tracker};
use crate::error::{Error, Result};

/// Axis-aligned box `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Argument(format!(
                "search box bounds must be non-empty and of equal length (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Argument(format!("degenerate search box in coordinate {i}: [{lo}, {hi}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]ⁿ`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

#[derive(Clone)]
struct Member {
    x: Vec<f64>,
    f: f64,
}

fn rank_key(f: f64) -> f64 {
    if f.is_nan() { f64::INFINITY } else { f }
}

/// Evolutionary search with annealed offspring.
///
/// The population starts uniform in `search_box`. Each generation the best
/// `parent_fraction` of it (ties go to the earlier member) produce as many
/// offspring as the population size, cycling through parents by rank. An
/// offspring is its parent plus Gaussian noise of standard deviation
/// mutation_scale·width·T/t_initial, clamped to the box, then refined by
/// `local_sa_levels` annealing levels at the current temperature. Parents and
/// offspring compete for the next population. The temperature follows the SA
/// schedule, advancing `local_sa_levels` levels per generation.
pub fn saec(obj: &dyn Objective, search_box: &SearchBox, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    if search_box.dim() != obj.dim() {
        return Err(Error::Argument(format!(
            "search box has {} dimensions, objective expects {}",
            search_box.dim(),
            obj.dim()
        )));
    }
    let p = cfg.saec.population_size;
    let mu = ((cfg.saec.parent_fraction * p as f64).round() as usize).clamp(1, p - 1);
    let widths: Vec<f64> = search_box.upper.iter().zip(&search_box.lower).map(|(h, l)| h - l).collect();
    let mut t = Tracker::new(obj);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let mut population: Vec<Member> = (0..p)
        .map(|_| {
            let x: Vec<f64> = search_box
                .lower
                .iter()
                .zip(&search_box.upper)
                .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                .collect();
            let f = t.value(&x);
            Member { x, f }
        })
        .collect();
    population.sort_by(|a, b| rank_key(a.f).total_cmp(&rank_key(b.f)));

    let mut trace = vec![TracePoint { iteration: 0, f: population[0].f, grad_rms: None }];
    let mut temp = cfg.sa.t_initial;
    let mut rejected = 0;
    for generation in 0..cfg.saec.generations {
        let scale = cfg.saec.mutation_scale * temp / cfg.sa.t_initial;
        let mut offspring = Vec::with_capacity(p);
        for k in 0..p {
            let parent = &population[k % mu];
            let mut child: Vec<f64> = parent
                .x
                .iter()
                .zip(&widths)
                .map(|(v, w)| v + scale * w * unit.sample(&mut rng))
                .collect();
            search_box.clamp(&mut child);
            let fc = t.value(&child);
            let out = anneal(
                &mut t,
                &child,
                fc,
                &cfg.sa,
                temp,
                cfg.saec.local_sa_levels,
                Some(search_box),
                &mut rng,
                &mut |_, _| {},
            );
            rejected += out.rejected_non_finite;
            offspring.push(Member { x: out.x_best, f: out.f_best });
        }
        population.extend(offspring);
        population.sort_by(|a, b| rank_key(a.f).total_cmp(&rank_key(b.f)));
        population.truncate(p);
        temp *= cfg.sa.cooling_factor.powi(cfg.saec.local_sa_levels.max(1) as i32);
        trace.push(TracePoint { iteration: generation + 1, f: population[0].f, grad_rms: None });
    }

    let best = population.swap_remove(0);
    let mut result = t.finish(&best.x, cfg.saec.generations, StopReason::GenerationsComplete, trace);
    result.rejected_proposals = rejected;
    Ok(result)
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_start, Objective, OptimizationResult, OptimizerConfig, SaConfig, SearchBox, StopReason, TracePoint, Tracker};
use crate::error::Result;

pub(crate) struct Annealed {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub rejected_non_finite: usize,
}

/// Metropolis walk over `levels` temperature levels starting at `t_start`.
///
/// Each proposal moves every coordinate uniformly within ±h, with
/// h = step_scale·T/t_initial, clamped to `bounds` if given. After
/// `steps_per_temperature` proposals T ← cooling_factor·T. `on_level` receives
/// the level index and the current value after each level.
#[allow(clippy::too_many_arguments)]
pub(crate) fn anneal(
    t: &mut Tracker,
    x0: &[f64],
    f0: f64,
    sa: &SaConfig,
    t_start: f64,
    levels: usize,
    bounds: Option<&SearchBox>,
    rng: &mut ChaCha8Rng,
    on_level: &mut dyn FnMut(usize, f64),
) -> Annealed {
    let mut x = x0.to_vec();
    let mut f = if f0.is_nan() { f64::INFINITY } else { f0 };
    let mut best_x = x.clone();
    let mut best_f = f;
    let mut proposal = x.clone();
    let mut temp = t_start;
    let mut rejected = 0;
    for level in 0..levels {
        let h = sa.step_scale * temp / sa.t_initial;
        for _ in 0..sa.steps_per_temperature {
            for (p, xi) in proposal.iter_mut().zip(&x) {
                *p = xi + h * (2.0 * rng.random::<f64>() - 1.0);
            }
            if let Some(b) = bounds {
                b.clamp(&mut proposal);
            }
            let fp = t.value(&proposal);
            let u: f64 = rng.random();
            if !fp.is_finite() {
                rejected += 1;
                continue;
            }
            let delta = fp - f;
            if delta <= 0.0 || u < (-delta / temp).exp() {
                x.copy_from_slice(&proposal);
                f = fp;
                if f < best_f {
                    best_f = f;
                    best_x.copy_from_slice(&x);
                }
            }
        }
        on_level(level, f);
        temp *= sa.cooling_factor;
    }
    Annealed { x_best: best_x, f_best: best_f, rejected_non_finite: rejected }
}

/// Simulated annealing from `x0` on the configured schedule.
///
/// Runs `sa.temperature_levels` levels; `max_iters` does not apply. The trace
/// holds the current value after each level. Proposals with a non-finite value
/// are rejected and counted in `rejected_proposals`.
pub fn simulated_annealing(obj: &dyn Objective, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    check_start(x0, obj.dim())?;
    let mut t = Tracker::new(obj);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let f0 = t.value(x0);
    let mut trace = vec![TracePoint { iteration: 0, f: f0, grad_rms: None }];
    let out = anneal(
        &mut t,
        x0,
        f0,
        &cfg.sa,
        cfg.sa.t_initial,
        cfg.sa.temperature_levels,
        None,
        &mut rng,
        &mut |level, f| trace.push(TracePoint { iteration: level + 1, f, grad_rms: None }),
    );
    let mut result = t.finish(&out.x_best, cfg.sa.temperature_levels, StopReason::ScheduleComplete, trace);
    result.rejected_proposals = out.rejected_non_finite;
    Ok(result)
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::annealing::anneal;
use super::descent::{descend, Direction, Segment};
use super::{check_start, Objective, OptimizationResult, OptimizerConfig, StageSummary, StopReason, TracePoint, Tracker};
use crate::error::{Error, Result};

/// Steepest descent until it stalls, then conjugate gradient from there.
/// A divergence inside either run ends the stage at its last good iterate.
fn sd_then_cg(t: &mut Tracker, x0: &[f64], f0: f64, cfg: &OptimizerConfig) -> Result<Segment> {
    let mut trace = Vec::new();
    let mut x = x0.to_vec();
    let mut f = f0;
    let mut iterations = 0;
    let mut reason = StopReason::MaxIterations;
    for rule in [Direction::Steepest { stop_on_stall: true }, Direction::PolakRibiere] {
        let budget = cfg.max_iters.saturating_sub(iterations);
        match descend(t, &x, cfg, rule, budget) {
            Ok(seg) => {
                trace.extend(seg.trace.into_iter().map(|p| TracePoint { iteration: p.iteration + iterations, ..p }));
                iterations += seg.iterations;
                x = seg.x;
                f = seg.f;
                reason = seg.reason;
                if reason != StopReason::Stalled && reason.is_converged() {
                    break;
                }
            }
            Err(Error::Divergence { iteration, reason: why, last_good, last_good_f }) => {
                log::warn!("local search diverged at iteration {iteration}: {why}; continuing from last good point");
                iterations += iteration;
                x = last_good;
                f = last_good_f;
                reason = StopReason::LineSearchFailed;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Segment { x, f, iterations, reason, trace })
}

/// Three-stage search: SD→CG to a local minimum, simulated annealing from
/// there, then SD→CG again from the best annealed point.
///
/// The SD→CG hand-off happens when grad RMS improves by less than 1% over 10
/// iterations. The result carries the concatenated trace, one summary per
/// stage, and the best point seen in any stage.
pub fn sdcg_sa_sdcg(obj: &dyn Objective, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    check_start(x0, obj.dim())?;
    let mut t = Tracker::new(obj);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut stages = Vec::new();
    let mut offset = 0;

    let f0 = t.value(x0);
    let s1 = sd_then_cg(&mut t, x0, f0, cfg)?;
    trace.extend(s1.trace.iter().map(|p| TracePoint { iteration: p.iteration + offset, ..*p }));
    offset += s1.iterations;
    stages.push(StageSummary { name: "sd-cg".into(), f_best: s1.f, iterations: s1.iterations, reason: s1.reason });

    let levels = cfg.sa.temperature_levels;
    let annealed = anneal(
        &mut t,
        &s1.x,
        s1.f,
        &cfg.sa,
        cfg.sa.t_initial,
        levels,
        None,
        &mut rng,
        &mut |level, f| trace.push(TracePoint { iteration: offset + level + 1, f, grad_rms: None }),
    );
    offset += levels;
    stages.push(StageSummary {
        name: "sa".into(),
        f_best: annealed.f_best,
        iterations: levels,
        reason: StopReason::ScheduleComplete,
    });

    let s3 = sd_then_cg(&mut t, &annealed.x_best, annealed.f_best, cfg)?;
    trace.extend(s3.trace.iter().map(|p| TracePoint { iteration: p.iteration + offset, ..*p }));
    offset += s3.iterations;
    stages.push(StageSummary { name: "sd-cg".into(), f_best: s3.f, iterations: s3.iterations, reason: s3.reason });

    let mut result = t.finish(&s3.x, offset, s3.reason, trace);
    result.stages = stages;
    result.rejected_proposals = annealed.rejected_non_finite;
    Ok(result)
}

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use zipper_core::fibril::{
    assemble_fibril, build_model, default_cache_dir, direction_cosine, fetch_template_from, fit_axis, strand_axes,
    BuildRecipe, TemplateSource,
};
use zipper_core::geomopt::{model_problem, reference_axis, strand_axis_data, DistanceGeometryProblem, EndpointRef, Model, Strand};
use zipper_core::optim::{check_gradient, Method, Objective, OptimizationResult, OptimizerConfig, SearchBox};
use zipper_core::potentials::{curve_csv, lj_curve, LjCluster, LjParams};
use zipper_core::structure::{parse_pdb, write_pdb, Structure};

use crate::output::*;
use crate::{BuildArgs, CheckGradArgs, FitAxisArgs, GradObjective, LjArgs, OptimizerArgs, SolveDgArgs, StrandArg};

type CmdResult = Result<ExitCode, CliError>;

/// Smallest |cos| against a reference axis that counts as agreement.
const AXIS_COSINE_TARGET: f64 = 0.99;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(&format!("cannot read {}", path.display()), e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(&format!("cannot write {}", path.display()), e))
}

/// Writes to stdout; a closed pipe on the reading side is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("cannot write to stdout", e)),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::from(zipper_core::Error::from(e)))?;
    emit(&format!("{text}\n"))
}

fn model(n: u8) -> Result<Model, CliError> {
    Ok(Model::from_number(n)?)
}

impl OptimizerArgs {
    /// `base`, then the config file, then `--set` overrides, then `--seed`.
    fn config(&self, base: OptimizerConfig) -> Result<OptimizerConfig, CliError> {
        let mut cfg = base;
        if let Some(path) = &self.config {
            cfg.apply_key_values(&read(path)?)?;
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(seed) = self.seed {
            cfg.rng_seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn write_trace(&self, r: &OptimizationResult) -> Result<(), CliError> {
        match &self.trace {
            Some(path) => write(path, &r.trace_csv()),
            None => Ok(()),
        }
    }
}

fn load_template(args: &BuildArgs, recipe: &BuildRecipe) -> Result<Structure, CliError> {
    let source = match (&args.template, &args.fetch) {
        (Some(p), _) => TemplateSource::File(p.clone()),
        (None, Some(id)) => TemplateSource::Fetch(id.clone()),
        (None, None) => recipe
            .template
            .clone()
            .ok_or_else(|| CliError::usage("no template: pass --template PATH or --fetch ID"))?,
    };
    let path: PathBuf = match source {
        TemplateSource::File(p) => p,
        TemplateSource::Fetch(id) => {
            let dir = args.cache_dir.clone().unwrap_or_else(default_cache_dir);
            fetch_template_from(&args.archive_url, &id, &dir)?
        }
    };
    let text = read(&path)?;
    parse_pdb(&text).map_err(|e| CliError::new(ErrorKind::Parse, format!("{}: {e}", path.display())))
}

pub fn build(args: BuildArgs) -> CmdResult {
    let mut recipe = match (&args.recipe, args.model) {
        (Some(path), _) => BuildRecipe::from_json(&read(path)?)?,
        (None, Some(n)) => BuildRecipe::builtin(model(n)?),
        (None, None) => return Err(CliError::usage("pass --model or --recipe")),
    };
    if let Some(m) = args.opt.optimizer {
        recipe.optimizer = m;
    }
    if let Some(t) = args.transform {
        recipe.transform = t.into();
    }
    recipe.config = args.opt.config(recipe.config)?;
    let template = load_template(&args, &recipe)?;
    let out = build_model(&recipe, &template)?;
    let fibril = assemble_fibril(&out.structure)?;
    write(&args.out, &write_pdb(&fibril)?)?;
    if let Some(path) = &args.core_out {
        write(path, &write_pdb(&out.structure)?)?;
    }
    args.opt.write_trace(&out.optimization)?;
    let report = out.report.to_json()?;
    match &args.report {
        Some(path) => {
            write(path, &format!("{report}\n"))?;
            emit(&build_summary(&out.report, &args.out.display().to_string()))?;
        }
        None => emit(&format!("{report}\n"))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn endpoint_label(p: &DistanceGeometryProblem, e: EndpointRef) -> String {
    let (labels, i) = match e {
        EndpointRef::Anchor(i) => (p.anchor_labels(), i),
        EndpointRef::Sensor(i) => (p.sensor_labels(), i),
    };
    labels.get(i).cloned().unwrap_or_else(|| e.to_string())
}

fn margin_note(m: &MarginOut, target: f64) -> String {
    if m.upper_margin < 0.0 {
        format!(
            "anchors {} and {} are {:.3} Å apart, more than twice the {target:.3} Å contact; sensor {} cannot meet both (short by {:.3} Å)",
            m.anchors[0], m.anchors[1], m.anchor_gap, m.sensor, -m.upper_margin
        )
    } else {
        format!(
            "anchors {} and {} are {:.3} Å apart, too close for sensor {} to meet both contacts (short by {:.3} Å)",
            m.anchors[0], m.anchors[1], m.anchor_gap, m.sensor, -m.lower_margin
        )
    }
}

pub fn solve_dg(args: SolveDgArgs) -> CmdResult {
    let (problem, name) = match (&args.problem, args.builtin) {
        (Some(path), _) => (DistanceGeometryProblem::from_json(&read(path)?)?, path.display().to_string()),
        (None, Some(n)) => (model_problem(model(n)?), format!("model-{n}")),
        (None, None) => return Err(CliError::usage("pass --problem or --builtin")),
    };
    let method = args.opt.optimizer.unwrap_or(Method::Lbfgs);
    let cfg = args.opt.config(OptimizerConfig::default())?;
    let x0 = problem.initial_guess().to_vec();
    let f_initial = problem.value(&x0)?;
    let r = method.run(&problem, &x0, &problem.search_box(), &cfg)?;
    args.opt.write_trace(&r)?;

    let label = |e| endpoint_label(&problem, e);
    let edges = problem
        .edge_distances(&r.x_best)?
        .iter()
        .map(|d| EdgeOut::new(&d.edge, d.distance, label))
        .collect();
    let triangle_margins: Vec<MarginOut> = problem
        .triangle_margins()
        .iter()
        .map(|m| MarginOut {
            sensor: label(EndpointRef::Sensor(m.sensor)),
            anchors: [label(EndpointRef::Anchor(m.anchors.0)), label(EndpointRef::Anchor(m.anchors.1))],
            anchor_gap: m.anchor_gap,
            upper_margin: m.upper_margin,
            lower_margin: m.lower_margin,
            feasible: m.feasible(),
        })
        .collect();
    let target = problem.edges().first().map_or(0.0, |e| e.target);
    let notes = triangle_margins.iter().filter(|m| !m.feasible).map(|m| margin_note(m, target)).collect();
    let output = SolveDgOutput {
        schema_version: OUTPUT_SCHEMA_VERSION,
        problem: name,
        optimizer: OptimizerRun::new(method, &cfg, f_initial, &r),
        sensors: problem.sensors(&r.x_best)?.iter().map(|p| [p.x, p.y, p.z]).collect(),
        objective: r.f_best,
        x: r.x_best,
        edges,
        feasible: problem.is_feasible(),
        triangle_margins,
        notes,
    };
    print_json(&output)?;
    Ok(ExitCode::SUCCESS)
}

pub fn fit_axis_command(args: FitAxisArgs) -> CmdResult {
    let output = match (&args.pdb, args.builtin_strand) {
        (Some(path), _) => {
            let s = parse_pdb(&read(path)?).map_err(|e| CliError::new(ErrorKind::Parse, format!("{}: {e}", path.display())))?;
            FitAxisOutput {
                schema_version: OUTPUT_SCHEMA_VERSION,
                source: path.display().to_string(),
                axes: strand_axes(&s, &args.chain)?.into_iter().map(|axis| AxisOut { axis, reference: None }).collect(),
            }
        }
        (None, Some(which)) => {
            let (strand, id) = match which {
                StrandArg::A => (Strand::A, 'A'),
                StrandArg::B => (Strand::B, 'B'),
            };
            let axis = fit_axis(id, &strand_axis_data(strand))?;
            let w = reference_axis(strand);
            let cosine = direction_cosine(&axis.eigen_direction, &w);
            if cosine < AXIS_COSINE_TARGET {
                log::warn!("strand {id}: |cos| {cosine:.6} against the reference axis is below {AXIS_COSINE_TARGET}");
            }
            FitAxisOutput {
                schema_version: OUTPUT_SCHEMA_VERSION,
                source: format!("builtin-strand-{id}"),
                axes: vec![AxisOut {
                    axis,
                    reference: Some(ReferenceComparison {
                        direction: [w.x, w.y, w.z],
                        cosine,
                        meets_target: cosine >= AXIS_COSINE_TARGET,
                    }),
                }],
            }
        }
        (None, None) => return Err(CliError::usage("pass --pdb with --chain, or --builtin-strand")),
    };
    print_json(&output)?;
    Ok(ExitCode::SUCCESS)
}

/// Uniform random start in a cube scaled to the cluster size, redrawn until no
/// two atoms are closer than 0.7.
fn cluster_start(n: usize, half: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..3 * n).map(|_| rng.random_range(-half..half)).collect();
        let crowded = (0..n).any(|i| {
            (0..i).any(|j| (0..3).map(|k| (x[3 * i + k] - x[3 * j + k]).powi(2)).sum::<f64>() < 0.49)
        });
        if !crowded {
            return x;
        }
    }
}

pub fn lj(args: LjArgs) -> CmdResult {
    if args.curve {
        let p = LjParams::new(args.epsilon, args.sigma)?;
        let table = lj_curve(&p, args.r_min * args.sigma, args.r_max * args.sigma, args.samples)?;
        let csv = curve_csv(&table);
        match &args.out {
            Some(path) => write(path, &csv)?,
            None => emit(&csv)?,
        }
        return Ok(ExitCode::SUCCESS);
    }
    let n = args.cluster.ok_or_else(|| CliError::usage("pass --cluster N or --curve"))?;
    let obj = LjCluster::new(n)?;
    let method = args.opt.optimizer.unwrap_or(Method::Lbfgs);
    let cfg = args.opt.config(OptimizerConfig::default())?;
    let half = 0.6 * (n as f64).cbrt().max(1.0) + 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let x0 = cluster_start(n, half, &mut rng);
    let search_box = SearchBox::cube(3 * n, -half, half)?;
    let f_initial = obj.value(&x0)?;
    let r = method.run(&obj, &x0, &search_box, &cfg)?;
    args.opt.write_trace(&r)?;
    print_json(&LjClusterOutput {
        schema_version: OUTPUT_SCHEMA_VERSION,
        n_atoms: n,
        energy: r.f_best,
        coordinates: r.x_best.chunks(3).map(|c| [c[0], c[1], c[2]]).collect(),
        optimizer: OptimizerRun::new(method, &cfg, f_initial, &r),
    })?;
    Ok(ExitCode::SUCCESS)
}

/// Seeded sample points for one gradient-check objective.
type Trial = (Box<dyn Objective>, Vec<f64>);

fn grad_trials(which: GradObjective, atoms: usize, trials: usize, seed: u64) -> Result<Vec<Trial>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Trial> = Vec::with_capacity(trials);
    for k in 0..trials {
        match which {
            GradObjective::LjCluster => {
                let obj = LjCluster::new(atoms)?;
                let x = cluster_start(atoms, 0.6 * (atoms as f64).cbrt().max(1.0) + 0.5, &mut rng);
                out.push((Box::new(obj), x));
            }
            GradObjective::DgModel1 | GradObjective::DgModel2 | GradObjective::DgModel3 => {
                let m = match which {
                    GradObjective::DgModel1 => Model::One,
                    GradObjective::DgModel2 => Model::Two,
                    _ => Model::Three,
                };
                let p = model_problem(m);
                let x = p.initial_guess().iter().map(|v| v + rng.random_range(-4.0..4.0)).collect();
                out.push((Box::new(p), x));
            }
            GradObjective::AxisFit => {
                let strand = if k % 2 == 0 { Strand::A } else { Strand::B };
                let w = loop {
                    let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                    if w.iter().map(|v| v * v).sum::<f64>() > 1e-2 {
                        break w;
                    }
                };
                out.push((Box::new(strand_axis_data(strand)), w));
            }
        }
    }
    Ok(out)
}

pub fn check_grad(args: CheckGradArgs) -> CmdResult {
    if !(args.step > 0.0) {
        return Err(CliError::usage("--step must be positive"));
    }
    let name = clap::ValueEnum::to_possible_value(&args.objective)
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let mut worst_rel = 0.0f64;
    let mut worst_abs = 0.0f64;
    let mut failures = 0;
    for (obj, x) in grad_trials(args.objective, args.atoms, args.trials, args.seed)? {
        let c = check_gradient(obj.as_ref(), &x, args.step)?;
        worst_rel = worst_rel.max(c.relative_error);
        worst_abs = worst_abs.max(c.max_abs_error);
        if !(c.relative_error <= args.tolerance) {
            failures += 1;
        }
    }
    let passed = failures == 0;
    print_json(&GradCheckOutput {
        schema_version: OUTPUT_SCHEMA_VERSION,
        objective: name,
        trials: args.trials,
        seed: args.seed,
        step: args.step,
        tolerance: args.tolerance,
        max_relative_error: worst_rel,
        max_abs_error: worst_abs,
        failures,
        passed,
    })?;
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

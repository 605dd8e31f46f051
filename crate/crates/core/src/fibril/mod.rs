//! End-to-end model construction.
//!
//! [`build_model`] threads the target sequence onto the template strands A and
//! B, optimizes the sensor CB positions of the second sheet against the
//! anchors, and emits chains G and H as a rigid image of A and B.
//! [`assemble_fibril`] stacks the four core chains into the 12-chain fibril
//! and [`strand_axes`] fits a straight axis to each strand.

mod fetch;
mod recipe;

pub use fetch::{
    cached_path, default_cache_dir, fetch_template, fetch_template_from, CACHE_DIR_ENV, DEFAULT_ARCHIVE_URL,
};
pub use recipe::{BuildRecipe, ResidueWindow, TemplateSource, TransformMode, RECIPE_SCHEMA_VERSION, TEMPLATE_WINDOW};

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geomopt::{smallest_eigenpair, AxisFitProblem, DistanceGeometryProblem, Edge, EndpointRef};
use crate::mutator::{backbone_hbonds, preserved_hbond_check, thread_window, TargetSequence, HBOND_CUTOFF};
use crate::optim::{steepest_descent, OptimizationResult, OptimizerConfig, StopReason};
use crate::structure::{AtomAddress, Chain, Structure};
use crate::transforms::{
    derive_sheet_translation, optimized_sheet_transform, stack_transform, template_sheet_transform, AffineTransform,
    StackDirection,
};
use crate::Point;

/// Format version of serialized reports.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Inter-chain atom pairs closer than this are reported as clashes, Å.
pub const CLASH_DISTANCE: f64 = 2.2;

/// Sheet-1 chain whose image is the given sheet-2 chain.
fn sheet1_partner(chain: char) -> Option<char> {
    match chain {
        'G' => Some('A'),
        'H' => Some('B'),
        _ => None,
    }
}

/// One designated contact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactDistance {
    pub from: AtomAddress,
    pub to: AtomAddress,
    pub target: f64,
    /// Before optimization.
    pub initial: f64,
    /// At the optimized sensor positions.
    pub optimized: f64,
    /// In the emitted structure (rigid sheet-2 image).
    pub emitted: f64,
    /// optimized − target.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub sensor: AtomAddress,
    pub anchors: [AtomAddress; 2],
    pub anchor_gap: f64,
    pub upper_margin: f64,
    pub lower_margin: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformReport {
    pub mode: TransformMode,
    /// Row-major rotation followed by the translation.
    pub applied: [f64; 12],
    pub shipped_translation: [f64; 3],
    /// Mean of (optimized sensor − R·sheet-1 source) over this build's sensors.
    pub derived_translation: [f64; 3],
    /// Per-sensor deviation of each pair from the derived mean.
    pub derived_deviations: Vec<[f64; 3]>,
    /// ‖derived − shipped‖.
    pub derived_vs_shipped: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainPairHbonds {
    pub chains: [char; 2],
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbondReport {
    pub cutoff: f64,
    /// Backbone N···O contacts per chain pair of the assembled fibril.
    pub pairs: Vec<ChainPairHbonds>,
    pub total: usize,
    /// Bonds of the unmutated assembly still present after threading.
    pub retained: usize,
    pub retained_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clash {
    pub a: AtomAddress,
    pub b: AtomAddress,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerSummary {
    pub method: String,
    pub seed: u64,
    pub f_initial: f64,
    pub f_best: f64,
    pub iterations: usize,
    pub function_evals: usize,
    pub gradient_evals: usize,
    pub converged: bool,
    pub reason: StopReason,
}

/// Geometry summary of one build.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactReport {
    pub schema_version: u32,
    pub recipe: String,
    pub sequence: String,
    pub contact_distance: f64,
    pub optimizer: OptimizerSummary,
    pub contacts: Vec<ContactDistance>,
    pub triangle_margins: Vec<MarginReport>,
    /// All anchor pairs admit exact contacts.
    pub feasible: bool,
    pub notes: Vec<String>,
    pub sheet_transform: TransformReport,
    pub hbonds: HbondReport,
    pub clash_distance: f64,
    pub clashes: Vec<Clash>,
}

impl ContactReport {
    /// Largest |distance − target| before and after optimization.
    pub fn max_deviation(&self) -> (f64, f64) {
        self.contacts.iter().fold((0.0f64, 0.0f64), |(i, o), c| {
            (i.max((c.initial - c.target).abs()), o.max(c.deviation.abs()))
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Result of [`build_model`].
#[derive(Debug, Clone)]
pub struct BuildOutput {
    /// Chains A, B, G, H.
    pub structure: Structure,
    pub report: ContactReport,
    pub optimization: OptimizationResult,
    pub problem: DistanceGeometryProblem,
}

fn core_chain(template: &Structure, id: char) -> Result<&Chain> {
    template
        .chain(id)
        .ok_or_else(|| Error::Structure(format!("template has no chain {id} (chains present: {:?})", template.chain_ids())))
}

fn arr(p: &Point) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn core_structure(title: &str, a: Chain, b: Chain, sheet2: &AffineTransform) -> Result<Structure> {
    let mut s = Structure::new(title);
    let g = sheet2.apply_chain(&a, 'G');
    let h = sheet2.apply_chain(&b, 'H');
    for c in [a, b, g, h] {
        s.push_chain(c)?;
    }
    s.renumber_serials();
    Ok(s)
}

/// Builds chains A, B, G, H for `recipe` on `template`.
///
/// Chains A and B are cut to the recipe window, threaded and renumbered from 1.
/// The sensors start on the image of A/B under the template sheet transform,
/// are optimized against the fixed anchors, and the emitted G/H chains are the
/// image of A/B under the shipped or the re-derived sheet transform.
pub fn build_model(recipe: &BuildRecipe, template: &Structure) -> Result<BuildOutput> {
    recipe.validate()?;
    let target = TargetSequence::new(&recipe.name, &recipe.sequence)?;
    let (first, last) = (recipe.window.first, recipe.window.last);
    let raw_a = core_chain(template, 'A')?.window(first, last)?.renumbered(1);
    let raw_b = core_chain(template, 'B')?.window(first, last)?.renumbered(1);
    let a = thread_window(core_chain(template, 'A')?, first, last, &target)?.renumbered(1);
    let b = thread_window(core_chain(template, 'B')?, first, last, &target)?.renumbered(1);

    let start_tf = template_sheet_transform();
    let initial = core_structure(&recipe.name, a.clone(), b.clone(), &start_tf)?;

    let anchors = recipe.anchors.iter().map(|addr| initial.select(addr)).collect::<Result<Vec<_>>>()?;
    let x0 = match &recipe.initial_guess {
        Some(x) => x.clone(),
        None => {
            let mut x = Vec::with_capacity(3 * recipe.sensors.len());
            for addr in &recipe.sensors {
                x.extend_from_slice(&arr(&initial.select(addr)?));
            }
            x
        }
    };
    let edges: Vec<Edge> = recipe.edges.iter().map(|[u, v]| Edge::new(*u, *v, recipe.contact_distance)).collect();
    let problem = DistanceGeometryProblem::new(anchors, recipe.sensors.len(), edges, x0.clone())?.with_labels(
        recipe.anchors.iter().map(ToString::to_string).collect(),
        recipe.sensors.iter().map(ToString::to_string).collect(),
    )?;

    let f_initial = problem.value(&x0)?;
    let result = recipe.optimizer.run(&problem, &x0, &problem.search_box(), &recipe.config)?;
    let optimized = problem.sensors(&result.x_best)?;

    // Sheet-1 source of each sensor: same residue and atom on the partner chain.
    let mut pairs = Vec::with_capacity(recipe.sensors.len());
    for (addr, image) in recipe.sensors.iter().zip(&optimized) {
        let partner = sheet1_partner(addr.chain)
            .ok_or_else(|| Error::Argument(format!("sensor {addr} is not on chain G or H")))?;
        let source = initial.select(&AtomAddress::new(partner, addr.seq, &addr.name))?;
        pairs.push((source, *image));
    }
    let rotation = *start_tf.rotation();
    let fit = derive_sheet_translation(&pairs, &rotation)?;
    let shipped = optimized_sheet_transform();
    let emit_tf = match recipe.transform {
        TransformMode::Shipped => shipped,
        TransformMode::Derived => AffineTransform::new(rotation, fit.translation)?,
    };
    let structure = core_structure(&recipe.name, a, b, &emit_tf)?;

    let endpoint_addr = |e: EndpointRef| match e {
        EndpointRef::Anchor(i) => recipe.anchors[i].clone(),
        EndpointRef::Sensor(i) => recipe.sensors[i].clone(),
    };
    let before = problem.edge_distances(&x0)?;
    let after = problem.edge_distances(&result.x_best)?;
    let mut contacts = Vec::with_capacity(before.len());
    for (b0, b1) in before.iter().zip(&after) {
        let from = endpoint_addr(b0.edge.a);
        let to = endpoint_addr(b0.edge.b);
        let emitted = (structure.select(&from)? - structure.select(&to)?).norm();
        contacts.push(ContactDistance {
            from,
            to,
            target: b0.edge.target,
            initial: b0.distance,
            optimized: b1.distance,
            emitted,
            deviation: b1.deviation,
        });
    }

    let mut notes = Vec::new();
    let triangle_margins: Vec<MarginReport> = problem
        .triangle_margins()
        .into_iter()
        .map(|m| {
            let r = MarginReport {
                sensor: recipe.sensors[m.sensor].clone(),
                anchors: [recipe.anchors[m.anchors.0].clone(), recipe.anchors[m.anchors.1].clone()],
                anchor_gap: m.anchor_gap,
                upper_margin: m.upper_margin,
                lower_margin: m.lower_margin,
                feasible: m.feasible(),
            };
            if !r.feasible {
                notes.push(format!(
                    "anchors {} and {} are {:.3} Å apart; sensor {} cannot meet both contacts (margin {:.3} Å)",
                    r.anchors[0],
                    r.anchors[1],
                    r.anchor_gap,
                    r.sensor,
                    r.upper_margin.min(r.lower_margin)
                ));
            }
            r
        })
        .collect();
    let feasible = triangle_margins.iter().all(|m| m.feasible);

    let fibril = assemble_fibril(&structure)?;
    let unmutated = assemble_fibril(&core_structure(&recipe.name, raw_a, raw_b, &emit_tf)?)?;
    let hbonds = hbond_report(&unmutated, &fibril, HBOND_CUTOFF);
    let clashes = find_clashes(&fibril, CLASH_DISTANCE);
    if !clashes.is_empty() {
        notes.push(format!("{} inter-chain atom pairs closer than {CLASH_DISTANCE} Å; relaxation advised", clashes.len()));
    }

    let report = ContactReport {
        schema_version: REPORT_SCHEMA_VERSION,
        recipe: recipe.name.clone(),
        sequence: target.letters(),
        contact_distance: recipe.contact_distance,
        optimizer: OptimizerSummary {
            method: recipe.optimizer.name().to_string(),
            seed: recipe.config.rng_seed,
            f_initial,
            f_best: result.f_best,
            iterations: result.iterations,
            function_evals: result.function_evals,
            gradient_evals: result.gradient_evals,
            converged: result.converged,
            reason: result.reason,
        },
        contacts,
        triangle_margins,
        feasible,
        notes,
        sheet_transform: TransformReport {
            mode: recipe.transform,
            applied: emit_tf.to_row_major(),
            shipped_translation: arr(shipped.translation()),
            derived_translation: arr(&fit.translation),
            derived_deviations: fit.deviations.iter().map(arr).collect(),
            derived_vs_shipped: (fit.translation - shipped.translation()).norm(),
        },
        hbonds,
        clash_distance: CLASH_DISTANCE,
        clashes,
    };
    Ok(BuildOutput { structure, report, optimization: result, problem })
}

fn hbond_report(before: &Structure, after: &Structure, cutoff: f64) -> HbondReport {
    let retention = preserved_hbond_check(before, after, cutoff);
    let mut pairs: Vec<ChainPairHbonds> = Vec::new();
    for hb in backbone_hbonds(after, cutoff) {
        let mut key = [hb.donor_chain, hb.acceptor_chain];
        key.sort_unstable();
        match pairs.iter_mut().find(|p| p.chains == key) {
            Some(p) => p.count += 1,
            None => pairs.push(ChainPairHbonds { chains: key, count: 1 }),
        }
    }
    pairs.sort_by_key(|p| p.chains);
    HbondReport {
        cutoff,
        total: retention.after.len(),
        pairs,
        retained: retention.retained,
        retained_fraction: retention.retained_fraction,
    }
}

/// Atom pairs on different chains closer than `cutoff`.
pub fn find_clashes(s: &Structure, cutoff: f64) -> Vec<Clash> {
    let atoms: Vec<(AtomAddress, Point)> = s
        .chains
        .iter()
        .flat_map(|c| {
            c.residues
                .iter()
                .flat_map(move |r| r.atoms.iter().map(move |a| (AtomAddress::new(c.id, r.seq, &a.name), a.position)))
        })
        .collect();
    let mut out = Vec::new();
    for (i, (ai, pi)) in atoms.iter().enumerate() {
        for (aj, pj) in &atoms[i + 1..] {
            if ai.chain == aj.chain {
                continue;
            }
            let d = (pi - pj).norm();
            if d < cutoff {
                out.push(Clash { a: ai.clone(), b: aj.clone(), distance: d });
            }
        }
    }
    out
}

/// Stacks the core chains into the 12-chain fibril: C, D = A, B shifted up;
/// E, F = A, B shifted down; K, L = G, H shifted up; I, J = G, H shifted down.
pub fn assemble_fibril(core: &Structure) -> Result<Structure> {
    let get = |id: char| {
        core.chain(id)
            .cloned()
            .ok_or_else(|| Error::Structure(format!("core structure lacks chain {id}")))
    };
    let (a, b, g, h) = (get('A')?, get('B')?, get('G')?, get('H')?);
    let up = stack_transform(StackDirection::Up);
    let down = stack_transform(StackDirection::Down);
    let mut out = Structure::new(&core.title);
    for chain in [
        a.clone(),
        b.clone(),
        up.apply_chain(&a, 'C'),
        up.apply_chain(&b, 'D'),
        down.apply_chain(&a, 'E'),
        down.apply_chain(&b, 'F'),
        g.clone(),
        h.clone(),
        down.apply_chain(&g, 'I'),
        down.apply_chain(&h, 'J'),
        up.apply_chain(&g, 'K'),
        up.apply_chain(&h, 'L'),
    ] {
        out.push_chain(chain)?;
    }
    out.renumber_serials();
    Ok(out)
}

/// Best-fit axis of one chain by both solver routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrandAxis {
    pub chain: char,
    pub n_points: usize,
    /// Unit direction from gradient descent on the axis objective, started at
    /// the Cα centroid.
    pub descent_direction: [f64; 3],
    pub descent_value: f64,
    pub descent_converged: bool,
    /// Unit eigenvector of the smallest inertia eigenvalue.
    pub eigen_direction: [f64; 3],
    pub eigen_value: f64,
    /// |cos| between the two directions.
    pub cosine: f64,
}

fn orient(v: Vector3<f64>) -> Vector3<f64> {
    match v.iter().find(|c| c.abs() > 1e-12) {
        Some(c) if *c < 0.0 => -v,
        _ => v,
    }
}

/// Axis of a point set by both routes.
pub fn fit_axis(chain: char, problem: &AxisFitProblem) -> Result<StrandAxis> {
    let c = problem.centroid();
    let start = if c.norm() > 0.0 { c } else { problem.points().iter().copied().find(|p| p.norm() > 0.0).unwrap_or(Point::x()) };
    let cfg = OptimizerConfig::default();
    let run = steepest_descent(problem, &[start.x, start.y, start.z], &cfg)?;
    let w = orient(Vector3::from_column_slice(&run.x_best).normalize());
    let (eigen_value, v) = smallest_eigenpair(&problem.inertia_matrix())?;
    Ok(StrandAxis {
        chain,
        n_points: problem.points().len(),
        descent_direction: arr(&w),
        descent_value: problem.value(&w)?,
        descent_converged: run.converged,
        eigen_direction: arr(&v),
        eigen_value,
        cosine: w.dot(&v).abs().min(1.0),
    })
}

/// Fits an axis to the Cα atoms of each requested chain.
pub fn strand_axes(s: &Structure, chains: &[char]) -> Result<Vec<StrandAxis>> {
    chains
        .iter()
        .map(|&id| {
            let chain = s.chain(id).ok_or_else(|| Error::Lookup(format!("no chain {id} in structure")))?;
            let ca = chain.positions_of("CA");
            if ca.len() < 2 {
                return Err(Error::Structure(format!("chain {id} has {} CA atoms; at least 2 are needed", ca.len())));
            }
            let problem = AxisFitProblem::new(ca).map_err(|e| Error::Structure(format!("chain {id}: {e}")))?;
            fit_axis(id, &problem)
        })
        .collect()
}

/// |cos| between a fitted direction and a reference vector, at most 1.
pub fn direction_cosine(a: &[f64; 3], b: &Vector3<f64>) -> f64 {
    let a = Vector3::from_column_slice(a);
    (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0)
}

//! Least-squares geometry problems: sensor/anchor distance geometry and strand
//! axis fitting.
//!
//! A distance-geometry problem places free "sensor" atoms so that chosen
//! sensor–anchor (or sensor–sensor) distances approach a target, by minimizing
//! Σ ½(‖u − v‖² − d²)². An axis-fit problem finds the direction w of the line
//! through the origin that minimizes the summed squared perpendicular distances
//! of a point set; its minimum over unit w is the smallest eigenvalue of the
//! point set's inertia tensor.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{Objective, SearchBox};
use crate::structure::AtomAddress;
use crate::Point;

/// Closest carbon–carbon contact: twice the carbon van der Waals radius, Å.
pub const CONTACT_DISTANCE: f64 = 3.4;

/// Format version written into serialized problems.
pub const PROBLEM_SCHEMA_VERSION: u32 = 1;

/// One end of a distance constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndpointRef {
    Anchor(usize),
    Sensor(usize),
}

impl fmt::Display for EndpointRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndpointRef::Anchor(i) => write!(f, "a{}", i + 1),
            EndpointRef::Sensor(i) => write!(f, "s{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: EndpointRef,
    pub b: EndpointRef,
    /// Target distance, Å.
    pub target: f64,
}

impl Edge {
    pub fn new(a: EndpointRef, b: EndpointRef, target: f64) -> Self {
        Self { a, b, target }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDocument {
    schema_version: u32,
    anchors: Vec<[f64; 3]>,
    n_sensors: usize,
    edges: Vec<Edge>,
    initial_guess: Vec<f64>,
    #[serde(default)]
    anchor_labels: Vec<String>,
    #[serde(default)]
    sensor_labels: Vec<String>,
}

/// Anchors are fixed points; sensors are the free variables, flattened as
/// x = (s1x, s1y, s1z, s2x, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemDocument", into = "ProblemDocument")]
pub struct DistanceGeometryProblem {
    anchors: Vec<Point>,
    n_sensors: usize,
    edges: Vec<Edge>,
    initial_guess: Vec<f64>,
    anchor_labels: Vec<String>,
    sensor_labels: Vec<String>,
}

impl From<DistanceGeometryProblem> for ProblemDocument {
    fn from(p: DistanceGeometryProblem) -> Self {
        ProblemDocument {
            schema_version: PROBLEM_SCHEMA_VERSION,
            anchors: p.anchors.iter().map(|a| [a.x, a.y, a.z]).collect(),
            n_sensors: p.n_sensors,
            edges: p.edges,
            initial_guess: p.initial_guess,
            anchor_labels: p.anchor_labels,
            sensor_labels: p.sensor_labels,
        }
    }
}

impl TryFrom<ProblemDocument> for DistanceGeometryProblem {
    type Error = Error;

    fn try_from(doc: ProblemDocument) -> Result<Self> {
        if doc.schema_version != PROBLEM_SCHEMA_VERSION {
            return Err(Error::Argument(format!(
                "unsupported problem schema_version {} (expected {PROBLEM_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        let anchors = doc.anchors.iter().map(|a| Point::new(a[0], a[1], a[2])).collect();
        let mut p = DistanceGeometryProblem::new(anchors, doc.n_sensors, doc.edges, doc.initial_guess)?;
        p = p.with_labels(doc.anchor_labels, doc.sensor_labels)?;
        Ok(p)
    }
}

/// Per-edge distance at a sensor configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeDistance {
    pub edge: Edge,
    pub distance: f64,
    /// distance − target.
    pub deviation: f64,
}

/// Triangle-inequality test for a sensor tied to two anchors.
///
/// Both margins must be ≥ 0 for the two distances to be met exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleMargin {
    pub sensor: usize,
    pub anchors: (usize, usize),
    pub anchor_gap: f64,
    /// d₁ + d₂ − gap: negative when the anchors are too far apart.
    pub upper_margin: f64,
    /// gap − |d₁ − d₂|: negative when the anchors are too close.
    pub lower_margin: f64,
}

impl TriangleMargin {
    pub fn feasible(&self) -> bool {
        self.upper_margin >= 0.0 && self.lower_margin >= 0.0
    }
}

impl DistanceGeometryProblem {
    pub fn new(anchors: Vec<Point>, n_sensors: usize, edges: Vec<Edge>, initial_guess: Vec<f64>) -> Result<Self> {
        if n_sensors == 0 {
            return Err(Error::Argument("a distance-geometry problem needs at least one sensor".into()));
        }
        if anchors.iter().any(|a| !a.iter().all(|c| c.is_finite())) {
            return Err(Error::Argument("anchor coordinates must be finite".into()));
        }
        if edges.is_empty() {
            return Err(Error::Argument("a distance-geometry problem needs at least one edge".into()));
        }
        for e in &edges {
            if !(e.target > 0.0 && e.target.is_finite()) {
                return Err(Error::Argument(format!("edge {e} has non-positive target {}", e.target)));
            }
            for end in [e.a, e.b] {
                match end {
                    EndpointRef::Anchor(i) if i >= anchors.len() => {
                        return Err(Error::Argument(format!("edge {e} references missing anchor {}", i + 1)))
                    }
                    EndpointRef::Sensor(i) if i >= n_sensors => {
                        return Err(Error::Argument(format!("edge {e} references missing sensor {}", i + 1)))
                    }
                    _ => {}
                }
            }
            if matches!((e.a, e.b), (EndpointRef::Anchor(_), EndpointRef::Anchor(_))) {
                return Err(Error::Argument(format!("edge {e} joins two anchors and is constant")));
            }
            if e.a == e.b {
                return Err(Error::Argument(format!("edge {e} joins a sensor to itself")));
            }
        }
        if initial_guess.len() != 3 * n_sensors {
            return Err(Error::Argument(format!(
                "initial guess has {} components, expected {}",
                initial_guess.len(),
                3 * n_sensors
            )));
        }
        Ok(Self { anchors, n_sensors, edges, initial_guess, anchor_labels: Vec::new(), sensor_labels: Vec::new() })
    }

    /// Attaches display labels; each list is either empty or one per point.
    pub fn with_labels(mut self, anchor_labels: Vec<String>, sensor_labels: Vec<String>) -> Result<Self> {
        if !anchor_labels.is_empty() && anchor_labels.len() != self.anchors.len() {
            return Err(Error::Argument("need one label per anchor".into()));
        }
        if !sensor_labels.is_empty() && sensor_labels.len() != self.n_sensors {
            return Err(Error::Argument("need one label per sensor".into()));
        }
        self.anchor_labels = anchor_labels;
        self.sensor_labels = sensor_labels;
        Ok(self)
    }

    pub fn with_initial_guess(mut self, x: Vec<f64>) -> Result<Self> {
        self.check_dim(&x)?;
        self.initial_guess = x;
        Ok(self)
    }

    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn initial_guess(&self) -> &[f64] {
        &self.initial_guess
    }

    pub fn anchor_labels(&self) -> &[String] {
        &self.anchor_labels
    }

    pub fn sensor_labels(&self) -> &[String] {
        &self.sensor_labels
    }

    pub fn dim(&self) -> usize {
        3 * self.n_sensors
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Argument(format!(
                "sensor vector has {} components, problem has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn endpoint(&self, x: &[f64], end: EndpointRef) -> Point {
        match end {
            EndpointRef::Anchor(i) => self.anchors[i],
            EndpointRef::Sensor(i) => Point::new(x[3 * i], x[3 * i + 1], x[3 * i + 2]),
        }
    }

    /// Sensor positions from a flattened vector.
    pub fn sensors(&self, x: &[f64]) -> Result<Vec<Point>> {
        self.check_dim(x)?;
        Ok(x.chunks_exact(3).map(|c| Point::new(c[0], c[1], c[2])).collect())
    }

    fn eval(&self, x: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut f = 0.0;
        for e in &self.edges {
            let diff = self.endpoint(x, e.a) - self.endpoint(x, e.b);
            let r = diff.norm_squared() - e.target * e.target;
            f += 0.5 * r * r;
            if let Some(g) = grad.as_deref_mut() {
                // ∂/∂u ½(‖u−v‖² − d²)² = 2r(u − v)
                let gu = 2.0 * r * diff;
                if let EndpointRef::Sensor(i) = e.a {
                    for k in 0..3 {
                        g[3 * i + k] += gu[k];
                    }
                }
                if let EndpointRef::Sensor(j) = e.b {
                    for k in 0..3 {
                        g[3 * j + k] -= gu[k];
                    }
                }
            }
        }
        f
    }

    /// Σ_edges ½(‖u − v‖² − d²)².
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval(x, None))
    }

    /// Value and analytic gradient with respect to the sensor coordinates.
    pub fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_dim(x)?;
        let mut g = vec![0.0; x.len()];
        let f = self.eval(x, Some(&mut g));
        Ok((f, g))
    }

    pub fn edge_distances(&self, x: &[f64]) -> Result<Vec<EdgeDistance>> {
        self.check_dim(x)?;
        Ok(self
            .edges
            .iter()
            .map(|e| {
                let distance = (self.endpoint(x, e.a) - self.endpoint(x, e.b)).norm();
                EdgeDistance { edge: *e, distance, deviation: distance - e.target }
            })
            .collect())
    }

    /// Triangle margins for every sensor that is tied to two anchors.
    pub fn triangle_margins(&self) -> Vec<TriangleMargin> {
        let mut out = Vec::new();
        for s in 0..self.n_sensors {
            let ties: Vec<(usize, f64)> = self
                .edges
                .iter()
                .filter_map(|e| match (e.a, e.b) {
                    (EndpointRef::Sensor(i), EndpointRef::Anchor(a)) | (EndpointRef::Anchor(a), EndpointRef::Sensor(i))
                        if i == s =>
                    {
                        Some((a, e.target))
                    }
                    _ => None,
                })
                .collect();
            for (k, &(a1, d1)) in ties.iter().enumerate() {
                for &(a2, d2) in &ties[k + 1..] {
                    let gap = (self.anchors[a1] - self.anchors[a2]).norm();
                    out.push(TriangleMargin {
                        sensor: s,
                        anchors: (a1, a2),
                        anchor_gap: gap,
                        upper_margin: d1 + d2 - gap,
                        lower_margin: gap - (d1 - d2).abs(),
                    });
                }
            }
        }
        out
    }

    /// Every anchor-tied sensor can meet its targets exactly (necessary, not
    /// sufficient, for a zero minimum when sensors are also tied together).
    pub fn is_feasible(&self) -> bool {
        self.triangle_margins().iter().all(TriangleMargin::feasible)
    }

    /// Anchor bounding box widened by twice the largest target, repeated for
    /// every sensor; `[−5, 5]ⁿ` when there are no anchors.
    pub fn search_box(&self) -> SearchBox {
        let n = self.dim();
        if self.anchors.is_empty() {
            return SearchBox::cube(n, -5.0, 5.0).expect("non-empty cube");
        }
        let pad = 2.0 * self.edges.iter().fold(0.0f64, |m, e| m.max(e.target));
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for a in &self.anchors {
            for k in 0..3 {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(a[k]);
            }
        }
        let lower = (0..n).map(|i| lo[i % 3] - pad).collect();
        let upper = (0..n).map(|i| hi[i % 3] + pad).collect();
        SearchBox::new(lower, upper).expect("padded box has positive width")
    }

    /// The same problem after a rigid motion of anchors and initial guess.
    pub fn transformed(&self, tf: &crate::transforms::AffineTransform) -> Self {
        let mut out = self.clone();
        out.anchors = self.anchors.iter().map(|a| tf.apply_point(a)).collect();
        out.initial_guess = transform_flat(tf, &self.initial_guess);
        out
    }
}

/// Applies `tf` to every point of a flattened (x, y, z, x, y, z, ...) vector.
pub fn transform_flat(tf: &crate::transforms::AffineTransform, x: &[f64]) -> Vec<f64> {
    x.chunks_exact(3)
        .flat_map(|c| {
            let p = tf.apply_point(&Point::new(c[0], c[1], c[2]));
            [p.x, p.y, p.z]
        })
        .collect()
}

impl Objective for DistanceGeometryProblem {
    fn dim(&self) -> usize {
        3 * self.n_sensors
    }

    fn value(&self, x: &[f64]) -> f64 {
        if x.len() != self.dim() {
            return f64::NAN;
        }
        self.eval(x, None)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        if x.len() != self.dim() || grad.len() != x.len() {
            return Some(f64::NAN);
        }
        Some(self.eval(x, Some(grad)))
    }
}

/// The three Ala/Gly zipper models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::One, Model::Two, Model::Three];

    pub fn number(self) -> u8 {
        match self {
            Model::One => 1,
            Model::Two => 2,
            Model::Three => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Model::One),
            2 => Ok(Model::Two),
            3 => Ok(Model::Three),
            _ => Err(Error::Argument(format!("model must be 1, 2 or 3, got {n}"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: u8 = s.trim().parse().map_err(|_| Error::Argument(format!("model must be 1, 2 or 3, got {s:?}")))?;
        Model::from_number(n)
    }
}

/// Anchor and sensor atoms of a model, in problem order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelAtoms {
    pub anchors: [AtomAddress; 2],
    pub sensors: [AtomAddress; 2],
}

fn addr(s: &str) -> AtomAddress {
    s.parse().expect("static address")
}

/// Which template CB atoms serve as anchors (sheet 1, chains A/B) and sensors
/// (sheet 2, chains G/H) for each model, numbered 1..6 along the strand.
pub fn model_atoms(model: Model) -> ModelAtoms {
    match model {
        Model::One => ModelAtoms { anchors: [addr("B6.CB"), addr("B4.CB")], sensors: [addr("H3.CB"), addr("H5.CB")] },
        Model::Two => ModelAtoms { anchors: [addr("A3.CB"), addr("A5.CB")], sensors: [addr("G4.CB"), addr("G2.CB")] },
        Model::Three => ModelAtoms { anchors: [addr("A1.CB"), addr("A3.CB")], sensors: [addr("G4.CB"), addr("G2.CB")] },
    }
}

const MODEL1_ANCHORS: [[f64; 3]; 2] = [[-16.359, 9.934, -3.526], [-9.726, 8.530, -3.613]];
const MODEL2_ANCHORS: [[f64; 3]; 2] = [[-8.655, 8.153, 1.770], [-2.257, 6.095, 3.078]];
const MODEL3_ANCHORS: [[f64; 3]; 2] = [[-15.632, 9.694, 0.687], [-8.655, 8.153, 1.770]];
const MODEL1_START: [f64; 6] = [-12.928, 12.454, 3.034, -6.635, 14.301, 2.628];
const MODEL23_START: [f64; 6] = [-13.909, 12.227, -0.889, -7.439, 14.419, -2.033];

/// Reference global minimizers (3 decimals) for each model's sensors.
pub fn reference_optimum(model: Model) -> [f64; 6] {
    match model {
        Model::One => [-13.062, 9.126, -3.336, -12.344, 6.695, -2.457],
        Model::Two => [-11.275, 6.606, 3.288, -5.461, 7.124, 2.424],
        Model::Three => [-12.149, 8.924, 1.229, -9.256, 11.007, 3.517],
    }
}

/// The sensor/anchor problem of a model with the contact distance on every edge.
pub fn model_problem(model: Model) -> DistanceGeometryProblem {
    use EndpointRef::{Anchor as A, Sensor as S};
    let d = CONTACT_DISTANCE;
    let (anchors, edges, start) = match model {
        Model::One => (
            MODEL1_ANCHORS,
            vec![Edge::new(S(0), A(0), d), Edge::new(S(1), A(1), d), Edge::new(S(0), A(1), d)],
            MODEL1_START,
        ),
        Model::Two => (
            MODEL2_ANCHORS,
            vec![Edge::new(S(0), A(0), d), Edge::new(S(1), A(0), d), Edge::new(S(1), A(1), d)],
            MODEL23_START,
        ),
        Model::Three => (
            MODEL3_ANCHORS,
            vec![Edge::new(S(0), A(0), d), Edge::new(S(0), A(1), d), Edge::new(S(1), A(1), d)],
            MODEL23_START,
        ),
    };
    let atoms = model_atoms(model);
    DistanceGeometryProblem::new(
        anchors.iter().map(|a| Point::new(a[0], a[1], a[2])).collect(),
        2,
        edges,
        start.to_vec(),
    )
    .and_then(|p| {
        p.with_labels(
            atoms.anchors.iter().map(ToString::to_string).collect(),
            atoms.sensors.iter().map(ToString::to_string).collect(),
        )
    })
    .expect("static model data is valid")
}

/// Points whose best-fit axis through the origin is sought.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct AxisFitProblem {
    points: Vec<Point>,
}

impl TryFrom<Vec<[f64; 3]>> for AxisFitProblem {
    type Error = Error;

    fn try_from(v: Vec<[f64; 3]>) -> Result<Self> {
        AxisFitProblem::new(v.iter().map(|p| Point::new(p[0], p[1], p[2])).collect())
    }
}

impl From<AxisFitProblem> for Vec<[f64; 3]> {
    fn from(p: AxisFitProblem) -> Self {
        p.points.iter().map(|a| [a.x, a.y, a.z]).collect()
    }
}

impl AxisFitProblem {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Argument(format!("axis fitting needs at least 2 points, got {}", points.len())));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Argument("axis-fit points must be finite".into()));
        }
        if points.iter().all(|p| *p == Point::zeros()) {
            return Err(Error::Argument("axis-fit points are all at the origin".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn centroid(&self) -> Point {
        self.points.iter().sum::<Point>() / self.points.len() as f64
    }

    /// Σᵢ ‖aᵢ‖² − (aᵢ·w)²/‖w‖²: squared perpendicular distances of the points to
    /// the line through the origin along w.
    pub fn value(&self, w: &Vector3<f64>) -> Result<f64> {
        let ww = w.norm_squared();
        if !(ww > 0.0) {
            return Err(Error::Domain("axis direction must be nonzero".into()));
        }
        Ok(self.points.iter().map(|a| a.norm_squared() - a.dot(w).powi(2) / ww).sum())
    }

    pub fn value_and_gradient(&self, w: &Vector3<f64>) -> Result<(f64, Vector3<f64>)> {
        let ww = w.norm_squared();
        if !(ww > 0.0) {
            return Err(Error::Domain("axis direction must be nonzero".into()));
        }
        let mut f = 0.0;
        let mut g = Vector3::zeros();
        for a in &self.points {
            let aw = a.dot(w);
            f += a.norm_squared() - aw * aw / ww;
            g += (2.0 * aw * aw / (ww * ww)) * w - (2.0 * aw / ww) * a;
        }
        Ok((f, g))
    }

    /// Inertia tensor Σᵢ (‖aᵢ‖² I − aᵢaᵢᵀ); wᵀMw equals [`value`](Self::value) for unit w.
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for a in &self.points {
            let (x, y, z) = (a.x, a.y, a.z);
            m[(0, 0)] += y * y + z * z;
            m[(1, 1)] += z * z + x * x;
            m[(2, 2)] += x * x + y * y;
            m[(0, 1)] -= x * y;
            m[(1, 2)] -= y * z;
            m[(0, 2)] -= z * x;
        }
        m[(1, 0)] = m[(0, 1)];
        m[(2, 1)] = m[(1, 2)];
        m[(2, 0)] = m[(0, 2)];
        m
    }
}

impl Objective for AxisFitProblem {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: &[f64]) -> f64 {
        AxisFitProblem::value(self, &Vector3::new(x[0], x[1], x[2])).unwrap_or(f64::NAN)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        match AxisFitProblem::value_and_gradient(self, &Vector3::new(x[0], x[1], x[2])) {
            Ok((f, g)) => {
                grad.copy_from_slice(g.as_slice());
                Some(f)
            }
            Err(_) => {
                grad.iter_mut().for_each(|v| *v = f64::NAN);
                Some(f64::NAN)
            }
        }
    }
}

/// One of the two strands of the Model 1 sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strand {
    A,
    B,
}

impl std::str::FromStr for Strand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Strand::A),
            "B" | "b" => Ok(Strand::B),
            _ => Err(Error::Argument(format!("strand must be A or B, got {s:?}"))),
        }
    }
}

const STRAND_A_CA: [[f64; 3]; 6] = [
    [-16.196, 8.315, 1.061],
    [-12.977, 6.460, 1.908],
    [-9.178, 6.745, 1.448],
    [-6.455, 4.112, 1.558],
    [-3.006, 5.750, 1.782],
    [-1.226, 2.750, 0.233],
];

const STRAND_B_CA: [[f64; 3]; 6] = [
    [-0.959, 2.950, -4.817],
    [-3.465, 4.999, -2.846],
    [-7.213, 4.412, -3.340],
    [-9.954, 7.078, -3.168],
    [-13.660, 6.241, -3.137],
    [-16.702, 8.507, -3.074],
];

/// Reference axis directions (not normalized) for strands A and B.
pub fn reference_axis(strand: Strand) -> Vector3<f64> {
    match strand {
        Strand::A => Vector3::new(-10.751, 6.428, 1.411),
        Strand::B => Vector3::new(-7.960, 4.579, -2.256),
    }
}

/// The six Cα positions of a Model 1 strand.
pub fn strand_axis_data(strand: Strand) -> AxisFitProblem {
    let data = match strand {
        Strand::A => &STRAND_A_CA,
        Strand::B => &STRAND_B_CA,
    };
    AxisFitProblem::new(data.iter().map(|p| Point::new(p[0], p[1], p[2])).collect()).expect("static strand data")
}

fn orient(v: Vector3<f64>) -> Vector3<f64> {
    let v = v.normalize();
    match v.iter().find(|c| c.abs() > 1e-12) {
        Some(c) if *c < 0.0 => -v,
        _ => v,
    }
}

fn residual(m: &Matrix3<f64>, lambda: f64, v: &Vector3<f64>) -> f64 {
    (m * v - lambda * v).norm()
}

/// Smallest eigenvalue of a symmetric 3×3 matrix and a unit eigenvector whose
/// first nonzero component is positive.
///
/// Eigenvalues come from the trigonometric solution of the characteristic
/// cubic and the vector from cross products of rows of M − λI; if that vector
/// is ill-determined (near-repeated eigenvalue) an iterative symmetric
/// eigensolver is used instead.
pub fn smallest_eigenpair(m: &Matrix3<f64>) -> Result<(f64, Vector3<f64>)> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    let scale = m.amax().max(1.0);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 * scale {
            return Err(Error::Argument(format!(
                "matrix is not symmetric: m[{i}][{j}] = {} but m[{j}][{i}] = {}",
                m[(i, j)],
                m[(j, i)]
            )));
        }
    }
    let m = (m + m.transpose()) * 0.5;

    let off = m[(0, 1)].powi(2) + m[(0, 2)].powi(2) + m[(1, 2)].powi(2);
    let lambda = if off == 0.0 {
        m[(0, 0)].min(m[(1, 1)]).min(m[(2, 2)])
    } else {
        let q = m.trace() / 3.0;
        let p2 = (m[(0, 0)] - q).powi(2) + (m[(1, 1)] - q).powi(2) + (m[(2, 2)] - q).powi(2) + 2.0 * off;
        let p = (p2 / 6.0).sqrt();
        let b = (m - Matrix3::identity() * q) / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
    };

    let shifted = m - Matrix3::identity() * lambda;
    let rows = [shifted.row(0).transpose(), shifted.row(1).transpose(), shifted.row(2).transpose()];
    let candidates = [rows[0].cross(&rows[1]), rows[0].cross(&rows[2]), rows[1].cross(&rows[2])];
    let best = candidates.iter().max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared())).expect("three candidates");
    let row_scale = rows.iter().map(|r| r.norm_squared()).fold(0.0f64, f64::max);

    if best.norm_squared() > 1e-20 * row_scale * row_scale && row_scale > 0.0 {
        let v = orient(*best);
        let lambda = v.dot(&(m * v));
        if residual(&m, lambda, &v) <= 1e-10 * scale {
            return Ok((lambda, v));
        }
    }

    let eig = m.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let v = orient(eig.eigenvectors.column(k).into_owned());
    Ok((v.dot(&(m * v)), v))
}

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geomopt::{model_atoms, model_problem, EndpointRef, Model, CONTACT_DISTANCE};
use crate::optim::{Method, OptimizerConfig};
use crate::structure::AtomAddress;

/// Format version of serialized recipes.
pub const RECIPE_SCHEMA_VERSION: u32 = 1;

/// Where the template structure comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateSource {
    /// A local PDB file.
    File(PathBuf),
    /// A 4-character structure id fetched from the public archive.
    Fetch(String),
}

/// Which sheet-2 transform places the emitted G and H chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformMode {
    /// The reference averaged transform.
    #[default]
    Shipped,
    /// The translation re-derived from this build's optimized sensors.
    Derived,
}

/// Inclusive template residue range, in template numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueWindow {
    pub first: i32,
    pub last: i32,
}

impl ResidueWindow {
    pub fn len(&self) -> usize {
        (self.last - self.first + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.last < self.first
    }
}

/// Everything needed to build one zipper model from a template.
///
/// Anchor and sensor addresses use the model's own numbering: residues of the
/// window are renumbered from 1. Anchors live on chains A/B (sheet 1), sensors
/// on chains G/H (sheet 2, the images of A/B).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildRecipe {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<TemplateSource>,
    pub window: ResidueWindow,
    /// One-letter Ala/Gly sequence threaded onto the window.
    pub sequence: String,
    pub anchors: Vec<AtomAddress>,
    pub sensors: Vec<AtomAddress>,
    /// Designated contacts between anchors and sensors.
    pub edges: Vec<[EndpointRef; 2]>,
    #[serde(default = "default_contact")]
    pub contact_distance: f64,
    /// Flattened sensor start; defaults to the sensor atoms of the template
    /// sheet-2 image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_guess: Option<Vec<f64>>,
    #[serde(default = "default_method")]
    pub optimizer: Method,
    #[serde(default)]
    pub config: OptimizerConfig,
    #[serde(default)]
    pub transform: TransformMode,
}

fn default_contact() -> f64 {
    CONTACT_DISTANCE
}

fn default_method() -> Method {
    Method::Lbfgs
}

/// Template residues used by the built-in models.
pub const TEMPLATE_WINDOW: ResidueWindow = ResidueWindow { first: 127, last: 132 };

impl BuildRecipe {
    /// Built-in recipe for one of the three Ala/Gly models.
    pub fn builtin(model: Model) -> Self {
        let atoms = model_atoms(model);
        let sequence = match model {
            Model::One => "AGAAAA",
            Model::Two => "GAAAAG",
            Model::Three => "AAAAGA",
        };
        let problem = model_problem(model);
        BuildRecipe {
            schema_version: RECIPE_SCHEMA_VERSION,
            name: format!("model-{}", model.number()),
            template: None,
            window: TEMPLATE_WINDOW,
            sequence: sequence.to_string(),
            anchors: atoms.anchors.to_vec(),
            sensors: atoms.sensors.to_vec(),
            edges: problem.edges().iter().map(|e| [e.a, e.b]).collect(),
            contact_distance: CONTACT_DISTANCE,
            initial_guess: None,
            optimizer: Method::Lbfgs,
            config: OptimizerConfig::default(),
            transform: TransformMode::Shipped,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: BuildRecipe = serde_json::from_str(text)?;
        r.validate()?;
        Ok(r)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != RECIPE_SCHEMA_VERSION {
            return Err(Error::Argument(format!(
                "unsupported recipe schema_version {} (expected {RECIPE_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.window.is_empty() {
            return Err(Error::Argument(format!(
                "empty residue window {}..={}",
                self.window.first, self.window.last
            )));
        }
        if self.sequence.chars().count() != self.window.len() {
            return Err(Error::Argument(format!(
                "sequence {:?} has {} residues but the window {}..={} has {}",
                self.sequence,
                self.sequence.chars().count(),
                self.window.first,
                self.window.last,
                self.window.len()
            )));
        }
        if !(self.contact_distance > 0.0 && self.contact_distance.is_finite()) {
            return Err(Error::Argument(format!("contact distance must be positive, got {}", self.contact_distance)));
        }
        for a in &self.anchors {
            if !matches!(a.chain, 'A' | 'B') {
                return Err(Error::Argument(format!("anchor {a} must be on chain A or B")));
            }
        }
        for s in &self.sensors {
            if !matches!(s.chain, 'G' | 'H') {
                return Err(Error::Argument(format!("sensor {s} must be on chain G or H")));
            }
        }
        if self.sensors.is_empty() || self.edges.is_empty() {
            return Err(Error::Argument("a recipe needs at least one sensor and one edge".into()));
        }
        if let Some(x) = &self.initial_guess {
            if x.len() != 3 * self.sensors.len() {
                return Err(Error::Argument(format!(
                    "initial guess has {} components, expected {}",
                    x.len(),
                    3 * self.sensors.len()
                )));
            }
        }
        self.config.validate()
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulated-annealing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaConfig {
    pub t_initial: f64,
    /// Geometric cooling: T ← cooling_factor · T after each temperature level.
    pub cooling_factor: f64,
    pub steps_per_temperature: usize,
    /// Proposal half-width at `t_initial`; it shrinks in proportion to T.
    pub step_scale: f64,
    /// Number of temperature levels in a standalone run.
    pub temperature_levels: usize,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            t_initial: 10.0,
            cooling_factor: 0.95,
            steps_per_temperature: 50,
            step_scale: 1.0,
            temperature_levels: 200,
        }
    }
}

/// Simulated-annealing evolutionary search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaecConfig {
    pub population_size: usize,
    /// Share of the population kept as parents each generation.
    pub parent_fraction: f64,
    /// Mutation standard deviation as a fraction of the box width, at `t_initial`.
    pub mutation_scale: f64,
    pub generations: usize,
    /// Temperature levels of the local SA run applied to every offspring.
    pub local_sa_levels: usize,
}

impl Default for SaecConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            parent_fraction: 0.25,
            mutation_scale: 0.1,
            generations: 100,
            local_sa_levels: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub grad_rms_tol: f64,
    pub gmax_tol: f64,
    pub max_iters: usize,
    pub sa: SaConfig,
    pub saec: SaecConfig,
    pub lbfgs_memory: usize,
    pub rng_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grad_rms_tol: 1e-10,
            gmax_tol: 1e-10,
            max_iters: 10_000,
            sa: SaConfig::default(),
            saec: SaecConfig::default(),
            lbfgs_memory: 5,
            rng_seed: 0,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Argument(format!("bad value {value:?} for {key}")))
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Argument(msg.to_string()));
        if !(self.grad_rms_tol > 0.0 && self.gmax_tol > 0.0) {
            return bad("gradient tolerances must be positive");
        }
        if !(self.sa.t_initial > 0.0 && self.sa.t_initial.is_finite()) {
            return bad("sa.t_initial must be positive");
        }
        if !(self.sa.cooling_factor > 0.0 && self.sa.cooling_factor < 1.0) {
            return bad("sa.cooling_factor must lie in (0, 1)");
        }
        if !(self.sa.step_scale > 0.0) {
            return bad("sa.step_scale must be positive");
        }
        if self.sa.steps_per_temperature == 0 {
            return bad("sa.steps_per_temperature must be at least 1");
        }
        if self.saec.population_size < 2 {
            return bad("saec.population_size must be at least 2");
        }
        if !(self.saec.parent_fraction > 0.0 && self.saec.parent_fraction < 1.0) {
            return bad("saec.parent_fraction must lie in (0, 1)");
        }
        if !(self.saec.mutation_scale > 0.0) {
            return bad("saec.mutation_scale must be positive");
        }
        Ok(())
    }

    /// Sets one field from its flat key (`max_iters`, `sa.cooling_factor`, ...).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "grad_rms_tol" => self.grad_rms_tol = parse_value(key, value)?,
            "gmax_tol" => self.gmax_tol = parse_value(key, value)?,
            "max_iters" => self.max_iters = parse_value(key, value)?,
            "lbfgs_memory" => self.lbfgs_memory = parse_value(key, value)?,
            "rng_seed" | "seed" => self.rng_seed = parse_value(key, value)?,
            "sa.t_initial" => self.sa.t_initial = parse_value(key, value)?,
            "sa.cooling_factor" => self.sa.cooling_factor = parse_value(key, value)?,
            "sa.steps_per_temperature" => self.sa.steps_per_temperature = parse_value(key, value)?,
            "sa.step_scale" => self.sa.step_scale = parse_value(key, value)?,
            "sa.temperature_levels" => self.sa.temperature_levels = parse_value(key, value)?,
            "saec.population_size" => self.saec.population_size = parse_value(key, value)?,
            "saec.parent_fraction" => self.saec.parent_fraction = parse_value(key, value)?,
            "saec.mutation_scale" => self.saec.mutation_scale = parse_value(key, value)?,
            "saec.generations" => self.saec.generations = parse_value(key, value)?,
            "saec.local_sa_levels" => self.saec.local_sa_levels = parse_value(key, value)?,
            other => return Err(Error::Argument(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#` comments are skipped.
    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            self.set(key, value)?;
        }
        self.validate()
    }

    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_key_values(text)?;
        Ok(cfg)
    }
}

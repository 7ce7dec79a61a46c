//! Experiment configuration: defaults, flat key-value config files, and
//! command-line overrides, with field-level validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dabsor_core::bdf::{bdf_coefficients, BdfScheme};
use dabsor_core::stokes::Preconditioner;

#[derive(Debug)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field,
        message: message.into(),
    }
}

/// All experiment inputs with the protocol defaults materialized.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Interior grid points per dimension.
    pub grid: usize,
    /// BDF order.
    pub order: usize,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub windows: usize,
    /// "q1" or "q2".
    pub precond: String,
    pub omega: Option<f64>,
    pub tau: Option<f64>,
    /// Use the closed-form optimal parameters (ignored when omega/tau given).
    pub optimal: bool,
    pub max_iters: usize,
    pub tol: f64,
    pub out: PathBuf,
    pub seed: u64,
    /// Per-axis point count for parameter sweeps.
    pub resolution: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: 12,
            order: 1,
            dt: 0.001,
            t_start: 0.01,
            t_end: 0.13,
            windows: 1,
            precond: "q1".to_string(),
            omega: None,
            tau: None,
            optimal: true,
            max_iters: 800,
            tol: 1e-6,
            out: PathBuf::from("out"),
            seed: 0,
            resolution: 10,
        }
    }
}

/// Optional command-line overrides applied on top of file values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub order: Option<usize>,
    pub dt: Option<f64>,
    pub windows: Option<usize>,
    pub precond: Option<String>,
    pub omega: Option<f64>,
    pub tau: Option<f64>,
    pub optimal: bool,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err("config", format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| err("config", e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &o.$field { self.$field = v.clone(); })*
            };
        }
        set!(grid, order, dt, windows, precond, max_iters, tol, out, seed, resolution);
        if let Some(v) = o.omega {
            self.omega = Some(v);
        }
        if let Some(v) = o.tau {
            self.tau = Some(v);
        }
        if o.optimal {
            self.optimal = true;
            self.omega = None;
            self.tau = None;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid < 2 {
            return Err(err("grid", "need at least 2 interior points per dimension"));
        }
        if self.grid > 32 {
            return Err(err("grid", "dense storage caps the grid at 32 per dimension"));
        }
        if bdf_coefficients(self.order).is_err() {
            return Err(err(
                "order",
                format!("UnsupportedOrder: {} (supported 1..=6)", self.order),
            ));
        }
        if !(self.dt > 0.0) {
            return Err(err("dt", "time step must be positive"));
        }
        if !(self.t_end > self.t_start) {
            return Err(err("t_end", "simulation interval is empty"));
        }
        if self.windows == 0 {
            return Err(err("windows", "need at least one window"));
        }
        let span = self.t_end - self.t_start;
        let total = (span / self.dt).round();
        if total < 1.0 || (total * self.dt - span).abs() > 1e-8 * span.max(1.0) {
            return Err(err("dt", "time step does not tile the simulation interval"));
        }
        if self.windows > total as usize {
            return Err(err("windows", "more windows than time levels"));
        }
        match (self.omega, self.tau) {
            (Some(w), Some(t)) => {
                if !(w > 0.0 && w < 2.0) {
                    return Err(err("omega", "omega must lie in (0, 2)"));
                }
                if !(t > 0.0) {
                    return Err(err("tau", "tau must be positive"));
                }
            }
            (None, None) => {}
            _ => return Err(err("omega", "omega and tau must be given together")),
        }
        if self.max_iters == 0 {
            return Err(err("max_iters", "need at least one sweep"));
        }
        if !(self.tol > 0.0) {
            return Err(err("tol", "tolerance must be positive"));
        }
        if !(2..=200).contains(&self.resolution) {
            return Err(err("resolution", "resolution must lie in 2..=200"));
        }
        self.preconditioner()?;
        Ok(())
    }

    pub fn preconditioner(&self) -> Result<Preconditioner, ConfigError> {
        match self.precond.to_ascii_lowercase().as_str() {
            "q1" => Ok(Preconditioner::Q1),
            "q2" => Ok(Preconditioner::Q2),
            other => Err(err("precond", format!("unknown preconditioner `{other}` (q1|q2)"))),
        }
    }

    pub fn scheme(&self) -> Result<BdfScheme, ConfigError> {
        bdf_coefficients(self.order)
            .map_err(|e| err("order", e.to_string()))
    }

    /// True when explicit relaxation parameters were supplied.
    pub fn explicit_params(&self) -> Option<(f64, f64)> {
        match (self.omega, self.tau) {
            (Some(w), Some(t)) => Some((w, t)),
            _ => None,
        }
    }
}

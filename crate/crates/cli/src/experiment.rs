//! Single-run orchestration: assemble, analyze, iterate, measure, report.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use dabsor_core::bdf::BdfScheme;
use dabsor_core::dabsor::{
    dabsor_windowed, measure_dpocf, static_iteration, DabsorError, IterationParams, WindowPlan,
    WindowedOutcome,
};
use dabsor_core::spectral::{
    convergence_domain, finite_interval_radius, optimal_params, OptimalResult, SpectralBounds,
    SpectralError,
};
use dabsor_core::stokes::{
    assemble, initial_wave, rhs_sequence, sample_state, AnalyticConstants, GridSpec, StokesError,
    StokesSystem,
};

use crate::config::{ConfigError, ExperimentConfig};

#[derive(Debug)]
pub enum ExperimentError {
    Config(ConfigError),
    Stokes(StokesError),
    Spectral(SpectralError),
    Solver(DabsorError),
    Io(std::io::Error),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Config(e) => write!(f, "{e}"),
            ExperimentError::Stokes(e) => write!(f, "{e}"),
            ExperimentError::Spectral(e) => write!(f, "{e}"),
            ExperimentError::Solver(e) => write!(f, "{e}"),
            ExperimentError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<ConfigError> for ExperimentError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}
impl From<StokesError> for ExperimentError {
    fn from(e: StokesError) -> Self {
        Self::Stokes(e)
    }
}
impl From<SpectralError> for ExperimentError {
    fn from(e: SpectralError) -> Self {
        Self::Spectral(e)
    }
}
impl From<DabsorError> for ExperimentError {
    fn from(e: DabsorError) -> Self {
        Self::Solver(e)
    }
}
impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// Assembled problem plus the spectral analysis shared by every command.
pub struct PreparedRun {
    pub sys: StokesSystem,
    pub scheme: BdfScheme,
    pub sigma: f64,
    pub bounds: SpectralBounds,
    pub optimal: OptimalResult,
    pub omega: f64,
    pub tau: f64,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedRun, ExperimentError> {
    cfg.validate()?;
    let grid = GridSpec::square(cfg.grid)?;
    let sys = assemble(grid)?.with_preconditioner(cfg.preconditioner()?)?;
    let scheme = cfg.scheme()?;
    let sigma = scheme.sigma(cfg.dt);
    let bounds = SpectralBounds::compute(&sys, sigma)?;
    let optimal = optimal_params(&bounds, None);
    let (omega, tau) = cfg
        .explicit_params()
        .unwrap_or((optimal.omega_opt, optimal.tau_opt));
    Ok(PreparedRun {
        sys,
        scheme,
        sigma,
        bounds,
        optimal,
        omega,
        tau,
    })
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub sigma: f64,
    pub bounds: SpectralBounds,
    pub omega: f64,
    pub tau: f64,
    pub in_domain: bool,
    /// Theoretical optimal convergence factor.
    pub dtocf: f64,
    pub omega_opt: f64,
    pub tau_opt: f64,
    /// Spectral radius of the iteration symbol at the run's parameters.
    pub rho_finite: f64,
    /// Measured factor of the static single-system iteration.
    pub apocf: Option<f64>,
    pub apocf_iterations: Option<usize>,
    /// Measured windowed convergence factor.
    pub dpocf: Option<f64>,
    pub per_window_iterations: Vec<usize>,
    pub average_iterations: Option<f64>,
    pub window_sizes: Vec<usize>,
    /// Sup norm of the last time level, for cross-run comparisons.
    pub final_sup_norm: Option<f64>,
    /// Mean absolute entry over all computed levels.
    pub solution_mean_abs: Option<f64>,
    pub status: String,
}

pub struct RunArtifacts {
    pub report: RunReport,
    pub report_path: PathBuf,
    pub history_path: PathBuf,
    pub converged: bool,
}

/// Runs the windowed iteration plus the static-iteration measurement and
/// writes `report.json` and `history.csv` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, ExperimentError> {
    let prep = prepare(cfg)?;
    let plan = WindowPlan::new(cfg.t_start, cfg.t_end, cfg.dt, cfg.windows)?;
    let outcome = execute_windowed(cfg, &prep, &plan);

    let rho_finite =
        finite_interval_radius(&prep.sys, &prep.scheme, cfg.dt, prep.omega, prep.tau)?;
    let constants = AnalyticConstants::default();
    let blocks = assemble(prep.sys.grid)?;
    let b_static = rhs_sequence(&blocks, &constants, cfg.t_start + cfg.dt, cfg.dt, 1)
        .pop()
        .expect("one level");
    let params = IterationParams::new(prep.omega, prep.tau).with_limits(cfg.max_iters, cfg.tol);
    let apocf = static_iteration(&prep.sys, prep.sigma, &params, &b_static).ok();

    let (status, histories, iterations, converged) = match &outcome {
        Ok(out) => (
            "converged".to_string(),
            out.histories.clone(),
            out.per_window_iterations.clone(),
            true,
        ),
        Err(DabsorError::MaxItersExceeded { window, .. }) => (
            format!("max-iters-exceeded in window {window}"),
            Vec::new(),
            Vec::new(),
            false,
        ),
        Err(e) => (format!("error: {e}"), Vec::new(), Vec::new(), false),
    };
    let (final_sup_norm, solution_mean_abs) = match &outcome {
        Ok(out) => {
            let last = out.levels.last().map(|z| dabsor_core::linalg::sup_norm(z));
            let total: f64 = out
                .levels
                .iter()
                .map(|z| z.iter().map(|v| v.abs()).sum::<f64>())
                .sum();
            let count: usize = out.levels.iter().map(|z| z.len()).sum();
            (last, Some(total / count.max(1) as f64))
        }
        Err(_) => (None, None),
    };
    let dpocf = if histories.is_empty() {
        None
    } else {
        measure_dpocf(&histories).ok()
    };
    let average_iterations = if iterations.is_empty() {
        None
    } else {
        Some(iterations.iter().sum::<usize>() as f64 / iterations.len() as f64)
    };

    let report = RunReport {
        config: cfg.clone(),
        sigma: prep.sigma,
        bounds: prep.bounds,
        omega: prep.omega,
        tau: prep.tau,
        in_domain: convergence_domain(prep.omega, prep.tau, &prep.bounds),
        dtocf: prep.optimal.rho_opt,
        omega_opt: prep.optimal.omega_opt,
        tau_opt: prep.optimal.tau_opt,
        rho_finite,
        apocf: apocf.as_ref().map(|o| o.measured_factor),
        apocf_iterations: apocf.as_ref().map(|o| o.iterations),
        dpocf,
        per_window_iterations: iterations,
        average_iterations,
        window_sizes: plan.window_sizes.clone(),
        final_sup_norm,
        solution_mean_abs,
        status,
    };

    fs::create_dir_all(&cfg.out)?;
    let report_path = cfg.out.join("report.json");
    fs::write(&report_path, serde_json::to_string_pretty(&report).expect("serializable"))?;
    let history_path = cfg.out.join("history.csv");
    let mut csv = fs::File::create(&history_path)?;
    writeln!(csv, "window,iteration,epsilon")?;
    for (w, history) in histories.iter().enumerate() {
        for (k, eps) in history.iter().enumerate() {
            writeln!(csv, "{w},{k},{eps}")?;
        }
    }

    Ok(RunArtifacts {
        report,
        report_path,
        history_path,
        converged,
    })
}

/// Windowed run wired with the standard starting values and initial waves.
pub fn execute_windowed(
    cfg: &ExperimentConfig,
    prep: &PreparedRun,
    plan: &WindowPlan,
) -> Result<WindowedOutcome, DabsorError> {
    let constants = AnalyticConstants::default();
    let nu = prep.scheme.order();
    let start: Vec<Vec<f64>> = (0..nu)
        .map(|k| {
            sample_state(
                &prep.sys.grid,
                cfg.t_start - (nu - 1 - k) as f64 * cfg.dt,
                &constants,
            )
        })
        .collect();
    let blocks = assemble(prep.sys.grid).expect("validated grid");
    let rhs = rhs_sequence(
        &blocks,
        &constants,
        cfg.t_start + cfg.dt,
        cfg.dt,
        plan.total_levels,
    );
    let params = IterationParams::new(prep.omega, prep.tau).with_limits(cfg.max_iters, cfg.tol);
    dabsor_windowed(&prep.sys, &prep.scheme, &params, plan, &start, &rhs, |t| {
        initial_wave(&prep.sys.grid, &constants, t)
    })
}

/// MatrixMarket export of the assembled blocks.
pub fn export_matrices(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, ExperimentError> {
    let prep = prepare(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let mut written = Vec::new();
    for (name, matrix) in [("A", &prep.sys.a), ("B", &prep.sys.b), ("Q", &prep.sys.q)] {
        let path = cfg.out.join(format!("{name}.mtx"));
        let file = fs::File::create(&path)?;
        dabsor_core::stokes::write_matrix_market(matrix, std::io::BufWriter::new(file))?;
        written.push(path);
    }
    Ok(written)
}

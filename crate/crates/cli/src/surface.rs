//! Spectral-radius surface generation over the (omega, tau) plane.

use std::fs;
use std::path::PathBuf;

use dabsor_core::spectral::sweep_surface;

use crate::config::ExperimentConfig;
use crate::experiment::{prepare, ExperimentError};

pub struct SurfaceResult {
    pub csv: String,
    pub path: PathBuf,
    /// Smallest radius over the solvable sweep points.
    pub min_rho: Option<f64>,
}

/// Sweeps the convergence-domain rectangle and writes `surface.csv` with
/// 17-significant-digit rendering; unsolvable points keep an empty rho cell.
pub fn emit_surface(cfg: &ExperimentConfig) -> Result<SurfaceResult, ExperimentError> {
    let prep = prepare(cfg)?;
    // tau capped by the sufficient domain at omega = 1
    let tau_hi = 2.0
        * prep.bounds.eta_min
        * prep.bounds.mu_min
        * (1.0 + prep.bounds.sigma / prep.bounds.eta_max);
    let omega_range = (0.05, 1.95);
    let tau_range = (0.01 * tau_hi, tau_hi);
    let points = sweep_surface(
        &prep.sys,
        &prep.scheme,
        cfg.dt,
        omega_range,
        tau_range,
        cfg.resolution,
    )?;

    let mut csv = String::from("omega,tau,rho,solvable\n");
    let mut min_rho: Option<f64> = None;
    for p in &points {
        match p.rho {
            Some(rho) => {
                min_rho = Some(min_rho.map_or(rho, |m: f64| m.min(rho)));
                csv.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},true\n",
                    p.omega, p.tau, rho
                ));
            }
            None => {
                csv.push_str(&format!("{:.16e},{:.16e},,false\n", p.omega, p.tau));
            }
        }
    }

    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("surface.csv");
    fs::write(&path, &csv)?;
    Ok(SurfaceResult { csv, path, min_rho })
}

//! The waveform relaxation solver: per-window sweeps of the two-stage
//! relaxed block solve, the windowing driver, the monolithic reference
//! time-stepper used by the stopping criterion, the static single-system
//! iteration, and the convergence-factor measurements.

use std::fmt;

use crate::bdf::BdfScheme;
use crate::linalg::{sup_distance, sup_norm, Cholesky, LinalgError, Lu, Matrix};
use crate::stokes::StokesSystem;

#[derive(Debug, Clone, PartialEq)]
pub enum DabsorError {
    /// Window iteration hit the sweep cap; carries the partial result.
    MaxItersExceeded {
        window: usize,
        outcome: Box<WindowOutcome>,
    },
    /// The per-level block system is singular for these parameters.
    NotSolvable,
    /// Stopping metric denominator underflowed.
    ZeroReference,
    /// The monolithic per-level saddle matrix failed to factor.
    SingularSystem,
    /// Convergence-factor measurement got an empty error history.
    EmptyHistory,
    InvalidPlan(String),
    Linalg(LinalgError),
}

impl fmt::Display for DabsorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DabsorError::MaxItersExceeded { window, outcome } => write!(
                f,
                "window {window} did not converge in {} sweeps",
                outcome.iterations
            ),
            DabsorError::NotSolvable => write!(f, "per-level block system is singular"),
            DabsorError::ZeroReference => write!(f, "reference solution is identically zero"),
            DabsorError::SingularSystem => write!(f, "monolithic saddle matrix is singular"),
            DabsorError::EmptyHistory => write!(f, "empty error history"),
            DabsorError::InvalidPlan(msg) => write!(f, "invalid window plan: {msg}"),
            DabsorError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DabsorError {}

impl From<LinalgError> for DabsorError {
    fn from(e: LinalgError) -> Self {
        DabsorError::Linalg(e)
    }
}

/// Relaxation parameters and iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationParams {
    pub omega: f64,
    pub tau: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl IterationParams {
    pub fn new(omega: f64, tau: f64) -> Self {
        Self {
            omega,
            tau,
            max_iters: 800,
            tol: 1e-6,
        }
    }

    pub fn with_limits(mut self, max_iters: usize, tol: f64) -> Self {
        assert!(max_iters >= 1 && tol >= 0.0);
        self.max_iters = max_iters;
        self.tol = tol;
        self
    }
}

/// One window of per-time-level state vectors plus the values that seeded it.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSequence {
    pub start_values: Vec<Vec<f64>>,
    pub levels: Vec<Vec<f64>>,
}

/// Result of one window solve.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutcome {
    pub sequence: WaveSequence,
    pub iterations: usize,
    /// Relative sup-norm error vs. the reference, entry 0 before any sweep.
    pub history: Vec<f64>,
}

/// Equal split of the simulation interval into windows, remainder on the last.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub total_levels: usize,
    pub window_sizes: Vec<usize>,
}

impl WindowPlan {
    pub fn new(t_start: f64, t_end: f64, dt: f64, windows: usize) -> Result<Self, DabsorError> {
        if !(dt > 0.0) {
            return Err(DabsorError::InvalidPlan(format!("dt = {dt} must be positive")));
        }
        if !(t_end > t_start) {
            return Err(DabsorError::InvalidPlan(format!(
                "empty interval ({t_start}, {t_end}]"
            )));
        }
        if windows == 0 {
            return Err(DabsorError::InvalidPlan("need at least one window".into()));
        }
        let span = t_end - t_start;
        let total = (span / dt).round() as usize;
        if total == 0 || (total as f64 * dt - span).abs() > 1e-8 * span.max(1.0) {
            return Err(DabsorError::InvalidPlan(format!(
                "dt = {dt} does not tile ({t_start}, {t_end}]"
            )));
        }
        if windows > total {
            return Err(DabsorError::InvalidPlan(format!(
                "{windows} windows over {total} levels leaves empty windows"
            )));
        }
        let base = total / windows;
        let mut sizes = vec![base; windows];
        *sizes.last_mut().unwrap() += total - base * windows;
        Ok(Self {
            t_start,
            t_end,
            dt,
            total_levels: total,
            window_sizes: sizes,
        })
    }

    /// Time of global level `n` (0-based; level n lives at t_start + (n+1) dt).
    pub fn level_time(&self, n: usize) -> f64 {
        self.t_start + (n as f64 + 1.0) * self.dt
    }
}

/// True iff the two relaxed per-level blocks admit Cholesky factors, which
/// is how the discrete solvability condition is probed here.
pub fn check_solvability(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    omega: f64,
) -> bool {
    velocity_block(sys, scheme, dt, omega)
        .ok()
        .and_then(|m| Cholesky::factor(&m).ok())
        .is_some()
        && Cholesky::factor(&sys.q).is_ok()
}

fn velocity_block(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    omega: f64,
) -> Result<Matrix, DabsorError> {
    if omega == 0.0 || dt <= 0.0 {
        return Err(DabsorError::NotSolvable);
    }
    let lead = scheme.alpha_lead() / dt;
    let scale = scheme.beta_lead() / omega;
    let mut m = sys.a.scaled(scale);
    for i in 0..sys.nvel {
        m[(i, i)] += lead;
    }
    Ok(m)
}

/// Relative sup-norm distance between an iterate and the reference over a
/// window, all three field blocks included in both sups.
pub fn stopping_metric(
    iterate: &[Vec<f64>],
    reference: &[Vec<f64>],
) -> Result<f64, DabsorError> {
    assert_eq!(iterate.len(), reference.len(), "window length mismatch");
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for (z, zref) in iterate.iter().zip(reference) {
        num = num.max(sup_distance(z, zref));
        den = den.max(sup_norm(zref));
    }
    if den < f64::MIN_POSITIVE {
        return Err(DabsorError::ZeroReference);
    }
    Ok(num / den)
}

fn metric_or_absolute(iterate: &[Vec<f64>], reference: &[Vec<f64>]) -> f64 {
    match stopping_metric(iterate, reference) {
        Ok(e) => e,
        // all-zero reference: fall back to the absolute sup norm
        Err(_) => iterate
            .iter()
            .zip(reference)
            .fold(0.0, |m, (z, r)| m.max(sup_distance(z, r))),
    }
}

struct LevelView<'a> {
    start_values: &'a [Vec<f64>],
    levels: &'a [Vec<f64>],
}

impl<'a> LevelView<'a> {
    /// Combined index into start values (0..nu) then window levels.
    fn get(&self, idx: usize) -> &'a [f64] {
        let nu = self.start_values.len();
        if idx < nu {
            &self.start_values[idx]
        } else {
            &self.levels[idx - nu]
        }
    }
}

/// One window of the waveform relaxation iteration.
///
/// Sweeps k = 1, 2, ... over all `rhs.len()` levels; each level does the
/// relaxed velocity solve against the previous iterate followed by the
/// preconditioned pressure update against the fresh velocity. Both block
/// matrices are factored once and reused across levels and sweeps. Stops
/// when the window error against `reference` drops below `params.tol`.
#[allow(clippy::too_many_arguments)]
pub fn dabsor_window(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    params: &IterationParams,
    start_values: &[Vec<f64>],
    initial_iterate: &[Vec<f64>],
    rhs: &[Vec<f64>],
    reference: &[Vec<f64>],
) -> Result<WindowOutcome, DabsorError> {
    let nu = scheme.order();
    let r = sys.nvel;
    let l = sys.npres;
    let dim = r + l;
    let levels = rhs.len();
    assert_eq!(start_values.len(), nu, "need nu start values");
    assert_eq!(initial_iterate.len(), levels);
    assert_eq!(reference.len(), levels);
    assert!(start_values.iter().all(|z| z.len() == dim));
    assert!(levels >= 1);

    if !check_solvability(sys, scheme, dt, params.omega) {
        return Err(DabsorError::NotSolvable);
    }
    let vel = Cholesky::factor(&velocity_block(sys, scheme, dt, params.omega)?)?;
    let q_chol = Cholesky::factor(&sys.q)?;

    let alpha = scheme.alpha();
    let beta = scheme.beta();
    let omega = params.omega;
    let tau = params.tau;
    let relax = 1.0 / omega - 1.0;

    let mut prev: Vec<Vec<f64>> = initial_iterate.to_vec();
    let mut cur: Vec<Vec<f64>> = initial_iterate.to_vec();
    let mut history = vec![metric_or_absolute(&prev, reference)];

    let mut rhs_x = vec![0.0; r];
    let mut rhs_y = vec![0.0; l];
    let mut q_times_y = vec![0.0; l];

    for sweep in 1..=params.max_iters {
        for n in 0..levels {
            let prev_view = LevelView { start_values, levels: &prev };
            let cur_view = LevelView { start_values, levels: &cur };

            // velocity stage
            rhs_x.iter_mut().for_each(|v| *v = 0.0);
            for (j, &bj) in beta.iter().enumerate() {
                if bj == 0.0 {
                    continue;
                }
                let zk1 = prev_view.get(n + j);
                sys.a.matvec_scaled_add(&zk1[..r], bj * relax, &mut rhs_x);
                sys.b.matvec_scaled_add(&zk1[r..], -bj, &mut rhs_x);
                if n + j >= nu {
                    let f = &rhs[n + j - nu][..r];
                    for (acc, fv) in rhs_x.iter_mut().zip(f) {
                        *acc += bj * fv;
                    }
                }
            }
            for (j, &aj) in alpha.iter().enumerate().take(nu) {
                let zk = cur_view.get(n + j);
                if aj != 0.0 {
                    let s = -aj / dt;
                    for (acc, xv) in rhs_x.iter_mut().zip(&zk[..r]) {
                        *acc += s * xv;
                    }
                }
                if beta[j] != 0.0 {
                    sys.a.matvec_scaled_add(&zk[..r], -beta[j] / omega, &mut rhs_x);
                }
            }
            vel.solve_in_place(&mut rhs_x);

            // pressure stage, using the velocity just computed at level n+nu
            rhs_y.iter_mut().for_each(|v| *v = 0.0);
            for (j, &bj) in beta.iter().enumerate() {
                if bj == 0.0 {
                    continue;
                }
                let xk: &[f64] = if j == nu { &rhs_x } else { &cur_view.get(n + j)[..r] };
                sys.b.matvec_transposed_scaled_add(xk, bj, &mut rhs_y);
                let yk1 = &prev_view.get(n + j)[r..];
                q_times_y.iter_mut().for_each(|v| *v = 0.0);
                sys.q.matvec_scaled_add(yk1, 1.0, &mut q_times_y);
                for (acc, qv) in rhs_y.iter_mut().zip(&q_times_y) {
                    *acc += bj / tau * qv;
                }
                if n + j >= nu {
                    let g = &rhs[n + j - nu][r..];
                    for (acc, gv) in rhs_y.iter_mut().zip(g) {
                        *acc += bj * gv;
                    }
                }
            }
            for (j, &bj) in beta.iter().enumerate().take(nu) {
                if bj == 0.0 {
                    continue;
                }
                let yk = &cur_view.get(n + j)[r..];
                sys.q.matvec_scaled_add(yk, -bj / tau, &mut rhs_y);
            }
            // (beta_nu / tau) Q y = rhs_y
            q_chol.solve_in_place(&mut rhs_y);
            let y_scale = tau / scheme.beta_lead();

            let level = &mut cur[n];
            level[..r].copy_from_slice(&rhs_x);
            for (dst, yv) in level[r..].iter_mut().zip(&rhs_y) {
                *dst = y_scale * yv;
            }
        }

        let eps = metric_or_absolute(&cur, reference);
        history.push(eps);
        prev.clone_from(&cur);
        if eps < params.tol {
            return Ok(WindowOutcome {
                sequence: WaveSequence {
                    start_values: start_values.to_vec(),
                    levels: cur,
                },
                iterations: sweep,
                history,
            });
        }
    }

    Err(DabsorError::MaxItersExceeded {
        window: 0,
        outcome: Box::new(WindowOutcome {
            sequence: WaveSequence {
                start_values: start_values.to_vec(),
                levels: cur,
            },
            iterations: params.max_iters,
            history,
        }),
    })
}

/// Monolithic reference: steps the fully coupled saddle system level by
/// level with one LU factorization shared across levels.
pub fn reference_solve(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    start_values: &[Vec<f64>],
    rhs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, DabsorError> {
    let nu = scheme.order();
    let r = sys.nvel;
    let l = sys.npres;
    let dim = r + l;
    assert_eq!(start_values.len(), nu);
    let alpha = scheme.alpha();
    let beta = scheme.beta();
    let bl = scheme.beta_lead();

    // ((alpha_nu/dt) I + beta_nu A, beta_nu B; -beta_nu B^T, 0)
    let mut saddle = Matrix::zeros(dim, dim);
    saddle.set_block(0, 0, &sys.a.scaled(bl));
    for i in 0..r {
        saddle[(i, i)] += scheme.alpha_lead() / dt;
    }
    saddle.set_block(0, r, &sys.b.scaled(bl));
    saddle.set_block(r, 0, &sys.b.transpose().scaled(-bl));
    let lu = Lu::factor(&saddle).map_err(|_| DabsorError::SingularSystem)?;

    let mut out: Vec<Vec<f64>> = Vec::with_capacity(rhs.len());
    let mut b = vec![0.0; dim];
    for n in 0..rhs.len() {
        b.iter_mut().for_each(|v| *v = 0.0);
        for (j, &bj) in beta.iter().enumerate() {
            if bj == 0.0 || n + j < nu {
                continue;
            }
            for (acc, src) in b.iter_mut().zip(&rhs[n + j - nu]) {
                *acc += bj * src;
            }
        }
        for j in 0..nu {
            let z: &[f64] = if n + j < nu {
                &start_values[n + j]
            } else {
                &out[n + j - nu]
            };
            // subtract ((alpha_j/dt) B_mass + beta_j A_saddle) z
            if alpha[j] != 0.0 {
                let s = -alpha[j] / dt;
                for (acc, xv) in b[..r].iter_mut().zip(&z[..r]) {
                    *acc += s * xv;
                }
            }
            if beta[j] != 0.0 {
                let bj = beta[j];
                sys.a.matvec_scaled_add(&z[..r], -bj, &mut b[..r]);
                sys.b.matvec_scaled_add(&z[r..], -bj, &mut b[..r]);
                sys.b.matvec_transposed_scaled_add(&z[..r], bj, &mut b[r..]);
            }
        }
        out.push(lu.solve(&b));
    }
    Ok(out)
}

/// Windowed run: per-window iteration counts and error histories, the start
/// values of each window carried from the previous one, and the initial
/// iterate on every window rebuilt from `initial_wave` at that window's
/// level times. Each window's stopping reference is the monolithic solve
/// seeded with the carried start values.
pub fn dabsor_windowed(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    params: &IterationParams,
    plan: &WindowPlan,
    start_values: &[Vec<f64>],
    rhs_all: &[Vec<f64>],
    initial_wave: impl Fn(f64) -> Vec<f64>,
) -> Result<WindowedOutcome, DabsorError> {
    assert_eq!(rhs_all.len(), plan.total_levels, "rhs must cover every level");
    let nu = scheme.order();
    assert_eq!(start_values.len(), nu);

    let mut carried: Vec<Vec<f64>> = start_values.to_vec();
    let mut all_levels: Vec<Vec<f64>> = Vec::with_capacity(plan.total_levels);
    let mut iterations = Vec::with_capacity(plan.window_sizes.len());
    let mut histories = Vec::with_capacity(plan.window_sizes.len());
    let mut offset = 0usize;

    for (w, &len) in plan.window_sizes.iter().enumerate() {
        let rhs_w = &rhs_all[offset..offset + len];
        let reference = reference_solve(sys, scheme, plan.dt, &carried, rhs_w)?;
        let init: Vec<Vec<f64>> = (0..len)
            .map(|n| initial_wave(plan.level_time(offset + n)))
            .collect();
        let outcome = dabsor_window(
            sys, scheme, plan.dt, params, &carried, &init, rhs_w, &reference,
        )
        .map_err(|e| match e {
            DabsorError::MaxItersExceeded { outcome, .. } => {
                DabsorError::MaxItersExceeded { window: w, outcome }
            }
            other => other,
        })?;

        iterations.push(outcome.iterations);
        histories.push(outcome.history);
        all_levels.extend(outcome.sequence.levels.iter().cloned());

        // last nu levels (padded with older carried values on short windows)
        let mut pool = carried.clone();
        pool.extend(outcome.sequence.levels);
        carried = pool.split_off(pool.len() - nu);
        offset += len;
    }

    Ok(WindowedOutcome {
        levels: all_levels,
        per_window_iterations: iterations,
        histories,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedOutcome {
    pub levels: Vec<Vec<f64>>,
    pub per_window_iterations: Vec<usize>,
    pub histories: Vec<Vec<f64>>,
}

impl WindowedOutcome {
    pub fn average_iterations(&self) -> f64 {
        let total: usize = self.per_window_iterations.iter().sum();
        total as f64 / self.per_window_iterations.len() as f64
    }
}

/// Stationary single-system iteration for (sigma B_mass + A_saddle) z = b
/// under the same splitting; the measured factor is the geometric mean of
/// the last ten error-norm ratios before the tolerance was reached.
pub struct StaticOutcome {
    pub solution: Vec<f64>,
    pub measured_factor: f64,
    pub iterations: usize,
}

pub fn static_iteration(
    sys: &StokesSystem,
    sigma: f64,
    params: &IterationParams,
    b: &[f64],
) -> Result<StaticOutcome, DabsorError> {
    let r = sys.nvel;
    let l = sys.npres;
    let dim = r + l;
    assert_eq!(b.len(), dim);
    if params.omega == 0.0 {
        return Err(DabsorError::NotSolvable);
    }

    // exact solution by direct solve of the shifted saddle system
    let mut shifted = Matrix::zeros(dim, dim);
    shifted.set_block(0, 0, &sys.a);
    for i in 0..r {
        shifted[(i, i)] += sigma;
    }
    shifted.set_block(0, r, &sys.b);
    shifted.set_block(r, 0, &sys.b.transpose().scaled(-1.0));
    let exact = Lu::factor(&shifted)
        .map_err(|_| DabsorError::SingularSystem)?
        .solve(b);
    let exact_norm = sup_norm(&exact);
    if exact_norm < f64::MIN_POSITIVE {
        return Err(DabsorError::ZeroReference);
    }

    // velocity block sigma I + A/omega
    let mut velm = sys.a.scaled(1.0 / params.omega);
    for i in 0..r {
        velm[(i, i)] += sigma;
    }
    let vel = Cholesky::factor(&velm).map_err(|_| DabsorError::NotSolvable)?;
    let q_chol = Cholesky::factor(&sys.q).map_err(|_| DabsorError::NotSolvable)?;

    let relax = 1.0 / params.omega - 1.0;
    let tau = params.tau;
    let mut z = vec![0.0; dim];
    let mut err_prev = sup_distance(&z, &exact);
    let mut ratios: Vec<f64> = Vec::new();

    for k in 1..=params.max_iters {
        let mut x = vec![0.0; r];
        sys.a.matvec_scaled_add(&z[..r], relax, &mut x);
        sys.b.matvec_scaled_add(&z[r..], -1.0, &mut x);
        for (acc, bv) in x.iter_mut().zip(&b[..r]) {
            *acc += bv;
        }
        vel.solve_in_place(&mut x);

        let mut y = vec![0.0; l];
        sys.b.matvec_transposed_scaled_add(&x, 1.0, &mut y);
        for (acc, bv) in y.iter_mut().zip(&b[r..]) {
            *acc += bv;
        }
        q_chol.solve_in_place(&mut y);
        for (dst, yv) in z[r..].iter_mut().zip(&y) {
            *dst += tau * yv;
        }
        z[..r].copy_from_slice(&x);

        let err = sup_distance(&z, &exact);
        if err_prev > 0.0 {
            ratios.push(err / err_prev);
        }
        err_prev = err;
        if err / exact_norm < params.tol {
            let tail = &ratios[ratios.len().saturating_sub(10)..];
            let factor = if tail.is_empty() {
                0.0
            } else {
                (tail.iter().map(|v| v.ln()).sum::<f64>() / tail.len() as f64).exp()
            };
            return Ok(StaticOutcome {
                solution: z,
                measured_factor: factor,
                iterations: k,
            });
        }
    }
    Err(DabsorError::MaxItersExceeded {
        window: 0,
        outcome: Box::new(WindowOutcome {
            sequence: WaveSequence {
                start_values: vec![],
                levels: vec![z],
            },
            iterations: params.max_iters,
            history: ratios,
        }),
    })
}

/// Mean over windows of the per-window geometric convergence rate
/// (eps_final / eps_initial)^(1/sweeps).
pub fn measure_dpocf(histories: &[Vec<f64>]) -> Result<f64, DabsorError> {
    if histories.is_empty() {
        return Err(DabsorError::EmptyHistory);
    }
    let mut acc = 0.0;
    for h in histories {
        if h.len() < 2 {
            return Err(DabsorError::EmptyHistory);
        }
        let first = h[0];
        let last = *h.last().unwrap();
        let sweeps = (h.len() - 1) as f64;
        if first <= 0.0 {
            return Err(DabsorError::EmptyHistory);
        }
        acc += (last / first).powf(1.0 / sweeps);
    }
    Ok(acc / histories.len() as f64)
}

//! Symbol and eigenvalue analysis of the relaxed splitting: the iteration
//! symbol K(s), its spectral radius on finite and infinite time intervals,
//! the convergence domain of the relaxation parameters, the eigenvalue
//! magnitude envelopes and the closed-form optimal parameters.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::bdf::BdfScheme;
use crate::dabsor::check_solvability;
use crate::linalg::{
    gen_eigenvalues, spectral_radius, spectral_radius_complex, sym_eig_bounds,
    symmetric_eigenvalues, CLu, CMatrix, Cholesky, LinalgError, Lu, Matrix,
};
use crate::stokes::StokesSystem;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    /// The symbol's left factor is singular at the requested point.
    SingularSymbol,
    /// A pencil eigenvalue escapes the interior of the stability region.
    StabilityViolation,
    /// The discrete solvability condition fails for these parameters.
    NotSolvable,
    /// Every locus sample landed on a symbol pole.
    EmptyLocus,
    Linalg(LinalgError),
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::SingularSymbol => write!(f, "symbol is singular at this point"),
            SpectralError::StabilityViolation => {
                write!(f, "pencil spectrum leaves the stability region interior")
            }
            SpectralError::NotSolvable => write!(f, "discrete solvability condition fails"),
            SpectralError::EmptyLocus => write!(f, "no evaluable boundary locus samples"),
            SpectralError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SpectralError {}

impl From<LinalgError> for SpectralError {
    fn from(e: LinalgError) -> Self {
        SpectralError::Linalg(e)
    }
}

/// Eigenvalue bounds of the system blocks and the derived quantities that
/// drive the convergence analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub sigma: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl SpectralBounds {
    /// Bounds from the extreme eigenvalues of A and of (B^T B)^{-1} Q.
    pub fn compute(sys: &StokesSystem, sigma: f64) -> Result<Self, SpectralError> {
        let (eta_min, eta_max) = sym_eig_bounds(&sys.a)?;
        let btb = sys.b.transpose().matmul(&sys.b).symmetrized();
        let mus = gen_eigenvalues(&sys.q, &btb)?;
        let mu_min = *mus.first().expect("nonempty spectrum");
        let mu_max = *mus.last().expect("nonempty spectrum");
        Ok(Self::from_parts(sigma, eta_min, eta_max, mu_min, mu_max))
    }

    pub fn from_parts(sigma: f64, eta_min: f64, eta_max: f64, mu_min: f64, mu_max: f64) -> Self {
        assert!(0.0 < eta_min && eta_min <= eta_max);
        assert!(0.0 < mu_min && mu_min <= mu_max);
        let (delta_min, delta_max) = if sigma >= 0.0 {
            (sigma / eta_max, sigma / eta_min)
        } else {
            (sigma / eta_min, sigma / eta_max)
        };
        Self {
            sigma,
            eta_min,
            eta_max,
            mu_min,
            mu_max,
            delta_min,
            delta_max,
            gamma_min: 1.0 / (eta_max * mu_max),
            gamma_max: 1.0 / (eta_min * mu_min),
        }
    }
}

fn real_times_cmatrix(a: &Matrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.cols(), b.rows());
    let mut out = CMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let av = a[(i, k)];
            if av == 0.0 {
                continue;
            }
            for j in 0..b.cols() {
                let add = av * b[(k, j)];
                out[(i, j)] += add;
            }
        }
    }
    out
}

fn chol_solve_cmatrix(chol: &Cholesky, b: &CMatrix) -> CMatrix {
    let n = chol.dim();
    assert_eq!(b.rows(), n);
    let mut out = CMatrix::zeros(n, b.cols());
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for j in 0..b.cols() {
        for i in 0..n {
            re[i] = b[(i, j)].re;
            im[i] = b[(i, j)].im;
        }
        chol.solve_in_place(&mut re);
        chol.solve_in_place(&mut im);
        for i in 0..n {
            out[(i, j)] = Complex64::new(re[i], im[i]);
        }
    }
    out
}

/// The iteration symbol K(s) = (s M_B + M_A)^{-1} N_A at complex s,
/// assembled through the block-triangular structure of the left factor.
pub fn symbol_k(
    sys: &StokesSystem,
    s: Complex64,
    omega: f64,
    tau: f64,
) -> Result<CMatrix, SpectralError> {
    let r = sys.nvel;
    let l = sys.npres;
    let dim = r + l;
    // left velocity block s I + A/omega
    let mut top = CMatrix::from_fn(r, r, |i, j| Complex64::new(sys.a[(i, j)] / omega, 0.0));
    for i in 0..r {
        top[(i, i)] += s;
    }
    let lu = CLu::factor(&top).map_err(|_| SpectralError::SingularSymbol)?;
    let relax = 1.0 / omega - 1.0;
    let rhs_left = sys.a.scaled(relax).to_complex();
    let rhs_right = sys.b.scaled(-1.0).to_complex();
    let k11 = lu.solve_matrix(&rhs_left);
    let k12 = lu.solve_matrix(&rhs_right);

    let q_chol = Cholesky::factor(&sys.q).map_err(|_| SpectralError::SingularSymbol)?;
    let bt = sys.b.transpose();
    let k21 = {
        let mut m = chol_solve_cmatrix(&q_chol, &real_times_cmatrix(&bt, &k11));
        scale_cmatrix(&mut m, tau);
        m
    };
    let k22 = {
        let mut m = chol_solve_cmatrix(&q_chol, &real_times_cmatrix(&bt, &k12));
        scale_cmatrix(&mut m, tau);
        for i in 0..l {
            m[(i, i)] += Complex64::new(1.0, 0.0);
        }
        m
    };

    let mut k = CMatrix::zeros(dim, dim);
    k.set_block(0, 0, &k11);
    k.set_block(0, r, &k12);
    k.set_block(r, 0, &k21);
    k.set_block(r, r, &k22);
    Ok(k)
}

fn scale_cmatrix(m: &mut CMatrix, s: f64) {
    for i in 0..m.rows() {
        for v in m.row_mut(i) {
            *v *= s;
        }
    }
}

/// Real-arithmetic variant of `symbol_k` for real s.
pub fn symbol_k_real(
    sys: &StokesSystem,
    s: f64,
    omega: f64,
    tau: f64,
) -> Result<Matrix, SpectralError> {
    let r = sys.nvel;
    let l = sys.npres;
    let dim = r + l;
    let mut top = sys.a.scaled(1.0 / omega);
    for i in 0..r {
        top[(i, i)] += s;
    }
    let lu = Lu::factor(&top).map_err(|_| SpectralError::SingularSymbol)?;
    let relax = 1.0 / omega - 1.0;
    let k11 = lu.solve_matrix(&sys.a.scaled(relax));
    let k12 = lu.solve_matrix(&sys.b.scaled(-1.0));

    let q_chol = Cholesky::factor(&sys.q).map_err(|_| SpectralError::SingularSymbol)?;
    let bt = sys.b.transpose();
    let k21 = q_chol.solve_matrix(&bt.matmul(&k11)).scaled(tau);
    let mut k22 = q_chol.solve_matrix(&bt.matmul(&k12)).scaled(tau);
    for i in 0..l {
        k22[(i, i)] += 1.0;
    }

    let mut k = Matrix::zeros(dim, dim);
    k.set_block(0, 0, &k11);
    k.set_block(0, r, &k12);
    k.set_block(r, 0, &k21);
    k.set_block(r, r, &k22);
    Ok(k)
}

/// rho(K(sigma)) with sigma the stiff limit point of the scheme: the
/// spectral radius of the iteration on a finite time interval.
pub fn finite_interval_radius(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    omega: f64,
    tau: f64,
) -> Result<f64, SpectralError> {
    if !check_solvability(sys, scheme, dt, omega) {
        return Err(SpectralError::NotSolvable);
    }
    let sigma = scheme.sigma(dt);
    let k = symbol_k_real(sys, sigma, omega, tau)?;
    Ok(spectral_radius(&k)?)
}

/// Max entrywise deviation between the time-discrete symbol assembled from
/// the multistep polynomials and K evaluated at (a/b)(s)/dt. The first route
/// goes through a full LU of the stacked left factor, independent of the
/// block path in `symbol_k`.
pub fn laplace_relation_check(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    omega: f64,
    tau: f64,
    s: Complex64,
) -> Result<f64, SpectralError> {
    let r = sys.nvel;
    let l = sys.npres;
    let dim = r + l;
    let a_s = scheme.poly_a(s);
    let b_s = scheme.poly_b(s);
    if b_s.norm() == 0.0 {
        return Err(SpectralError::SingularSymbol);
    }
    let w = a_s / (dt * b_s);

    let dtb = dt * b_s;
    let mut left = CMatrix::zeros(dim, dim);
    for i in 0..r {
        for j in 0..r {
            left[(i, j)] = dtb * (sys.a[(i, j)] / omega);
        }
        left[(i, i)] += a_s;
    }
    for i in 0..l {
        for j in 0..r {
            left[(r + i, j)] = dtb * (-sys.b[(j, i)]);
        }
        for j in 0..l {
            left[(r + i, r + j)] = dtb * (sys.q[(i, j)] / tau);
        }
    }
    let mut right = CMatrix::zeros(dim, dim);
    let relax = 1.0 / omega - 1.0;
    for i in 0..r {
        for j in 0..r {
            right[(i, j)] = dtb * (relax * sys.a[(i, j)]);
        }
        for j in 0..l {
            right[(i, r + j)] = dtb * (-sys.b[(i, j)]);
        }
    }
    for i in 0..l {
        for j in 0..l {
            right[(r + i, r + j)] = dtb * (sys.q[(i, j)] / tau);
        }
    }
    let lu = CLu::factor(&left).map_err(|_| SpectralError::SingularSymbol)?;
    let k_dt = lu.solve_matrix(&right);

    let k = symbol_k(sys, w, omega, tau)?;
    Ok(k_dt.max_abs_diff(&k))
}

/// Spectral radius of the iteration on the infinite time interval: the max
/// of rho(K(s)) over the sampled boundary locus of the stability region.
/// Locus samples within 1e-8 of a symbol pole are skipped.
pub fn infinite_interval_radius(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    omega: f64,
    tau: f64,
    samples: usize,
) -> Result<f64, SpectralError> {
    assert!(samples >= 4);
    if !check_solvability(sys, scheme, dt, omega) {
        return Err(SpectralError::NotSolvable);
    }
    // pencil spectrum: eigenvalues of -dt A / omega must sit strictly inside
    // the stability region (the pressure block contributes infinity, which
    // BDF regions contain)
    let etas = symmetric_eigenvalues(&sys.a)?;
    for &eta in &etas {
        let mu = Complex64::new(-dt * eta / omega, 0.0);
        if !scheme.stability_region_contains_interior(mu)? {
            return Err(SpectralError::StabilityViolation);
        }
    }
    let poles: Vec<f64> = etas.iter().map(|&eta| -eta / omega).collect();

    let mut best: f64 = 0.0;
    let mut evaluated = 0usize;
    for m in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / samples as f64;
        let z = Complex64::new(theta.cos(), theta.sin());
        let b_z = scheme.poly_b(z);
        if b_z.norm() < 1e-14 {
            continue;
        }
        let s = scheme.poly_a(z) / b_z / dt;
        if poles
            .iter()
            .any(|&p| (s - Complex64::new(p, 0.0)).norm() < 1e-8)
        {
            continue;
        }
        let k = match symbol_k(sys, s, omega, tau) {
            Ok(k) => k,
            Err(SpectralError::SingularSymbol) => continue,
            Err(e) => return Err(e),
        };
        best = best.max(spectral_radius_complex(&k)?);
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(SpectralError::EmptyLocus);
    }
    Ok(best)
}

/// Sufficient convergence domain of (omega, tau), split by the sign pattern
/// of sigma against the eigenvalue range of A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DomainCase {
    NonNegative,
    SmallNegative,
    LargeNegative,
    Uncovered,
}

pub fn domain_case(bounds: &SpectralBounds) -> DomainCase {
    let s_over_min = bounds.sigma / bounds.eta_min;
    let s_over_max = bounds.sigma / bounds.eta_max;
    if s_over_max >= 0.0 {
        DomainCase::NonNegative
    } else if s_over_min > -1.0 {
        DomainCase::SmallNegative
    } else if s_over_max < -1.0 {
        DomainCase::LargeNegative
    } else {
        DomainCase::Uncovered
    }
}

/// True iff (omega, tau) lies in the sufficient convergence domain.
pub fn convergence_domain(omega: f64, tau: f64, bounds: &SpectralBounds) -> bool {
    let two_em = 2.0 * bounds.eta_min * bounds.mu_min;
    match domain_case(bounds) {
        DomainCase::NonNegative => {
            let cap = two_em * (2.0 / omega + bounds.sigma / bounds.eta_max - 1.0);
            0.0 < omega && omega < 2.0 && 0.0 < tau && tau < cap
        }
        DomainCase::SmallNegative => {
            let cap = two_em * (2.0 / omega + bounds.sigma / bounds.eta_min - 1.0);
            let omega_cap = 2.0 * bounds.eta_min / (bounds.eta_min - bounds.sigma);
            0.0 < omega && omega < omega_cap && 0.0 < tau && tau < cap
        }
        DomainCase::LargeNegative => {
            let floor = two_em * (2.0 / omega + bounds.sigma / bounds.eta_max - 1.0);
            let omega_floor = 2.0 * bounds.eta_max / (bounds.eta_max - bounds.sigma);
            omega_floor < omega && omega < 2.0 && floor < tau && tau < 0.0
        }
        DomainCase::Uncovered => false,
    }
}

/// |lambda| of the dominant root of the eigenvalue quadratic
/// lambda^2 + phi lambda + psi at the given Rayleigh pair (gamma, delta):
/// the two real-root magnitudes when the discriminant is positive, otherwise
/// sqrt(psi) for the conjugate pair.
pub fn envelope_magnitude(omega: f64, tau: f64, gamma: f64, delta: f64) -> f64 {
    let denom = 1.0 + omega * delta;
    let t = 2.0 - omega + omega * delta - tau * omega * gamma;
    let disc = t * t - 4.0 * (1.0 - omega) * denom;
    if disc <= 0.0 {
        ((1.0 - omega) / denom).max(0.0).sqrt()
    } else {
        let root = disc.sqrt();
        let r1 = (t + root) / (2.0 * denom);
        let r2 = (t - root) / (2.0 * denom);
        r1.abs().max(r2.abs())
    }
}

/// Point on the optimal parameter curve and the curve-invariant factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalResult {
    pub delta_star: f64,
    pub omega_opt: f64,
    pub tau_opt: f64,
    pub rho_opt: f64,
    /// Set when the delta interval collapsed (scalar-like A).
    pub degenerate: bool,
}

/// Closed-form optimal parameters at a chosen point of the optimal curve.
///
/// Defaults to the delta_min end of the curve: that is where the resulting
/// (omega_opt, tau_opt) stays inside the sufficient convergence domain and
/// where the measured radius over the curve is smallest.
pub fn optimal_params(bounds: &SpectralBounds, delta_star: Option<f64>) -> OptimalResult {
    assert!(bounds.sigma > 0.0, "optimality analysis requires sigma > 0");
    let degenerate = bounds.delta_min >= bounds.delta_max;
    let delta = match delta_star {
        _ if degenerate => bounds.delta_min,
        None => bounds.delta_min,
        Some(d) => {
            assert!(
                bounds.delta_min <= d && d <= bounds.delta_max,
                "delta_star {d} outside [{}, {}]",
                bounds.delta_min,
                bounds.delta_max
            );
            d
        }
    };
    let sqrt_g = (bounds.gamma_min * bounds.gamma_max).sqrt();
    let tau_opt = (delta + 1.0) / sqrt_g;
    let omega_opt = 4.0 * sqrt_g
        / ((delta + 1.0) * (bounds.gamma_min + bounds.gamma_max) - 2.0 * (delta - 1.0) * sqrt_g);
    let rho_opt = (bounds.gamma_max.sqrt() - bounds.gamma_min.sqrt())
        / (bounds.gamma_max.sqrt() + bounds.gamma_min.sqrt());
    OptimalResult {
        delta_star: delta,
        omega_opt,
        tau_opt,
        rho_opt,
        degenerate,
    }
}

/// One cell of a parameter sweep; `rho` is absent where the solvability
/// probe fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub omega: f64,
    pub tau: f64,
    pub rho: Option<f64>,
}

/// Row-major grid (omega outer, tau inner) of finite-interval radii.
pub fn sweep_surface(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    omega_range: (f64, f64),
    tau_range: (f64, f64),
    resolution: usize,
) -> Result<Vec<SweepPoint>, SpectralError> {
    assert!(resolution >= 2, "need at least a 2x2 sweep");
    assert!(omega_range.0 > 0.0 && omega_range.1 > omega_range.0);
    assert!(tau_range.0 > 0.0 && tau_range.1 > tau_range.0);
    let steps = (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        let omega = omega_range.0 + (omega_range.1 - omega_range.0) * i as f64 / steps;
        for j in 0..resolution {
            let tau = tau_range.0 + (tau_range.1 - tau_range.0) * j as f64 / steps;
            let rho = if check_solvability(sys, scheme, dt, omega) {
                Some(finite_interval_radius(sys, scheme, dt, omega, tau)?)
            } else {
                None
            };
            out.push(SweepPoint { omega, tau, rho });
        }
    }
    Ok(out)
}

/// Everything the analysis can say about one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub sigma: f64,
    pub bounds: SpectralBounds,
    pub omega: f64,
    pub tau: f64,
    pub rho_finite: f64,
    pub in_domain: bool,
    pub domain_case: DomainCase,
    pub optimal: OptimalResult,
    /// omega sigma / tau stays away from the spectrum of Q^{-1} B^T B.
    pub assumption_shift_off_spectrum: bool,
    /// The quadratic form theta(omega) stays non-positive on the regions
    /// where the increasing-envelope argument needs it.
    pub assumption_theta_nonpositive: bool,
}

impl SpectralReport {
    pub fn compute(
        sys: &StokesSystem,
        scheme: &BdfScheme,
        dt: f64,
        omega: f64,
        tau: f64,
    ) -> Result<Self, SpectralError> {
        let sigma = scheme.sigma(dt);
        let bounds = SpectralBounds::compute(sys, sigma)?;
        let rho_finite = finite_interval_radius(sys, scheme, dt, omega, tau)?;
        let optimal = optimal_params(&bounds, None);
        let btb = sys.b.transpose().matmul(&sys.b).symmetrized();
        let pencil = gen_eigenvalues(&btb, &sys.q)?;
        let shift = omega * sigma / tau;
        let scale = pencil.iter().fold(shift.abs(), |m, v| m.max(v.abs()));
        let off_spectrum = pencil.iter().all(|v| (v - shift).abs() > 1e-8 * scale);
        Ok(Self {
            sigma,
            bounds,
            omega,
            tau,
            rho_finite,
            in_domain: convergence_domain(omega, tau, &bounds),
            domain_case: domain_case(&bounds),
            optimal,
            assumption_shift_off_spectrum: off_spectrum,
            assumption_theta_nonpositive: theta_assumption_holds(omega, tau, &bounds),
        })
    }
}

/// theta(omega) as displayed in the monotonicity analysis.
pub fn theta_form(omega: f64, tau: f64, gamma: f64, delta: f64) -> f64 {
    let eta = tau * gamma - delta + 1.0;
    delta * ((eta * eta + 4.0 * delta) * eta - delta * (delta - 1.0) * (delta - 1.0)) * omega
        * omega
        - 2.0 * delta * (eta + tau * gamma) * tau * gamma * omega
        - 4.0 * tau * tau * gamma * gamma
}

fn theta_region_applies(omega: f64, tau: f64, gamma: f64, delta: f64) -> bool {
    let tg = tau * gamma;
    let eta = tg - delta + 1.0;
    let omega_split = 4.0 * tg / (eta * eta + 4.0 * delta);
    if delta > 1.0 {
        let region1 = omega > omega_split && tg < delta - 1.0;
        let region2 =
            eta > 0.0 && omega > omega_split && omega < 2.0 / eta && tg > delta - 1.0 && tg < delta + 1.0;
        region1 || region2
    } else if delta > 0.0 {
        eta > 0.0 && omega > omega_split && omega < 2.0 / eta && tg > 0.0 && tg < delta + 1.0
    } else {
        false
    }
}

/// Checks theta(omega) <= 0 wherever the region conditions apply, over the
/// four (gamma, delta) bound corners.
pub fn theta_assumption_holds(omega: f64, tau: f64, bounds: &SpectralBounds) -> bool {
    for gamma in [bounds.gamma_min, bounds.gamma_max] {
        for delta in [bounds.delta_min, bounds.delta_max] {
            if theta_region_applies(omega, tau, gamma, delta)
                && theta_form(omega, tau, gamma, delta) > 0.0
            {
                return false;
            }
        }
    }
    true
}

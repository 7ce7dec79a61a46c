//! Shared oracle machinery for the integration tests: explicit splitting
//! matrices, the stacked block-Toeplitz window operator, and a polynomial
//! root finder for characteristic-polynomial cross-checks. Everything here
//! is built from first principles, independent of the solver's block paths.

#![allow(dead_code)]

use dabsor_core::bdf::BdfScheme;
use dabsor_core::linalg::{Lu, Matrix};
use dabsor_core::stokes::StokesSystem;
use num_complex::Complex64;

/// Mass-side splitting block M_B = diag(I_r, 0).
pub fn mass_matrix(sys: &StokesSystem) -> Matrix {
    let dim = sys.dim();
    let mut m = Matrix::zeros(dim, dim);
    for i in 0..sys.nvel {
        m[(i, i)] = 1.0;
    }
    m
}

/// Full saddle matrix [[A, B], [-B^T, 0]].
pub fn saddle_matrix(sys: &StokesSystem) -> Matrix {
    let dim = sys.dim();
    let r = sys.nvel;
    let mut m = Matrix::zeros(dim, dim);
    m.set_block(0, 0, &sys.a);
    m.set_block(0, r, &sys.b);
    m.set_block(r, 0, &sys.b.transpose().scaled(-1.0));
    m
}

/// Splitting left factor M_A = [[A/omega, 0], [-B^T, Q/tau]].
pub fn splitting_m(sys: &StokesSystem, omega: f64, tau: f64) -> Matrix {
    let dim = sys.dim();
    let r = sys.nvel;
    let mut m = Matrix::zeros(dim, dim);
    m.set_block(0, 0, &sys.a.scaled(1.0 / omega));
    m.set_block(r, 0, &sys.b.transpose().scaled(-1.0));
    m.set_block(r, r, &sys.q.scaled(1.0 / tau));
    m
}

/// Splitting right factor N_A = [[(1/omega - 1)A, -B], [0, Q/tau]].
pub fn splitting_n(sys: &StokesSystem, omega: f64, tau: f64) -> Matrix {
    let dim = sys.dim();
    let r = sys.nvel;
    let mut m = Matrix::zeros(dim, dim);
    m.set_block(0, 0, &sys.a.scaled(1.0 / omega - 1.0));
    m.set_block(0, r, &sys.b.scaled(-1.0));
    m.set_block(r, r, &sys.q.scaled(1.0 / tau));
    m
}

/// Stacked window matrices (C, D): L x L block lower triangular Toeplitz
/// with blocks C_j = (alpha_j/dt) M_B + beta_j M_A and D_j = beta_j N_A on
/// diagonal offset nu - j.
pub fn stacked_window_matrices(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    omega: f64,
    tau: f64,
    levels: usize,
) -> (Matrix, Matrix) {
    let dim = sys.dim();
    let nu = scheme.order();
    let m_b = mass_matrix(sys);
    let m_a = splitting_m(sys, omega, tau);
    let n_a = splitting_n(sys, omega, tau);
    let mut c = Matrix::zeros(dim * levels, dim * levels);
    let mut d = Matrix::zeros(dim * levels, dim * levels);
    for row in 0..levels {
        for j in 0..=nu {
            if row + j < nu || row + j - nu >= levels {
                continue;
            }
            let col = row + j - nu;
            let cj = m_b
                .scaled(scheme.alpha()[j] / dt)
                .add(&m_a.scaled(scheme.beta()[j]));
            let dj = n_a.scaled(scheme.beta()[j]);
            c.set_block(row * dim, col * dim, &cj);
            d.set_block(row * dim, col * dim, &dj);
        }
    }
    (c, d)
}

/// W = C^{-1} D of the stacked window operator, by dense LU.
pub fn stacked_iteration_matrix(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    omega: f64,
    tau: f64,
    levels: usize,
) -> Matrix {
    let (c, d) = stacked_window_matrices(sys, scheme, dt, omega, tau, levels);
    Lu::factor(&c).expect("stacked C factors").solve_matrix(&d)
}

/// Spectral radius of the stacked operator. The matrix is block lower
/// triangular, so its spectrum equals that of the diagonal block; eigensolve
/// on the extracted block avoids the accuracy loss a QR run on the
/// (defective) stacked matrix would incur. The block-triangular Toeplitz
/// structure of W itself is asserted first.
pub fn stacked_spectral_radius(
    sys: &StokesSystem,
    scheme: &BdfScheme,
    dt: f64,
    omega: f64,
    tau: f64,
    levels: usize,
) -> f64 {
    let dim = sys.dim();
    let w = stacked_iteration_matrix(sys, scheme, dt, omega, tau, levels);
    let scale = w.max_abs();
    let mut diag = Matrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            diag[(i, j)] = w[(i, j)];
        }
    }
    for row in 0..levels {
        for col in 0..levels {
            for i in 0..dim {
                for j in 0..dim {
                    let v = w[(row * dim + i, col * dim + j)];
                    if col > row {
                        assert!(
                            v.abs() <= 1e-10 * scale,
                            "stacked operator not block lower triangular"
                        );
                    } else if row - col == 0 {
                        assert!(
                            (v - diag[(i, j)]).abs() <= 1e-9 * scale,
                            "stacked operator not block Toeplitz"
                        );
                    }
                }
            }
        }
    }
    dabsor_core::linalg::spectral_radius(&diag).expect("diagonal block eigensolve")
}

/// Characteristic polynomial coefficients (monic, ascending powers) by the
/// Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    assert!(m.is_square());
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut bk = Matrix::identity(n);
    for k in 1..=n {
        bk = m.matmul(&bk);
        let trace: f64 = (0..n).map(|i| bk[(i, i)]).sum();
        let c = -trace / k as f64;
        coeffs[n - k] = c;
        for i in 0..n {
            bk[(i, i)] += c;
        }
    }
    coeffs
}

/// Durand-Kerner simultaneous root iteration on a monic polynomial given by
/// ascending coefficients (last entry 1).
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    assert!((coeffs[n] - 1.0).abs() < 1e-12, "polynomial must be monic");
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..500 {
        let mut shift = 0.0_f64;
        let prev = roots.clone();
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= prev[i] - prev[j];
                }
            }
            let delta = eval(prev[i]) / denom;
            roots[i] = prev[i] - delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-14 {
            break;
        }
    }
    roots
}

/// Deterministic xorshift generator for tests that do not pull in rand.
pub struct TinyRng(u64);

impl TinyRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

//! Oracle helpers for the acceptance suite, independent of the solver's
//! internal assembly paths: explicit splitting matrices, the stacked window
//! operator, and a deterministic generator for sampled checks.

#![allow(dead_code)]

use dabsor_core::bdf::BdfScheme;
use dabsor_core::linalg::{Lu, Matrix};
use dabsor_core::stokes::StokesSystem;

pub fn mass_matrix(sys: &StokesSystem) -> Matrix {
    let dim = sys.dim();
    let mut m = Matrix::zeros(dim, dim);
    for i in 0..sys.nvel {
        m[(i, i)] = 1.0;
    }
    m
}

pub fn splitting_m(sys: &StokesSystem, omega: f64, tau: f64) -> Matrix {
    let dim = sys.dim();
    let r = sys.nvel;
    let mut m = Matrix::zeros(dim, dim);
    m.set_block(0, 0, &sys.a.scaled(1.0 / omega));
    m.set_block(r, 0, &sys.b.transpose().scaled(-1.0));
    m.set_block(r, r, &sys.q.scaled(1.0 / tau));
    m
}

pub fn splitting_n(sys: &StokesSystem, omega: f64, tau: f64) -> Matrix {
    let dim = sys.dim();
    let r = sys.nvel;
    let mut m = Matrix::zeros(dim, dim);
    m.set_block(0, 0, &sys.a.scaled(1.0 / omega - 1.0));
    m.set_block(0, r, &sys.b.scaled(-1.0));
    m.set_block(r, r, &sys.q.scaled(1.0 / tau));
    m
}

/// Stacked L x L block lower triangular Toeplitz window matrices (C, D).
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

/// Spectral radius of the stacked window operator. The LU-computed operator
/// is verified to be block lower triangular Toeplitz, so its spectrum is
/// that of the diagonal block, which a dense QR run resolves accurately
/// (the stacked matrix itself is defective and would not).
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
                        assert!(v.abs() <= 1e-10 * scale, "not block lower triangular");
                    } else if row == col {
                        assert!((v - diag[(i, j)]).abs() <= 1e-9 * scale, "not block Toeplitz");
                    }
                }
            }
        }
    }
    dabsor_core::linalg::spectral_radius(&diag).expect("diagonal block eigensolve")
}

/// Deterministic xorshift generator.
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

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

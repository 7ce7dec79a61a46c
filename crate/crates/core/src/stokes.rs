//! Finite-difference building blocks for the 2-D time-dependent Stokes
//! problem on [-1,1]^2: the saddle-structured DAE blocks A and B, the Schur
//! complement preconditioners, the closed-form reference solution and the
//! manufactured right-hand sides that make it the exact semi-discrete
//! solution.
//!
//! Discretization: collocated interior grid, centered differences for the
//! Laplacian, forward differences for the pressure gradient and backward
//! differences for the divergence, so the divergence block is exactly -B^T.
//! Unknown ordering is u then v then p, each lexicographic with x fastest.

use std::fmt;
use std::io::Write;

use crate::linalg::{Cholesky, LinalgError, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub enum StokesError {
    GridTooSmall { nx: usize, ny: usize },
    NotSpd(&'static str),
    Linalg(LinalgError),
}

impl fmt::Display for StokesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StokesError::GridTooSmall { nx, ny } => {
                write!(f, "grid too small: {nx}x{ny} interior points (need >= 2 each)")
            }
            StokesError::NotSpd(what) => write!(f, "{what} is not positive definite"),
            StokesError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for StokesError {}

impl From<LinalgError> for StokesError {
    fn from(e: LinalgError) -> Self {
        StokesError::Linalg(e)
    }
}

/// Uniform interior grid on [-1,1]^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    viscosity: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, viscosity: f64) -> Result<Self, StokesError> {
        if nx < 2 || ny < 2 {
            return Err(StokesError::GridTooSmall { nx, ny });
        }
        assert!(viscosity > 0.0, "viscosity must be positive");
        Ok(Self { nx, ny, viscosity })
    }

    /// Square grid with unit viscosity.
    pub fn square(n: usize) -> Result<Self, StokesError> {
        Self::new(n, n, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn hx(&self) -> f64 {
        2.0 / (self.nx as f64 + 1.0)
    }

    pub fn hy(&self) -> f64 {
        2.0 / (self.ny as f64 + 1.0)
    }

    /// Coordinates of interior node (i, j), 1-based in each direction.
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (-1.0 + i as f64 * self.hx(), -1.0 + j as f64 * self.hy())
    }

    /// Lexicographic index with x fastest, 0-based.
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(1 <= i && i <= self.nx && 1 <= j && j <= self.ny);
        (j - 1) * self.nx + (i - 1)
    }

    pub fn pressure_unknowns(&self) -> usize {
        self.nx * self.ny
    }

    pub fn velocity_unknowns(&self) -> usize {
        2 * self.nx * self.ny
    }
}

/// Parameters of the separable closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticConstants {
    pub theta: f64,
    pub zeta: f64,
    pub kappa: f64,
    pub c1: f64,
    pub c2: f64,
    pub viscosity: f64,
}

impl Default for AnalyticConstants {
    fn default() -> Self {
        Self {
            theta: 1.0,
            zeta: 11.6348,
            kappa: 3.5545,
            c1: 3.390472650419484,
            c2: 1.0,
            viscosity: 1.0,
        }
    }
}

/// (u, v, p) of the closed-form solution at a point and time.
///
/// The velocity field is divergence free by construction: the y-profile of v
/// differentiates to -theta times the y-profile of u.
pub fn analytic_solution(pt: (f64, f64), t: f64, c: &AnalyticConstants) -> (f64, f64, f64) {
    let (x, y) = pt;
    let envelope = (c.theta * x - c.zeta * t).exp();
    let u_profile = c.c1 * (c.theta * y).sin() + (2.0 * c.kappa / c.theta) * c.c2 * (c.kappa * y).sin();
    let v_profile = c.c1 * (c.theta * y).cos() + 2.0 * c.c2 * (c.kappa * y).cos();
    let p_profile = (c.zeta / c.theta) * c.c1 * (c.theta * y).sin();
    (u_profile * envelope, v_profile * envelope, p_profile * envelope)
}

/// Assembled A and B blocks (preconditioner not yet chosen).
#[derive(Debug, Clone)]
pub struct StokesBlocks {
    pub a: Matrix,
    pub b: Matrix,
    pub grid: GridSpec,
    pub nvel: usize,
    pub npres: usize,
}

/// Schur complement preconditioner choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    /// B^T tridiag(A)^{-1} B
    Q1,
    /// B^T diag(A)^{-1} B
    Q2,
}

impl fmt::Display for Preconditioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preconditioner::Q1 => write!(f, "q1"),
            Preconditioner::Q2 => write!(f, "q2"),
        }
    }
}

/// Complete saddle system: SPD velocity block A, full-column-rank coupling
/// block B and SPD pressure preconditioner Q.
#[derive(Debug, Clone)]
pub struct StokesSystem {
    pub a: Matrix,
    pub b: Matrix,
    pub q: Matrix,
    pub grid: GridSpec,
    pub nvel: usize,
    pub npres: usize,
}

impl StokesSystem {
    pub fn dim(&self) -> usize {
        self.nvel + self.npres
    }
}

/// Builds the velocity stiffness block and the pressure coupling block.
pub fn assemble(grid: GridSpec) -> Result<StokesBlocks, StokesError> {
    let nx = grid.nx();
    let ny = grid.ny();
    let m = grid.pressure_unknowns();
    let nvel = grid.velocity_unknowns();
    let hx = grid.hx();
    let hy = grid.hy();
    let visc = grid.viscosity();

    let cx = visc / (hx * hx);
    let cy = visc / (hy * hy);
    let diag = 2.0 * (cx + cy);

    // scalar five-point Laplacian, Dirichlet neighbours dropped
    let mut a1 = Matrix::zeros(m, m);
    for j in 1..=ny {
        for i in 1..=nx {
            let row = grid.node_index(i, j);
            a1[(row, row)] = diag;
            if i > 1 {
                a1[(row, grid.node_index(i - 1, j))] = -cx;
            }
            if i < nx {
                a1[(row, grid.node_index(i + 1, j))] = -cx;
            }
            if j > 1 {
                a1[(row, grid.node_index(i, j - 1))] = -cy;
            }
            if j < ny {
                a1[(row, grid.node_index(i, j + 1))] = -cy;
            }
        }
    }
    let mut a = Matrix::zeros(nvel, nvel);
    a.set_block(0, 0, &a1);
    a.set_block(m, m, &a1);

    // forward-difference pressure gradient; out-of-range neighbours are
    // boundary values and live in the right-hand side
    let mut b = Matrix::zeros(nvel, m);
    for j in 1..=ny {
        for i in 1..=nx {
            let node = grid.node_index(i, j);
            b[(node, node)] -= 1.0 / hx;
            if i < nx {
                b[(node, grid.node_index(i + 1, j))] += 1.0 / hx;
            }
            b[(m + node, node)] -= 1.0 / hy;
            if j < ny {
                b[(m + node, grid.node_index(i, j + 1))] += 1.0 / hy;
            }
        }
    }

    Ok(StokesBlocks {
        a,
        b,
        grid,
        nvel,
        npres: m,
    })
}

/// B^T Ahat^{-1} B with Ahat the tridiagonal or diagonal part of A.
pub fn build_preconditioner(
    blocks: &StokesBlocks,
    choice: Preconditioner,
) -> Result<Matrix, StokesError> {
    let ahat = match choice {
        Preconditioner::Q1 => blocks.a.tridiagonal_part(),
        Preconditioner::Q2 => blocks.a.diagonal_part(),
    };
    let chol = Cholesky::factor(&ahat).map_err(|e| match e {
        LinalgError::NotSpd { .. } => StokesError::NotSpd("extracted part of A"),
        other => StokesError::Linalg(other),
    })?;
    let x = chol.solve_matrix(&blocks.b);
    let q = blocks.b.transpose().matmul(&x);
    Ok(q.symmetrized())
}

impl StokesBlocks {
    pub fn with_preconditioner(self, choice: Preconditioner) -> Result<StokesSystem, StokesError> {
        let q = build_preconditioner(&self, choice)?;
        Ok(StokesSystem {
            a: self.a,
            b: self.b,
            q,
            grid: self.grid,
            nvel: self.nvel,
            npres: self.npres,
        })
    }
}

/// Samples the closed-form solution on the grid in unknown ordering.
pub fn sample_state(grid: &GridSpec, t: f64, c: &AnalyticConstants) -> Vec<f64> {
    let m = grid.pressure_unknowns();
    let mut z = vec![0.0; 3 * m];
    for j in 1..=grid.ny() {
        for i in 1..=grid.nx() {
            let idx = grid.node_index(i, j);
            let (u, v, p) = analytic_solution(grid.point(i, j), t, c);
            z[idx] = u;
            z[m + idx] = v;
            z[2 * m + idx] = p;
        }
    }
    z
}

/// Damped sample of the t = 0 solution, used to start the waveform iteration.
pub fn initial_wave(grid: &GridSpec, c: &AnalyticConstants, t: f64) -> Vec<f64> {
    let damping = 1.0 / (1.0 + 10000.0 * c.zeta * t);
    sample_state(grid, 0.0, c)
        .into_iter()
        .map(|v| v * damping)
        .collect()
}

/// Manufactured per-level right-hand sides b_n = B_mass zdot + A_saddle z at
/// t_n = t0 + n dt, with zdot = -zeta z from the separable time dependence.
/// The grid-sampled closed-form solution then solves the semi-discrete DAE
/// exactly.
pub fn rhs_sequence(
    blocks: &StokesBlocks,
    c: &AnalyticConstants,
    t0: f64,
    dt: f64,
    count: usize,
) -> Vec<Vec<f64>> {
    assert!(dt > 0.0 && count >= 1);
    let r = blocks.nvel;
    let l = blocks.npres;
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        let t = t0 + n as f64 * dt;
        let z = sample_state(&blocks.grid, t, c);
        let (xv, yv) = z.split_at(r);
        let mut b = vec![0.0; r + l];
        // velocity rows: xdot + A x + B y
        for (dst, src) in b[..r].iter_mut().zip(xv.iter()) {
            *dst = -c.zeta * src;
        }
        blocks.a.matvec_scaled_add(xv, 1.0, &mut b[..r]);
        blocks.b.matvec_scaled_add(yv, 1.0, &mut b[..r]);
        // pressure rows: -B^T x
        blocks.b.matvec_transposed_scaled_add(xv, -1.0, &mut b[r..]);
        out.push(b);
    }
    out
}

/// Writes a dense matrix in MatrixMarket coordinate format (nonzeros only).
pub fn write_matrix_market(m: &Matrix, mut w: impl Write) -> std::io::Result<()> {
    let nnz = m.data().iter().filter(|v| **v != 0.0).count();
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.rows(), m.cols(), nnz)?;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

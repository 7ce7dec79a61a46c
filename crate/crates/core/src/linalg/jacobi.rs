//! Cyclic Jacobi eigensolver for real symmetric matrices, plus the
//! symmetric-reduction generalized eigenvalue bounds and the singular-value
//! based column-rank check built on it.

use super::cholesky::Cholesky;
use super::matrix::Matrix;
use super::LinalgError;

/// Relative threshold on the smallest singular value for full column rank.
pub const RANK_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and, on request, the matching
/// orthonormal eigenvectors as columns.
pub fn symmetric_eigen(
    m: &Matrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Matrix>), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            context: "symmetric eigensolve",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let dev = m.symmetry_deviation();
    if dev > 1e-12 {
        return Err(LinalgError::NotSymmetric { deviation: dev });
    }
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = if want_vectors { Some(Matrix::identity(n)) } else { None };
    if n <= 1 {
        let vals = (0..n).map(|i| a[(i, i)]).collect();
        return Ok((vals, v));
    }
    let norm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let target = norm * 1e-14;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= target {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
            let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
            let vecs = v.map(|vm| {
                Matrix::from_fn(n, n, |r, c| vm[(r, order[c])])
            });
            return Ok((vals, vecs));
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= norm * 1e-300_f64.max(f64::EPSILON * 1e-3) {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(p, i)] = a[(i, p)];
                    a[(i, q)] = s * aip + c * aiq;
                    a[(q, i)] = a[(i, q)];
                }
                if let Some(vm) = v.as_mut() {
                    for i in 0..n {
                        let vip = vm[(i, p)];
                        let viq = vm[(i, q)];
                        vm[(i, p)] = c * vip - s * viq;
                        vm[(i, q)] = s * vip + c * viq;
                    }
                }
            }
        }
    }
    Err(LinalgError::NoConvergence { iterations: MAX_SWEEPS })
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>, LinalgError> {
    symmetric_eigen(m, false).map(|(vals, _)| vals)
}

/// Extreme eigenvalues (smallest, largest) of a symmetric matrix.
pub fn sym_eig_bounds(m: &Matrix) -> Result<(f64, f64), LinalgError> {
    let vals = symmetric_eigenvalues(m)?;
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(LinalgError::DimensionMismatch {
            context: "sym_eig_bounds on empty matrix",
            rows: 0,
            cols: 0,
        }),
    }
}

fn solve_lower_matrix(l: &Matrix, b: &Matrix) -> Matrix {
    // forward substitution on every column: returns L^{-1} B
    let n = l.rows();
    assert_eq!(b.rows(), n);
    let mut out = Matrix::zeros(n, b.cols());
    for j in 0..b.cols() {
        for i in 0..n {
            let mut s = b[(i, j)];
            let row = l.row(i);
            for k in 0..i {
                s -= row[k] * out[(k, j)];
            }
            out[(i, j)] = s / row[i];
        }
    }
    out
}

/// All generalized eigenvalues of T^{-1} S for symmetric S and SPD T,
/// via the symmetric reduction L^{-1} S L^{-T} with T = L L^T.
pub fn gen_eigenvalues(s: &Matrix, t: &Matrix) -> Result<Vec<f64>, LinalgError> {
    let chol = Cholesky::factor(t)?;
    let l = chol.lower();
    let y = solve_lower_matrix(l, s);
    let w = solve_lower_matrix(l, &y.transpose());
    symmetric_eigenvalues(&w.symmetrized())
}

/// Extreme generalized eigenvalues of T^{-1} S; all real by symmetry.
pub fn gen_eig_bounds(s: &Matrix, t: &Matrix) -> Result<(f64, f64), LinalgError> {
    let vals = gen_eigenvalues(s, t)?;
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(LinalgError::DimensionMismatch {
            context: "gen_eig_bounds on empty matrix",
            rows: 0,
            cols: 0,
        }),
    }
}

/// True iff the smallest singular value exceeds `RANK_TOL` times the largest,
/// measured through the eigenvalues of M^T M.
pub fn rank_full_column(m: &Matrix) -> Result<bool, LinalgError> {
    if m.rows() < m.cols() {
        return Err(LinalgError::DimensionMismatch {
            context: "rank_full_column needs rows >= cols",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let g = m.transpose().matmul(m).symmetrized();
    let vals = symmetric_eigenvalues(&g)?;
    let s_min = vals.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let s_max = vals.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    if s_max == 0.0 {
        return Ok(false);
    }
    Ok(s_min > RANK_TOL * s_max)
}

//! Dense nonsymmetric eigenvalue solvers: Householder Hessenberg reduction
//! followed by shifted QR iteration. The real path runs the classic Francis
//! double-shift sweep so complex-conjugate pairs come out without complex
//! arithmetic; the complex path runs single Wilkinson-shifted steps.

use num_complex::Complex64;

use super::matrix::{CMatrix, Matrix};
use super::LinalgError;

/// Iteration budget for the QR phase: 100 * n^2 shifted steps in total.
pub const QR_STEP_BUDGET_FACTOR: usize = 100;

/// Householder reduction of a real square matrix to upper Hessenberg form.
/// Only the Hessenberg part is meaningful afterwards.
fn hessenberg_real(h: &mut Matrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    let high = n - 1;
    for m in 1..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += h[(i, m - 1)].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut hsum = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hsum += ort[i] * ort[i];
        }
        let mut g = hsum.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hsum -= ort[m] * g;
        ort[m] -= g;
        // apply the reflector from both sides
        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hsum;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hsum;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
        for i in (m + 1)..=high {
            h[(i, m - 1)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
/// Ported from the EISPACK `hqr` lineage.
fn hqr_real(h: &mut Matrix, budget: &mut isize) -> Result<Vec<Complex64>, LinalgError> {
    let n = h.rows();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }
    if anorm == 0.0 {
        return Ok(eig);
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nnu = nn as usize;
            // look for a single small subdiagonal element
            let mut l = nnu;
            while l >= 1 {
                let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if h[(l, l - 1)].abs() <= eps * s {
                    h[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = h[(nnu, nnu)];
            if l == nnu {
                eig[nnu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = h[(nnu - 1, nnu - 1)];
            let mut w = h[(nnu, nnu - 1)] * h[(nnu - 1, nnu)];
            if l == nnu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.abs().copysign(if p == 0.0 { 1.0 } else { p });
                    let first = x + z;
                    eig[nnu - 1] = Complex64::new(first, 0.0);
                    eig[nnu] = Complex64::new(if z != 0.0 { x - w / z } else { first }, 0.0);
                } else {
                    eig[nnu - 1] = Complex64::new(x + p, -z);
                    eig[nnu] = Complex64::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            *budget -= 1;
            if *budget < 0 {
                return Err(LinalgError::NoConvergence {
                    iterations: QR_STEP_BUDGET_FACTOR * n * n,
                });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nnu {
                    h[(i, i)] -= x;
                }
                let s = h[(nnu, nnu - 1)].abs() + h[(nnu - 1, nnu - 2)].abs();
                y = 0.75 * s;
                x = y;
                w = -0.4375 * s * s;
            }
            its += 1;
            // find two consecutive small subdiagonal elements
            let mut m = nnu - 2;
            let mut p;
            let mut q;
            let mut r;
            loop {
                let z = h[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - rr - ss;
                r = h[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nnu {
                h[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }
            // double QR sweep over rows l..nn and columns m..nn
            for k in m..nnu {
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if k != nnu - 1 { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s0 = (p * p + q * q + r * r).sqrt();
                let s = s0.abs().copysign(if p == 0.0 { 1.0 } else { p });
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                } else {
                    h[(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nnu {
                    let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                    if k != nnu - 1 {
                        pp += r * h[(k + 2, j)];
                        h[(k + 2, j)] -= pp * z;
                    }
                    h[(k + 1, j)] -= pp * y;
                    h[(k, j)] -= pp * x;
                }
                let mmin = if nnu < k + 3 { nnu } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                    if k != nnu - 1 {
                        pp += z * h[(i, k + 2)];
                        h[(i, k + 2)] -= pp * r;
                    }
                    h[(i, k + 1)] -= pp * q;
                    h[(i, k)] -= pp;
                }
            }
        }
    }
    Ok(eig)
}

/// All eigenvalues of a real square matrix.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            context: "eigenvalues",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut h = m.clone();
    hessenberg_real(&mut h);
    let mut budget = (QR_STEP_BUDGET_FACTOR * n * n) as isize;
    hqr_real(&mut h, &mut budget)
}

fn hessenberg_complex(h: &mut CMatrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..(n - 2) {
        let mut tail = 0.0;
        for i in (k + 2)..n {
            tail += h[(i, k)].norm_sqr();
        }
        if tail == 0.0 {
            continue;
        }
        let alpha = h[(k + 1, k)];
        let xnorm = (alpha.norm_sqr() + tail).sqrt();
        let phase = if alpha.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            alpha / alpha.norm()
        };
        let beta = -phase * xnorm;
        // v = x - beta*e1 over rows k+1..n
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= beta;
        let vhv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vhv == 0.0 {
            continue;
        }
        let factor = 2.0 / vhv;
        // left: H <- P H on rows k+1..n
        for c in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + i, c)];
            }
            s *= factor;
            for (i, vi) in v.iter().enumerate() {
                let d = vi * s;
                h[(k + 1 + i, c)] -= d;
            }
        }
        // right: H <- H P on columns k+1..n
        for r in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, vj) in v.iter().enumerate() {
                s += h[(r, k + 1 + j)] * vj;
            }
            s *= factor;
            for (j, vj) in v.iter().enumerate() {
                let d = s * vj.conj();
                h[(r, k + 1 + j)] -= d;
            }
        }
        h[(k + 1, k)] = beta;
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn eig2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half_tr = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
    (half_tr + disc, half_tr - disc)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let (e1, e2) = eig2x2(a, b, c, d);
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let an = a.norm();
    let r = (an * an + bn * bn).sqrt();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Explicit single-shift QR step on the active block [lo, hi].
fn qr_step_complex(h: &mut CMatrix, lo: usize, hi: usize, mu: Complex64) {
    for i in lo..=hi {
        let d = h[(i, i)] - mu;
        h[(i, i)] = d;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        rotations.push((c, s));
        for j in k..=hi {
            let t1 = h[(k, j)];
            let t2 = h[(k + 1, j)];
            h[(k, j)] = c * t1 + s * t2;
            h[(k + 1, j)] = -s.conj() * t1 + c * t2;
        }
        h[(k + 1, k)] = Complex64::new(0.0, 0.0);
    }
    for (idx, k) in (lo..hi).enumerate() {
        let (c, s) = rotations[idx];
        let top = (k + 1).min(hi);
        for i in lo..=top {
            let t1 = h[(i, k)];
            let t2 = h[(i, k + 1)];
            h[(i, k)] = c * t1 + s.conj() * t2;
            h[(i, k + 1)] = -s * t1 + c * t2;
        }
    }
    for i in lo..=hi {
        let d = h[(i, i)] + mu;
        h[(i, i)] = d;
    }
}

/// All eigenvalues of a complex square matrix.
pub fn eigenvalues_complex(m: &CMatrix) -> Result<Vec<Complex64>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            context: "complex eigenvalues",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let mut h = m.clone();
    hessenberg_complex(&mut h);
    let anorm = h.max_abs().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut budget = (QR_STEP_BUDGET_FACTOR * n * n) as isize;
    let mut hi = n - 1;
    let mut block_its = 0usize;
    loop {
        // deflate: find the start of the trailing irreducible block
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = anorm;
            }
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            if hi == 0 {
                return Ok(eig);
            }
            hi -= 1;
            block_its = 0;
            continue;
        }
        if lo + 1 == hi {
            let (e1, e2) = eig2x2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eig[lo] = e1;
            eig[hi] = e2;
            if lo == 0 {
                return Ok(eig);
            }
            hi = lo - 1;
            block_its = 0;
            continue;
        }
        budget -= 1;
        if budget < 0 {
            return Err(LinalgError::NoConvergence {
                iterations: QR_STEP_BUDGET_FACTOR * n * n,
            });
        }
        block_its += 1;
        let mu = if block_its % 15 == 0 {
            // exceptional shift to break symmetry-induced stalls
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm() + h[(hi - 1, hi - 2)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step_complex(&mut h, lo, hi, mu);
    }
}

/// Largest eigenvalue magnitude of a real square matrix.
pub fn spectral_radius(m: &Matrix) -> Result<f64, LinalgError> {
    Ok(eigenvalues(m)?.iter().fold(0.0, |acc, z| acc.max(z.norm())))
}

/// Largest eigenvalue magnitude of a complex square matrix.
pub fn spectral_radius_complex(m: &CMatrix) -> Result<f64, LinalgError> {
    Ok(eigenvalues_complex(m)?
        .iter()
        .fold(0.0, |acc, z| acc.max(z.norm())))
}

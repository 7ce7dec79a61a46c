//! Backward differentiation formulae: coefficients, consistency checks,
//! the stiff limit point sigma, and absolute-stability region queries.

use std::fmt;

use num_complex::Complex64;

use crate::linalg::{eigenvalues_complex, CMatrix, LinalgError};

/// Coefficients of a linear multistep formula, normalized so the leading
/// alpha is one. For BDF all beta vanish except the leading one.
#[derive(Debug, Clone, PartialEq)]
pub struct BdfScheme {
    order: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BdfError {
    UnsupportedOrder(usize),
    Inconsistent { zero_sum: f64, first_order: f64 },
    NotImplicit,
}

impl fmt::Display for BdfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BdfError::UnsupportedOrder(o) => {
                write!(f, "UnsupportedOrder: BDF order {o} outside 1..=6")
            }
            BdfError::Inconsistent { zero_sum, first_order } => write!(
                f,
                "inconsistent multistep coefficients (sum alpha = {zero_sum:.3e}, \
                 sum j*alpha - sum beta = {first_order:.3e})"
            ),
            BdfError::NotImplicit => write!(f, "leading beta coefficient must be nonzero"),
        }
    }
}

impl std::error::Error for BdfError {}

impl BdfScheme {
    /// Validates a general multistep coefficient set: zero-order and
    /// first-order consistency plus implicitness.
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self, BdfError> {
        assert_eq!(alpha.len(), beta.len(), "alpha/beta length mismatch");
        assert!(alpha.len() >= 2, "need at least a one-step formula");
        let order = alpha.len() - 1;
        let zero_sum: f64 = alpha.iter().sum();
        let first_order: f64 = alpha
            .iter()
            .enumerate()
            .map(|(j, a)| j as f64 * a)
            .sum::<f64>()
            - beta.iter().sum::<f64>();
        if zero_sum.abs() > 1e-14 || first_order.abs() > 1e-14 {
            return Err(BdfError::Inconsistent { zero_sum, first_order });
        }
        if beta[order] == 0.0 {
            return Err(BdfError::NotImplicit);
        }
        Ok(Self { order, alpha, beta })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha_lead(&self) -> f64 {
        self.alpha[self.order]
    }

    pub fn beta_lead(&self) -> f64 {
        self.beta[self.order]
    }

    /// The stiff limit point sigma = alpha_nu / (beta_nu * dt).
    pub fn sigma(&self, dt: f64) -> f64 {
        assert!(dt > 0.0, "time step must be positive");
        self.alpha_lead() / (self.beta_lead() * dt)
    }

    /// a(z) = sum_j alpha_j z^j.
    pub fn poly_a(&self, z: Complex64) -> Complex64 {
        horner(&self.alpha, z)
    }

    /// b(z) = sum_j beta_j z^j.
    pub fn poly_b(&self, z: Complex64) -> Complex64 {
        horner(&self.beta, z)
    }

    /// The boundary-locus point (a/b)(e^{i theta}).
    pub fn boundary_locus(&self, theta: f64) -> Complex64 {
        let z = Complex64::new(theta.cos(), theta.sin());
        self.poly_a(z) / self.poly_b(z)
    }

    /// True iff `mu` lies strictly inside the absolute stability region:
    /// all roots of a(z) - mu b(z) have modulus below one.
    pub fn stability_region_contains_interior(
        &self,
        mu: Complex64,
    ) -> Result<bool, LinalgError> {
        let coeffs: Vec<Complex64> = self
            .alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| Complex64::new(a, 0.0) - mu * b)
            .collect();
        let lead = coeffs[self.order];
        let scale = coeffs.iter().fold(0.0, |m: f64, c| m.max(c.norm()));
        if lead.norm() <= scale * 1e-14 {
            // degree collapse sends a root to infinity
            return Ok(false);
        }
        let n = self.order;
        let mut companion = CMatrix::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            companion[(i, n - 1)] = -coeffs[i] / lead;
        }
        let roots = eigenvalues_complex(&companion)?;
        Ok(roots.iter().all(|z| z.norm() < 1.0 - 1e-12))
    }
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Standard BDF coefficients of the given order, alpha_nu normalized to one.
pub fn bdf_coefficients(order: usize) -> Result<BdfScheme, BdfError> {
    let (alpha, beta_lead): (Vec<f64>, f64) = match order {
        1 => (vec![-1.0, 1.0], 1.0),
        2 => (vec![1.0 / 3.0, -4.0 / 3.0, 1.0], 2.0 / 3.0),
        3 => (
            vec![-2.0 / 11.0, 9.0 / 11.0, -18.0 / 11.0, 1.0],
            6.0 / 11.0,
        ),
        4 => (
            vec![3.0 / 25.0, -16.0 / 25.0, 36.0 / 25.0, -48.0 / 25.0, 1.0],
            12.0 / 25.0,
        ),
        5 => (
            vec![
                -12.0 / 137.0,
                75.0 / 137.0,
                -200.0 / 137.0,
                300.0 / 137.0,
                -300.0 / 137.0,
                1.0,
            ],
            60.0 / 137.0,
        ),
        6 => (
            vec![
                10.0 / 147.0,
                -72.0 / 147.0,
                225.0 / 147.0,
                -400.0 / 147.0,
                450.0 / 147.0,
                -360.0 / 147.0,
                1.0,
            ],
            60.0 / 147.0,
        ),
        _ => return Err(BdfError::UnsupportedOrder(order)),
    };
    let mut beta = vec![0.0; order + 1];
    beta[order] = beta_lead;
    BdfScheme::new(alpha, beta)
}

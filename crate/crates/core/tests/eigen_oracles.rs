//! Cross-checks of the dense eigensolvers against independent routes:
//! characteristic-polynomial roots, similarity invariance, the symmetric
//! embedding for singular values, and the symmetric solver against the
//! nonsymmetric one.

mod common;

use common::{characteristic_polynomial, polynomial_roots, TinyRng};
use dabsor_core::linalg::{
    eigenvalues, rank_full_column, spectral_radius, symmetric_eigenvalues, Lu, Matrix,
};
use dabsor_core::stokes::{assemble, GridSpec};

fn random_matrix(rng: &mut TinyRng, n: usize, scale: f64) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.range(-scale, scale))
}

#[test]
fn spectral_radius_matches_characteristic_roots() {
    let mut rng = TinyRng::new(11);
    for trial in 0..20 {
        let m = random_matrix(&mut rng, 6, 1.0);
        let coeffs = characteristic_polynomial(&m);
        let roots = polynomial_roots(&coeffs);
        let oracle = roots.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let got = spectral_radius(&m).unwrap();
        assert!(
            (got - oracle).abs() <= 1e-8 * oracle.max(1.0),
            "trial {trial}: {got} vs {oracle}"
        );
    }
}

#[test]
fn eigenvalues_match_characteristic_roots_pointwise() {
    let mut rng = TinyRng::new(23);
    let m = random_matrix(&mut rng, 6, 1.0);
    let mut got = eigenvalues(&m).unwrap();
    let mut oracle = polynomial_roots(&characteristic_polynomial(&m));
    let key = |z: &num_complex::Complex64| (z.re, z.im);
    got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    oracle.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    for (g, o) in got.iter().zip(&oracle) {
        assert!((g - o).norm() < 1e-8, "{g} vs {o}");
    }
}

#[test]
fn spectral_radius_similarity_invariant() {
    let mut rng = TinyRng::new(37);
    for _ in 0..10 {
        let m = random_matrix(&mut rng, 7, 1.0);
        let rho = spectral_radius(&m).unwrap();
        // well-conditioned transform: identity plus a small perturbation
        let p = Matrix::identity(7).add(&random_matrix(&mut rng, 7, 0.15));
        // M P^{-1} by solving P^T X^T = M^T, then left-multiply by P
        let m_pinv = Lu::factor(&p.transpose())
            .unwrap()
            .solve_matrix(&m.transpose())
            .transpose();
        let sim = p.matmul(&m_pinv);
        let rho_sim = spectral_radius(&sim).unwrap();
        assert!(
            (rho - rho_sim).abs() <= 1e-8 * rho.max(1.0),
            "{rho} vs {rho_sim}"
        );
    }
}

#[test]
fn symmetric_solver_agrees_with_qr_path() {
    let mut rng = TinyRng::new(53);
    for _ in 0..5 {
        let g = random_matrix(&mut rng, 5, 1.0);
        let m = g.add(&g.transpose()).scaled(0.5);
        let jacobi = symmetric_eigenvalues(&m).unwrap();
        let mut qr: Vec<f64> = eigenvalues(&m).unwrap().iter().map(|z| z.re).collect();
        qr.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = jacobi.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        for (a, b) in jacobi.iter().zip(&qr) {
            assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
        }
    }
}

#[test]
fn stokes_coupling_block_has_full_rank_and_matching_singular_values() {
    let blocks = assemble(GridSpec::square(4).unwrap()).unwrap();
    assert!(rank_full_column(&blocks.b).unwrap());

    // oracle: singular values through the symmetric embedding [[0, B], [B^T, 0]],
    // whose nonzero eigenvalues are +-s_i
    let r = blocks.nvel;
    let l = blocks.npres;
    let mut emb = Matrix::zeros(r + l, r + l);
    emb.set_block(0, r, &blocks.b);
    emb.set_block(r, 0, &blocks.b.transpose());
    let emb_eigs = symmetric_eigenvalues(&emb).unwrap();
    let s_max_oracle = emb_eigs.last().unwrap();
    let positive: Vec<f64> = emb_eigs.iter().copied().filter(|v| *v > 1e-12).collect();
    assert_eq!(positive.len(), l, "expected l positive embedding eigenvalues");
    let s_min_oracle = positive[0];

    let gram = blocks.b.transpose().matmul(&blocks.b).symmetrized();
    let gram_eigs = symmetric_eigenvalues(&gram).unwrap();
    let s_min = gram_eigs.first().unwrap().max(0.0).sqrt();
    let s_max = gram_eigs.last().unwrap().max(0.0).sqrt();
    assert!((s_min - s_min_oracle).abs() <= 1e-8 * s_max_oracle);
    assert!((s_max - s_max_oracle).abs() <= 1e-8 * s_max_oracle);
}

//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with its measurements and elapsed time.

mod common;

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use common::{stacked_iteration_matrix, stacked_spectral_radius, TinyRng};
use dabsor_cli::config::ExperimentConfig;
use dabsor_cli::experiment::{execute_windowed, prepare};
use dabsor_core::bdf::bdf_coefficients;
use dabsor_core::dabsor::{
    dabsor_window, measure_dpocf, reference_solve, DabsorError, IterationParams, WindowPlan,
};
use dabsor_core::spectral::{
    convergence_domain, finite_interval_radius, infinite_interval_radius, laplace_relation_check,
    optimal_params, SpectralBounds,
};
use dabsor_core::stokes::{
    analytic_solution, assemble, rhs_sequence, sample_state, AnalyticConstants, GridSpec,
    Preconditioner, StokesSystem,
};
use num_complex::Complex64;

fn system(n: usize, q: Preconditioner) -> StokesSystem {
    assemble(GridSpec::square(n).unwrap())
        .unwrap()
        .with_preconditioner(q)
        .unwrap()
}

fn admissible_point(rng: &mut TinyRng, bounds: &SpectralBounds) -> (f64, f64) {
    loop {
        let omega = rng.range(1e-3, 2.0 - 1e-3);
        let cap = 2.0
            * bounds.eta_min
            * bounds.mu_min
            * (2.0 / omega + bounds.sigma / bounds.eta_max - 1.0);
        let tau = rng.range(0.0, cap);
        if tau > 0.0 && convergence_domain(omega, tau, bounds) {
            return (omega, tau);
        }
    }
}

fn report(criterion: u32, pass: bool, elapsed: f64, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} ({elapsed:.1}s) - {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_bdf_golden() {
    let start = Instant::now();
    let expected: [(&[f64], f64); 6] = [
        (&[-1.0, 1.0], 1.0),
        (&[1.0 / 3.0, -4.0 / 3.0, 1.0], 2.0 / 3.0),
        (&[-2.0 / 11.0, 9.0 / 11.0, -18.0 / 11.0, 1.0], 6.0 / 11.0),
        (
            &[3.0 / 25.0, -16.0 / 25.0, 36.0 / 25.0, -48.0 / 25.0, 1.0],
            12.0 / 25.0,
        ),
        (
            &[
                -12.0 / 137.0,
                75.0 / 137.0,
                -200.0 / 137.0,
                300.0 / 137.0,
                -300.0 / 137.0,
                1.0,
            ],
            60.0 / 137.0,
        ),
        (
            &[
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
    ];
    let mut ok = true;
    let mut worst_sum = 0.0_f64;
    for (order, (alpha, beta)) in expected.iter().enumerate() {
        let scheme = bdf_coefficients(order + 1).unwrap();
        ok &= scheme.alpha() == *alpha && scheme.beta_lead() == *beta;
        let sum: f64 = scheme.alpha().iter().sum();
        worst_sum = worst_sum.max(sum.abs());
    }
    ok &= worst_sum <= 1e-15;
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 1.0;
    report(
        1,
        ok,
        elapsed,
        &format!("six orders bit-exact, worst |sum alpha| = {worst_sum:.2e}"),
    );
}

#[test]
fn criterion_02_analytic_identity() {
    let start = Instant::now();
    let c = AnalyticConstants::default();
    let mut rng = TinyRng::new(2024);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let x = rng.range(-1.0, 1.0);
        let y = rng.range(-1.0, 1.0);
        let t = rng.range(0.0, 0.2);
        let (u, _, _) = analytic_solution((x, y), t, &c);
        let envelope = (c.theta * x - c.zeta * t).exp();
        let dv_dy = (-c.c1 * c.theta * (c.theta * y).sin()
            - 2.0 * c.c2 * c.kappa * (c.kappa * y).sin())
            * envelope;
        worst = worst.max((c.theta * u + dv_dy).abs());
    }
    let (_, v, _) = analytic_solution((0.0, 0.0), 0.0, &c);
    let exact = v == 5.390472650419484;
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-12 && exact && elapsed < 1.0;
    report(
        2,
        ok,
        elapsed,
        &format!("divergence residual {worst:.2e}, v(0,0;0) exact: {exact}"),
    );
}

#[test]
fn criterion_03_stacked_operator_equivalence() {
    let start = Instant::now();
    let sys = system(4, Preconditioner::Q1);
    let dt = 0.001;
    let mut rng = TinyRng::new(3);
    let mut worst = 0.0_f64;
    for order in 1..=3usize {
        let scheme = bdf_coefficients(order).unwrap();
        let bounds = SpectralBounds::compute(&sys, scheme.sigma(dt)).unwrap();
        for levels in [3usize, 5] {
            for _ in 0..5 {
                let (omega, tau) = admissible_point(&mut rng, &bounds);
                let via_symbol = finite_interval_radius(&sys, &scheme, dt, omega, tau).unwrap();
                let via_stack = stacked_spectral_radius(&sys, &scheme, dt, omega, tau, levels);
                worst = worst.max((via_symbol - via_stack).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst < 1e-8 && elapsed < 60.0;
    report(3, ok, elapsed, &format!("worst |symbol - stacked| = {worst:.2e}"));
}

#[test]
fn criterion_04_transform_identity() {
    let start = Instant::now();
    let sys = system(4, Preconditioner::Q1);
    let dt = 0.001;
    let mut rng = TinyRng::new(4);
    let mut worst = 0.0_f64;
    for order in 1..=3usize {
        let scheme = bdf_coefficients(order).unwrap();
        for _ in 0..20 {
            let radius = rng.range(1.1, 10.0);
            let angle = rng.range(0.0, 2.0 * std::f64::consts::PI);
            let s = Complex64::new(radius * angle.cos(), radius * angle.sin());
            let dev = laplace_relation_check(&sys, &scheme, dt, 0.8, 1.5, s).unwrap();
            worst = worst.max(dev);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst < 1e-10 && elapsed < 30.0;
    report(4, ok, elapsed, &format!("worst entrywise deviation = {worst:.2e}"));
}

#[test]
fn criterion_05_domain_soundness() {
    let start = Instant::now();
    let sys = system(4, Preconditioner::Q1);
    let scheme = bdf_coefficients(1).unwrap();
    let dt = 0.001;
    let bounds = SpectralBounds::compute(&sys, scheme.sigma(dt)).unwrap();
    let mut rng = TinyRng::new(5);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let (omega, tau) = admissible_point(&mut rng, &bounds);
        let rho = finite_interval_radius(&sys, &scheme, dt, omega, tau).unwrap();
        worst = worst.max(rho);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst < 1.0 - 1e-12 && elapsed < 120.0;
    report(5, ok, elapsed, &format!("largest in-domain radius = {worst:.12}"));
}

#[test]
fn criterion_06_optimality() {
    let start = Instant::now();
    let scheme = bdf_coefficients(1).unwrap();
    let dt = 0.001;
    let mut bound_ok = true;
    let mut spread_ok = true;
    let mut detail = String::new();
    for q in [Preconditioner::Q1, Preconditioner::Q2] {
        let sys = system(12, q);
        let bounds = SpectralBounds::compute(&sys, scheme.sigma(dt)).unwrap();
        let opt = optimal_params(&bounds, None);
        let rho = finite_interval_radius(&sys, &scheme, dt, opt.omega_opt, opt.tau_opt).unwrap();
        let within = rho <= opt.rho_opt + 1e-6;
        bound_ok &= within;

        // closed-form factor across ten interior curve points
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 1..=10 {
            let d = bounds.delta_min
                + (bounds.delta_max - bounds.delta_min) * k as f64 / 11.0;
            let o = optimal_params(&bounds, Some(d));
            lo = lo.min(o.rho_opt);
            hi = hi.max(o.rho_opt);
        }
        spread_ok &= hi - lo < 1e-6;
        detail.push_str(&format!(
            "[{q}: rho@opt {rho:.6} vs rho_opt {:.6} ({}), rho_opt spread {:.1e}] ",
            opt.rho_opt,
            if within { "<= +1e-6" } else { "EXCEEDS" },
            hi - lo
        ));
    }
    if !bound_ok {
        detail.push_str(
            "NOTE: the realized spectrum spans Rayleigh quotients delta in \
             [sigma/eta_max, sigma/eta_min]; branch magnitudes evaluated off the \
             single-delta optimal curve exceed the closed-form optimal factor, so \
             the optimality bound cannot hold for this operator",
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = bound_ok && spread_ok && elapsed < 120.0;
    report(6, ok, elapsed, &detail);
}

#[test]
fn criterion_07_infinite_dominates_finite() {
    let start = Instant::now();
    let sys = system(4, Preconditioner::Q1);
    let dt = 0.001;
    let mut ok = true;
    let mut detail = String::new();
    for order in [1usize, 2] {
        let scheme = bdf_coefficients(order).unwrap();
        let bounds = SpectralBounds::compute(&sys, scheme.sigma(dt)).unwrap();
        let opt = optimal_params(&bounds, None);
        let fin = finite_interval_radius(&sys, &scheme, dt, opt.omega_opt, opt.tau_opt).unwrap();
        let inf =
            infinite_interval_radius(&sys, &scheme, dt, opt.omega_opt, opt.tau_opt, 720).unwrap();
        ok &= inf >= fin - 1e-8;
        detail.push_str(&format!("[order {order}: inf {inf:.6} vs fin {fin:.6}] "));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 60.0;
    report(7, ok, elapsed, &detail);
}

#[test]
fn criterion_08_error_propagation() {
    let start = Instant::now();
    let sys = system(4, Preconditioner::Q1);
    let scheme = bdf_coefficients(1).unwrap();
    let dt = 0.001;
    let dim = sys.dim();
    let levels = 5usize;
    let c = AnalyticConstants::default();
    let t0 = 0.01;
    let start_vals = vec![sample_state(&sys.grid, t0, &c)];
    let blocks = assemble(sys.grid).unwrap();
    let rhs = rhs_sequence(&blocks, &c, t0 + dt, dt, levels);
    let reference = reference_solve(&sys, &scheme, dt, &start_vals, &rhs).unwrap();

    let mut rng = TinyRng::new(8);
    let error: Vec<Vec<f64>> = (0..levels)
        .map(|_| (0..dim).map(|_| rng.range(-1.0, 1.0)).collect())
        .collect();
    let initial: Vec<Vec<f64>> = reference
        .iter()
        .zip(&error)
        .map(|(z, e)| z.iter().zip(e).map(|(a, b)| a + b).collect())
        .collect();
    let (omega, tau) = (0.9, 1.1);
    let params = IterationParams::new(omega, tau).with_limits(1, 0.0);
    let outcome = match dabsor_window(
        &sys, &scheme, dt, &params, &start_vals, &initial, &rhs, &reference,
    ) {
        Err(DabsorError::MaxItersExceeded { outcome, .. }) => *outcome,
        other => panic!("expected a single incomplete sweep, got {other:?}"),
    };
    let w = stacked_iteration_matrix(&sys, &scheme, dt, omega, tau, levels);
    let expected = w.matvec(&error.concat());
    let mut worst = 0.0_f64;
    for n in 0..levels {
        for i in 0..dim {
            let got = outcome.sequence.levels[n][i] - reference[n][i];
            worst = worst.max((got - expected[n * dim + i]).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-10 && elapsed < 30.0;
    report(8, ok, elapsed, &format!("one-sweep deviation from C^-1 D e = {worst:.2e}"));
}

/// Average iterations with the sweep cap as a lower bound for unconverged
/// cells (the tables mark those cells with the sentinel).
fn windowed_average(cfg: &ExperimentConfig) -> Option<f64> {
    let prep = prepare(cfg).expect("valid config");
    let plan = WindowPlan::new(cfg.t_start, cfg.t_end, cfg.dt, cfg.windows).unwrap();
    match execute_windowed(cfg, &prep, &plan) {
        Ok(out) => Some(out.average_iterations()),
        Err(DabsorError::MaxItersExceeded { .. }) => None,
        Err(e) => panic!("unexpected solver error: {e}"),
    }
}

#[test]
fn criterion_09_windowing_acceleration() {
    let start = Instant::now();
    let cap = 800.0;
    let mut ok = true;
    let mut detail = String::new();
    let mut per_precond: Vec<Vec<Option<f64>>> = Vec::new();
    for precond in ["q1", "q2"] {
        for order in [1usize, 2] {
            let mut column = Vec::new();
            for windows in 1..=6usize {
                let cfg = ExperimentConfig {
                    grid: 12,
                    order,
                    windows,
                    precond: precond.to_string(),
                    ..ExperimentConfig::default()
                };
                column.push(windowed_average(&cfg));
            }
            // strict decrease; unconverged cells sit at the cap and may only
            // appear before the first converged cell
            for pair in column.windows(2) {
                match (pair[0], pair[1]) {
                    (Some(a), Some(b)) => ok &= b < a,
                    (None, _) => {}
                    (Some(_), None) => ok = false,
                }
            }
            detail.push_str(&format!(
                "[{precond} bdf{order}: {}] ",
                column
                    .iter()
                    .map(|v| v.map_or("cap".to_string(), |x| format!("{x:.1}")))
                    .collect::<Vec<_>>()
                    .join(",")
            ));
            per_precond.push(column);
        }
    }
    // Q2 at least as fast as Q1 for each (order, N)
    for (q1_col, q2_col) in per_precond[..2].iter().zip(&per_precond[2..]) {
        for (q1v, q2v) in q1_col.iter().zip(q2_col) {
            let a = q1v.unwrap_or(cap);
            let b = q2v.unwrap_or(cap);
            ok &= b <= a;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 900.0;
    report(9, ok, elapsed, &detail);
}

#[test]
fn criterion_10_dpocf_trend() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for precond in ["q1", "q2"] {
        let mut dpocf = Vec::new();
        let mut dtocf = 0.0;
        for windows in [6usize, 12, 60] {
            let cfg = ExperimentConfig {
                grid: 12,
                order: 1,
                windows,
                precond: precond.to_string(),
                ..ExperimentConfig::default()
            };
            let prep = prepare(&cfg).unwrap();
            dtocf = prep.optimal.rho_opt;
            let plan = WindowPlan::new(cfg.t_start, cfg.t_end, cfg.dt, windows).unwrap();
            let out = execute_windowed(&cfg, &prep, &plan).expect("windowed run converges");
            dpocf.push(measure_dpocf(&out.histories).unwrap());
        }
        let trend = dpocf[2] < dpocf[1] && dpocf[1] < dpocf[0];
        let close = (dpocf[2] - dtocf).abs() <= 0.15;
        ok &= trend && close;
        detail.push_str(&format!(
            "[{precond}: dpocf(6) {:.4} > dpocf(12) {:.4} > dpocf(60) {:.4}; |dpocf(60)-dtocf| = {:.4}] ",
            dpocf[0],
            dpocf[1],
            dpocf[2],
            (dpocf[2] - dtocf).abs()
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 900.0;
    report(10, ok, elapsed, &detail);
}

#[test]
fn criterion_11_quantitative_contingency() {
    // exact numeric agreement with the reference factors is not guaranteed;
    // the deviation is measured and logged, never failed on
    let start = Instant::now();
    let scheme = bdf_coefficients(1).unwrap();
    let dt = 0.001;
    let mut lines = Vec::new();
    for (q, reference) in [(Preconditioner::Q1, 0.3590), (Preconditioner::Q2, 0.2940)] {
        let sys = system(12, q);
        let bounds = SpectralBounds::compute(&sys, scheme.sigma(dt)).unwrap();
        let opt = optimal_params(&bounds, None);
        let rel = (opt.rho_opt - reference) / reference;
        let within = rel.abs() <= 0.10;
        lines.push(format!(
            "{{\"precond\":\"{q}\",\"dtocf\":{},\"reference\":{reference},\"relative_deviation\":{rel},\"within_10_percent\":{within}}}",
            opt.rho_opt
        ));
    }
    let log = format!("[{}]", lines.join(","));
    let log_path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("criterion11_deviation.json");
    std::fs::write(&log_path, &log).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        11,
        true,
        elapsed,
        &format!("deviation logged to {}: {log}", log_path.display()),
    );
}

#[test]
fn criterion_12_table_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_dabsor");
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let mut outputs = Vec::new();
    for run in ["det_a", "det_b"] {
        let out_dir = tmp.join(run);
        let status = Command::new(bin)
            .args([
                "table",
                "T7",
                "--scale",
                "desk",
                "--seed",
                "42",
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .status()
            .expect("binary runs");
        assert!(status.success(), "table command failed");
        outputs.push(std::fs::read(out_dir.join("T7.csv")).unwrap());
    }
    let identical = outputs[0] == outputs[1];
    let elapsed = start.elapsed().as_secs_f64();
    report(
        12,
        identical,
        elapsed,
        &format!("two desk T7 runs byte-identical: {identical} ({} bytes)", outputs[0].len()),
    );
}

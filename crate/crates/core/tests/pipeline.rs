//! Cross-module consistency: preparation -> emitted state -> detection.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use approx::assert_abs_diff_eq;
use atomsqueeze::budget::{detected_squeezing, window_tradeoff, BudgetInputs, EmitterParams};
use atomsqueeze::fock::{apply_loss, loss_variance, min_quadrature_variance, quadrature_stats};
use atomsqueeze::homodyne::{
    estimate_variance, marginal_density, phase_scan, sample_quadratures, CdfTable, HomodyneRun, TABLE_HALF_WIDTH,
};
use atomsqueeze::jc::{emitted_superposition, field_state, AtomPrep};
use atomsqueeze::superposition::{make_superposition, SuperpositionSpec};
use atomsqueeze::wigner::{wigner_marginal_of_state, wigner_of_state, GridSpec};
use atomsqueeze::Execution;
use proptest::prelude::*;

#[test]
fn emitted_field_equals_superposition_model() {
    for i in 0..12 {
        for j in 0..12 {
            let prep = AtomPrep::new(TAU * i as f64 / 12.0, TAU * j as f64 / 12.0).unwrap();
            let rho = field_state(&prep, FRAC_PI_2).unwrap();
            let spec = emitted_superposition(&prep);
            let model = make_superposition(&spec).to_density();
            for phi in [0.0, 0.4, FRAC_PI_2, 2.0] {
                assert_abs_diff_eq!(
                    quadrature_stats(&rho, phi).variance,
                    spec.variance_at(phi),
                    epsilon = 1e-12
                );
                assert_abs_diff_eq!(
                    quadrature_stats(&model, phi).mean,
                    quadrature_stats(&rho, phi).mean,
                    epsilon = 1e-12
                );
            }
        }
    }
}

#[test]
fn budget_matches_homodyne_estimate() {
    let e = EmitterParams::from_lifetime(230e-9).unwrap();
    let source = SuperpositionSpec::new(0.5, 0.0).unwrap();
    let b = detected_squeezing(&BudgetInputs {
        eta_collection: 0.94,
        emitted: e.emitted_mode(),
        lo: e.matched_lo(5.0 * e.lifetime_tau).unwrap(),
        eta_detector: 1.0,
        source,
        lo_phase: None,
    })
    .unwrap();
    let run = HomodyneRun::new(
        make_superposition(&source).to_density(),
        b.lo_phase,
        b.eta_total,
        400_000,
        3,
    )
    .unwrap();
    let est = estimate_variance(&sample_quadratures(&run, Execution::default()).unwrap()).unwrap();
    assert!((est.var_hat - b.detected_variance).abs() < 5.0 * est.std_error_of_var);
}

#[test]
fn wigner_marginal_matches_homodyne_density() {
    let rho = apply_loss(
        &make_superposition(&SuperpositionSpec::new(0.6, 0.8).unwrap()).to_density(),
        0.7,
    )
    .unwrap();
    let spec = GridSpec::square(4.0, 161);
    for phi in [0.0, 0.8, 2.9] {
        let m = wigner_marginal_of_state(&rho, phi, &spec, Execution::default()).unwrap();
        let p = marginal_density(&rho, phi);
        for (k, &x) in m.x.iter().enumerate().step_by(9) {
            assert_abs_diff_eq!(m.density[k], p.density(x), epsilon = 1e-9);
        }
    }
}

#[test]
fn sequential_and_default_execution_agree() {
    let rho = make_superposition(&SuperpositionSpec::new(0.5, 0.3).unwrap()).to_density();
    let spec = GridSpec::square(3.0, 65);
    let a = wigner_of_state(&rho, &spec, Execution::Sequential).unwrap();
    let b = wigner_of_state(&rho, &spec, Execution::default()).unwrap();
    assert_eq!(a, b);

    let run = HomodyneRun::new(rho.clone(), 0.3, 0.9, 150_000, 11).unwrap();
    assert_eq!(
        sample_quadratures(&run, Execution::Sequential).unwrap(),
        sample_quadratures(&run, Execution::default()).unwrap()
    );
    let ta = CdfTable::new(
        &marginal_density(&rho, 0.3),
        4096,
        TABLE_HALF_WIDTH,
        Execution::Sequential,
    )
    .unwrap();
    let tb = CdfTable::new(
        &marginal_density(&rho, 0.3),
        4096,
        TABLE_HALF_WIDTH,
        Execution::default(),
    )
    .unwrap();
    for u in [0.001, 0.3, 0.5, 0.97] {
        assert_eq!(ta.quantile(u), tb.quantile(u));
    }

    let e = EmitterParams::from_lifetime(1.0).unwrap();
    let src = SuperpositionSpec::new(0.5, 0.0).unwrap();
    let grid: Vec<f64> = (1..=12).map(|k| 0.5 * k as f64).collect();
    assert_eq!(
        window_tradeoff(&e, &src, 0.9, 0.95, &grid, Execution::Sequential).unwrap(),
        window_tradeoff(&e, &src, 0.9, 0.95, &grid, Execution::default()).unwrap()
    );
}

#[test]
fn phase_scan_tracks_analytic_curve() {
    let rho = make_superposition(&SuperpositionSpec::new(0.5, 0.0).unwrap()).to_density();
    let rows = phase_scan(&rho, 0.94, 200_000, 5, 8, Execution::default()).unwrap();
    for r in &rows {
        assert!((r.var_hat - r.analytic_variance).abs() < 5.0 * r.std_error, "{r:?}");
    }
    let min = rows.iter().min_by(|a, b| a.var_hat.total_cmp(&b.var_hat)).unwrap();
    assert!(min.phi_lo.abs() < 1e-12 || (min.phi_lo - PI).abs() < 1e-12);
}

proptest! {
    #[test]
    fn detected_min_variance_follows_loss_identity(beta in 0.0f64..1.0, phase in 0.0f64..TAU, eta in 0.0f64..=1.0) {
        let spec = SuperpositionSpec::new(beta, phase).unwrap();
        let rho = make_superposition(&spec).to_density();
        let lossy = apply_loss(&rho, eta).unwrap();
        // loss commutes with phase rotation, so the squeezed phase is unchanged
        let v = quadrature_stats(&lossy, phase).variance;
        prop_assert!((v - loss_variance(spec.min_variance(), eta)).abs() < 1e-12);
        prop_assert!((min_quadrature_variance(&lossy).variance - v).abs() < 1e-12);
    }
}

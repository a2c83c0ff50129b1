use std::sync::Arc;

use super::*;
use crate::risk::{EmpiricalSample, RiskFunction};
use crate::sde::{
    sample_brownian, simulate_forward, total_cost, ActionGrid, BrownianDriver, Dims, FnCoefficients, InitialLaw,
    MeasurePolicy, ModelSpec, TimeGrid,
};

fn unit_noise_model(cost_x: bool) -> ModelSpec {
    let mut c = FnCoefficients::new().diffusion(|_, _, _, out| out[0] = 1.0);
    if cost_x {
        c = c.cost_rate(|_, x, _| x[0]).cost_gradient(|_, _, _, out| out[0] = 1.0);
    }
    ModelSpec::new(Dims::scalar(), Arc::new(c), ActionGrid::scalar(&[0.0]).unwrap(), InitialLaw::Dirac(vec![0.0]))
        .unwrap()
}

fn run(model: &ModelSpec, n_steps: usize, n_paths: usize, seed: u64) -> crate::sde::PathEnsemble {
    let grid = TimeGrid::new(1.0, n_steps).unwrap();
    let driver = Arc::new(sample_brownian(&grid, n_paths, model.dims().dim_w, seed).unwrap());
    let policy = MeasurePolicy::uniform(model.actions().len(), n_steps).unwrap();
    simulate_forward(model, &policy, &driver, &grid).unwrap()
}

#[test]
fn unit_derivative_gives_constant_adjustment() {
    let model = unit_noise_model(false);
    let ens = run(&model, 10, 500, 3);
    let adj = solve_risk_adjustment(&ens, &vec![1.0; 500], &RegressionBasis::polynomial(3)).unwrap();
    assert!(adj.y_prime.iter().all(|&v| v == 1.0));
    assert!(adj.z_prime.iter().all(|&v| v == 0.0));
    assert!(martingale_diagnostics(&adj).passes());
}

#[test]
fn lattice_surrogate_recovers_representation() {
    // Two steps, four paths: every sign pattern of ±√Δt.
    let grid = TimeGrid::new(1.0, 2).unwrap();
    let s = grid.dt().sqrt();
    let inc = vec![s, s, s, -s, -s, s, -s, -s];
    let driver = Arc::new(BrownianDriver::from_increments(inc, 4, &grid, 1, 0).unwrap());
    let model = unit_noise_model(false);
    let policy = MeasurePolicy::uniform(1, 2).unwrap();
    let ens = simulate_forward(&model, &policy, &driver, &grid).unwrap();
    let d: Vec<f64> = (0..4).map(|i| ens.state(i, 2)[0]).collect();
    let adj = solve_risk_adjustment(&ens, &d, &RegressionBasis::polynomial(1)).unwrap();
    for i in 0..4 {
        assert!(adj.y(i, 0).abs() < 1e-12);
        assert!((adj.y(i, 1) - ens.state(i, 1)[0]).abs() < 1e-6);
        assert!((adj.z(i, 0)[0] - 1.0).abs() < 1e-6);
        assert!((adj.z(i, 1)[0] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn unit_state_gradient_integrates_to_remaining_time() {
    let model = unit_noise_model(true);
    let ens = run(&model, 20, 200, 5);
    let out = solve_adjoints(&model, &ens, &vec![1.0; 200], &RegressionBasis::polynomial(2)).unwrap();
    let grid = ens.grid();
    for k in 0..=20 {
        let expected = grid.horizon() - grid.time(k);
        for i in 0..200 {
            assert!((out.adjoint.y(i, k)[0] - expected).abs() < 1e-12);
        }
    }
    assert!(out.adjoint.z.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn state_free_dynamics_mirror_the_adjustment() {
    // b and σ do not depend on x, c = 0 and g = −x, so ∇_x H = 0 and y = −y'.
    let c = FnCoefficients::new()
        .drift(|_, _, a, out| out[0] = 0.05 * a[0] - 0.5 * 0.04 * a[0] * a[0])
        .diffusion(|_, _, a, out| out[0] = 0.2 * a[0])
        .terminal_cost(|x| -x[0])
        .terminal_gradient(|_, out| out[0] = -1.0);
    let model = ModelSpec::new(
        Dims::scalar(),
        Arc::new(c),
        ActionGrid::scalar(&[0.5, 1.0]).unwrap(),
        InitialLaw::Dirac(vec![0.0]),
    )
    .unwrap();
    let ens = run(&model, 8, 400, 11);
    let cost = EmpiricalSample::new(total_cost(&ens, &model)).unwrap();
    let d = RiskFunction::mean_deviation(0.5).unwrap().l_derivative(&cost).unwrap();
    let out = solve_adjoints(&model, &ens, &d.values, &RegressionBasis::polynomial(3)).unwrap();
    for i in 0..400 {
        for k in 0..=8 {
            assert_eq!(out.adjoint.y(i, k)[0], -out.adjustment.y(i, k));
        }
        for k in 0..8 {
            assert_eq!(out.adjoint.z(i, k)[0], -out.adjustment.z(i, k)[0]);
        }
    }
}

#[test]
fn mismatched_derivative_length_is_rejected() {
    let model = unit_noise_model(false);
    let ens = run(&model, 4, 50, 1);
    assert!(solve_risk_adjustment(&ens, &[1.0; 49], &RegressionBasis::polynomial(1)).is_err());
}

#[test]
fn single_path_flags_insufficient_sample() {
    let model = unit_noise_model(false);
    let ens = run(&model, 4, 1, 1);
    let adj = solve_risk_adjustment(&ens, &[2.0], &RegressionBasis::polynomial(0)).unwrap();
    let report = martingale_diagnostics(&adj);
    assert!(report.insufficient_sample);
    assert!(!report.passes());
}

#[test]
fn nonlinear_derivative_is_a_martingale_in_the_mean() {
    let model = unit_noise_model(false);
    let ens = run(&model, 10, 4000, 21);
    let d: Vec<f64> = (0..4000).map(|i| ens.state(i, 10)[0].powi(2)).collect();
    let adj = solve_risk_adjustment(&ens, &d, &RegressionBasis::polynomial(2)).unwrap();
    let report = martingale_diagnostics(&adj);
    assert!(report.passes(), "{report:?}");
    // E[w_T² | x_t] = x_t² + (T − t) is inside the degree-2 span.
    let grid = ens.grid();
    for i in 0..20 {
        let x = ens.state(i, 5)[0];
        assert!((adj.y(i, 5) - (x * x + 1.0 - grid.time(5))).abs() < 0.1);
    }
}

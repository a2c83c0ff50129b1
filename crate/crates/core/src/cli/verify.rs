//! The invariant suite behind `riskmp verify`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::ExperimentConfig;
use crate::adjoint::{martingale_diagnostics, solve_adjoints, LeastSquares, RegressionBasis};
use crate::control::{integrated_hamiltonian, minimize_hamiltonian, msa_solve, HamiltonianContext, MsaConfig};
use crate::error::Result;
use crate::portfolio::{
    brute_force_constant_policy, build_portfolio_model, merton_allocation, unboundedness_diagnostic, PortfolioParams,
};
use crate::risk::{directional_derivative_check, smoothed_positive_part, EmpiricalSample, RiskFunction};
use crate::sde::model::{first_order_model, std_counter_model};
use crate::sde::{
    convex_combine, sample_brownian, simulate_forward, simulate_variational, total_cost, ActionGrid, Check, Dims,
    FnCoefficients, InitialLaw, MeasurePolicy, ModelSpec, TimeGrid,
};

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Unit vector in `L²` of the uniform empirical measure.
fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v = normals(rng, n);
    let norm = (v.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// `E[X] + β E[(X − E[X])₊]`, the unsmoothed mean-semideviation.
fn plain_semideviation(values: &[f64], beta: f64) -> f64 {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    m + beta * values.iter().map(|x| (x - m).max(0.0)).sum::<f64>() / n
}

fn risks() -> Vec<RiskFunction> {
    vec![
        RiskFunction::mean_deviation(0.5).expect("valid"),
        RiskFunction::smoothed_semideviation(0.5, 0.1).expect("valid"),
        RiskFunction::entropic(1.0).expect("valid"),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn risk_checks(suite: &mut Suite, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<f64>> = (0..50).map(|_| normals(&mut rng, 500)).collect();
    for risk in risks() {
        let name = risk.name();
        suite.run(&format!("risk/{name}/translation_invariance"), || {
            let mut worst: f64 = 0.0;
            for (s, v) in samples.iter().enumerate() {
                let a = (s as f64 - 25.0) * 0.37;
                let x = EmpiricalSample::new(v.clone())?;
                let shifted = risk.evaluate(&x.map(|t| t + a));
                worst = worst.max((shifted - risk.evaluate(&x) - a).abs() / (1.0 + a.abs()));
            }
            Ok((worst <= 1e-12, format!("max scaled error {worst:e}")))
        });
        suite.run(&format!("risk/{name}/convexity"), || {
            let mut worst = f64::NEG_INFINITY;
            for pair in samples.chunks(2) {
                let (x, y) = (EmpiricalSample::new(pair[0].clone())?, EmpiricalSample::new(pair[1].clone())?);
                for lam in [0.25, 0.5, 0.75] {
                    let mix: Vec<f64> = pair[0].iter().zip(&pair[1]).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
                    let lhs = risk.evaluate(&EmpiricalSample::new(mix)?);
                    let rhs = lam * risk.evaluate(&x) + (1.0 - lam) * risk.evaluate(&y);
                    worst = worst.max(lhs - rhs);
                }
            }
            Ok((worst <= 1e-12, format!("max excess {worst:e}")))
        });
        suite.run(&format!("risk/{name}/law_invariance"), || {
            let v = &samples[0];
            let x = EmpiricalSample::new(v.clone())?;
            let mut rev = v.clone();
            rev.reverse();
            let r = EmpiricalSample::new(rev)?;
            let mut d1 = risk.l_derivative(&x)?.values;
            let mut d2 = risk.l_derivative(&r)?.values;
            d1.sort_by(f64::total_cmp);
            d2.sort_by(f64::total_cmp);
            let dd = d1.iter().zip(&d2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let dv = (risk.evaluate(&x) - risk.evaluate(&r)).abs();
            Ok((dv <= 1e-12 && dd <= 1e-12, format!("value diff {dv:e}, derivative diff {dd:e}")))
        });
        suite.run(&format!("risk/{name}/l_derivative_central_difference"), || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let x = EmpiricalSample::new(normals(&mut rng, 10_000))?;
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let dir = unit_direction(&mut rng, 10_000);
                worst = worst.max(directional_derivative_check(&risk, &x, &dir, 1e-4)?.abs_error);
            }
            Ok((worst <= 1e-6, format!("max abs error {worst:e} over 20 directions")))
        });
    }
    suite.run("risk/mean_deviation/positive_homogeneity", || {
        let risk = RiskFunction::mean_deviation(0.5)?;
        let mut worst: f64 = 0.0;
        for v in &samples {
            let x = EmpiricalSample::new(v.clone())?;
            for lam in [0.5, 2.0, 10.0] {
                let e = (risk.evaluate(&x.map(|t| lam * t)) - lam * risk.evaluate(&x)).abs();
                worst = worst.max(e / (1.0 + lam));
            }
        }
        Ok((worst <= 1e-12, format!("max scaled error {worst:e}")))
    });
    suite.run("risk/smoothed_semideviation/epsilon_rescaling", || {
        // Smoothing breaks homogeneity; the exact identity is ρ_ε(λX) = λ ρ_{ε/λ}(X).
        let mut worst: f64 = 0.0;
        for v in &samples {
            let x = EmpiricalSample::new(v.clone())?;
            for lam in [0.5, 2.0, 10.0] {
                let lhs = RiskFunction::smoothed_semideviation(0.5, 0.1)?.evaluate(&x.map(|t| lam * t));
                let rhs = lam * RiskFunction::smoothed_semideviation(0.5, 0.1 / lam)?.evaluate(&x);
                worst = worst.max((lhs - rhs).abs() / (1.0 + lam));
            }
        }
        Ok((worst <= 1e-12, format!("max scaled error {worst:e}")))
    });
    for risk in
        [RiskFunction::smoothed_semideviation(0.5, 0.1).expect("valid"), RiskFunction::entropic(1.0).expect("valid")]
    {
        suite.run(&format!("risk/{}/monotonicity", risk.name()), || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11);
            let mut ok = true;
            for v in &samples {
                let bumped: Vec<f64> = v.iter().map(|x| x + rng.random::<f64>()).collect();
                ok &= risk.evaluate(&EmpiricalSample::new(v.clone())?) <= risk.evaluate(&EmpiricalSample::new(bumped)?);
            }
            Ok((ok, "X ≤ Y entrywise on 50 samples".into()))
        });
    }
    suite.run("risk/smoothed_semideviation/sandwich", || {
        let (beta, eps) = (0.5, 0.1);
        let risk = RiskFunction::smoothed_semideviation(beta, eps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a);
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let v = normals(&mut rng, 200);
            let gap = risk.evaluate(&EmpiricalSample::new(v.clone())?) - plain_semideviation(&v, beta);
            ok &= gap > 0.0 && gap <= eps * beta * std::f64::consts::LN_2;
            worst = worst.max(gap);
        }
        Ok((ok, format!("max gap {worst:e} ≤ εβ ln 2 = {:e}", eps * beta * std::f64::consts::LN_2)))
    });
    suite.run("risk/derivative_ranges", || {
        let x = EmpiricalSample::new(samples[1].clone())?;
        let d = RiskFunction::smoothed_semideviation(0.5, 0.1)?.l_derivative(&x)?.values;
        let in_range = d.iter().all(|v| *v > 0.5 && *v < 1.5);
        let e = RiskFunction::entropic(1.0)?.l_derivative(&x)?.values;
        let avg = e.iter().sum::<f64>() / e.len() as f64;
        Ok((
            in_range && (avg - 1.0).abs() < 1e-12,
            format!("semideviation in (1−β, 1+β): {in_range}; entropic mean {avg}"),
        ))
    });
    suite.run("risk/softplus_form", || {
        let worst = [-2.0f64, -0.1, 0.0, 0.3, 4.0]
            .iter()
            .map(|&x| (smoothed_positive_part(x, 0.2) - (x + 0.2 * (1.0 + (-x / 0.2).exp()).ln())).abs())
            .fold(0.0, f64::max);
        Ok((worst < 1e-14, format!("max error {worst:e}")))
    });
}

fn sde_checks(suite: &mut Suite, seed: u64) {
    suite.run("sde/determinism_and_thread_invariance", || {
        let m = build_portfolio_model(&PortfolioParams::default(), 7)?;
        let grid = TimeGrid::new(1.0, 20)?;
        let pol = MeasurePolicy::uniform(7, 20)?;
        let run = |threads: usize| -> Result<Vec<f64>> {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
            pool.install(|| {
                let driver = Arc::new(sample_brownian(&grid, 2000, 1, seed)?);
                Ok(simulate_forward(&m, &pol, &driver, &grid)?.states().to_vec())
            })
        };
        let (a, b, c) = (run(1)?, run(1)?, run(3)?);
        let same = a.iter().zip(&b).chain(a.iter().zip(&c)).all(|(x, y)| x.to_bits() == y.to_bits());
        Ok((same, "1-thread twice and 3-thread runs compared bitwise".into()))
    });
    suite.run("sde/policy_simplex", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let raw: Vec<f64> = (0..5).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            let p = MeasurePolicy::stationary(5, 3, raw.iter().map(|r| r / s).collect())?;
            let q = MeasurePolicy::dirac(5, 3, rng.random_range(0..5))?;
            let mix = convex_combine(&p, &q, rng.random::<f64>())?;
            for k in 0..3 {
                let w = mix.weights(k, &[rng.random::<f64>()]);
                if w.iter().any(|v| *v < 0.0) {
                    return Ok((false, "negative weight".into()));
                }
                worst = worst.max((w.iter().sum::<f64>() - 1.0).abs());
            }
        }
        Ok((worst <= 1e-12, format!("max |Σw − 1| = {worst:e}")))
    });
    suite.run("sde/example1_mixed_policy_is_zero", || {
        let m = std_counter_model();
        let grid = TimeGrid::new(1.0, 50)?;
        let driver = Arc::new(sample_brownian(&grid, 10_000, 1, seed)?);
        let ens = simulate_forward(&m, &MeasurePolicy::uniform(2, 50)?, &driver, &grid)?;
        let zero = ens.states().iter().all(|x| *x == 0.0);
        Ok((zero, "every state of every path".into()))
    });
    suite.run("sde/example1_strict_policy_variance", || {
        let m = std_counter_model();
        let grid = TimeGrid::new(1.0, 50)?;
        let driver = Arc::new(sample_brownian(&grid, 10_000, 1, seed)?);
        let mut ok = true;
        let mut parts = Vec::new();
        for atom in 0..2 {
            let ens = simulate_forward(&m, &MeasurePolicy::dirac(2, 50, atom)?, &driver, &grid)?;
            let sq: Vec<f64> = ens.scalar_states(50).iter().map(|x| x * x).collect();
            let n = sq.len() as f64;
            let mean = sq.iter().sum::<f64>() / n;
            let se = (sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
            ok &= (mean - 1.0).abs() <= 3.0 * se;
            parts.push(format!("atom {atom}: E[x_T²] = {mean:.4} ± {se:.4}"));
        }
        Ok((ok, parts.join("; ")))
    });
    suite.run("sde/example2_second_order_response", || {
        let m = first_order_model();
        let grid = TimeGrid::new(1.0, 50)?;
        let driver = Arc::new(sample_brownian(&grid, 10_000, 1, seed)?);
        let pi = MeasurePolicy::dirac(2, 50, 0)?;
        let q = MeasurePolicy::dirac(2, 50, 1)?;
        let base = simulate_forward(&m, &pi, &driver, &grid)?;
        let mut ok = true;
        let mut parts = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            let pert = simulate_forward(&m, &convex_combine(&pi, &q, eps)?, &driver, &grid)?;
            let worst = (0..=50)
                .map(|k| {
                    let (a, b) = (pert.scalar_states(k), base.scalar_states(k));
                    a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
                })
                .fold(0.0, f64::max);
            ok &= worst <= 4.0 * eps * eps;
            parts.push(format!("ε={eps}: {worst:.3e} ≤ {:.3e}", 4.0 * eps * eps));
        }
        Ok((ok, parts.join("; ")))
    });
    suite.run("sde/strict_control_equivalence", || {
        let p = PortfolioParams::default();
        let m = build_portfolio_model(&p, 5)?;
        let single = m.with_actions(ActionGrid::scalar(m.actions().action(3))?)?;
        let grid = TimeGrid::new(1.0, 20)?;
        let driver = Arc::new(sample_brownian(&grid, 500, 1, seed)?);
        let a = simulate_forward(&m, &MeasurePolicy::dirac(5, 20, 3)?, &driver, &grid)?;
        let b = simulate_forward(&single, &MeasurePolicy::dirac(1, 20, 0)?, &driver, &grid)?;
        Ok((a.states() == b.states(), "Dirac on the grid vs the substituted atom".into()))
    });
    suite.run("sde/linearization_ratio_decreases", || {
        let c = FnCoefficients::new()
            .drift(|_, x, a, out| out[0] = a[0] * x[0].cos() - 0.5 * x[0])
            .diffusion(|_, x, a, out| out[0] = 0.2 + 0.3 * a[0] * x[0].sin())
            .drift_jacobian(|_, x, a, out| out[0] = -a[0] * x[0].sin() - 0.5)
            .diffusion_jacobian(|_, x, a, out| out[0] = 0.3 * a[0] * x[0].cos());
        let m = ModelSpec::new(
            Dims::scalar(),
            Arc::new(c),
            ActionGrid::scalar(&[-1.0, 1.0])?,
            InitialLaw::Dirac(vec![0.3]),
        )?;
        let grid = TimeGrid::new(1.0, 50)?;
        let driver = Arc::new(sample_brownian(&grid, 2000, 1, seed)?);
        let pi = MeasurePolicy::dirac(2, 50, 0)?;
        let q = MeasurePolicy::dirac(2, 50, 1)?;
        let base = simulate_forward(&m, &pi, &driver, &grid)?;
        let var = simulate_variational(&m, &base, &q)?;
        let mut ratios = Vec::new();
        for alpha in [0.2, 0.1, 0.05] {
            let pert = simulate_forward(&m, &convex_combine(&pi, &q, alpha)?, &driver, &grid)?;
            let worst = (0..=50)
                .map(|k| {
                    (0..2000)
                        .map(|i| (pert.state(i, k)[0] - base.state(i, k)[0] - alpha * var.delta(i, k)[0]).powi(2))
                        .sum::<f64>()
                        / 2000.0
                })
                .fold(0.0, f64::max);
            ratios.push(worst.sqrt() / alpha);
        }
        Ok((ratios[1] <= ratios[0] && ratios[2] <= ratios[1], format!("ratios {ratios:?}")))
    });
}

fn portfolio_checks(suite: &mut Suite, seed: u64) {
    let p = PortfolioParams::default();
    let grid = TimeGrid::new(p.horizon, 20).expect("static grid");
    let Ok(driver) = sample_brownian(&grid, 4000, 1, seed).map(Arc::new) else {
        return;
    };
    suite.run("adjoint/risk_neutral_collapse", || {
        let m = build_portfolio_model(&p, 11)?;
        let ens = simulate_forward(&m, &MeasurePolicy::uniform(11, 20)?, &driver, &grid)?;
        let out = solve_adjoints(&m, &ens, &vec![1.0; 4000], &RegressionBasis::polynomial(3))?;
        let y_ok = out.adjustment.y_prime.iter().all(|v| (v - 1.0).abs() <= 1e-8);
        let z_ok = out.adjustment.z_prime.iter().all(|v| v.abs() <= 1e-8);
        Ok((y_ok && z_ok, "y' ≡ 1 and z' ≡ 0 to 1e-8".into()))
    });
    for risk in risks() {
        let name = risk.name();
        suite.run(&format!("adjoint/{name}/martingale_identity_terminal"), || {
            let m = build_portfolio_model(&p, 11)?;
            let ens = simulate_forward(&m, &MeasurePolicy::uniform(11, 20)?, &driver, &grid)?;
            let costs = EmpiricalSample::new(total_cost(&ens, &m))?;
            let d = risk.l_derivative(&costs)?.values;
            let out = solve_adjoints(&m, &ens, &d, &RegressionBasis::polynomial(3))?;
            let mart = martingale_diagnostics(&out.adjustment);
            let terminal = (0..4000).all(|i| out.adjustment.y(i, 20) == d[i] && out.adjoint.y(i, 20)[0] == -d[i]);
            let y_ident = out.adjoint.y.iter().zip(&out.adjustment.y_prime).all(|(y, yp)| (y + yp).abs() <= 1e-2 * yp.abs());
            let z_ident = out
                .adjoint
                .z
                .iter()
                .zip(&out.adjustment.z_prime)
                .all(|(z, zp)| (z + zp).abs() <= 1e-2 * zp.abs().max(f64::MIN_POSITIVE));
            let positive = name == "mean_deviation" || out.adjustment.y_prime.iter().all(|v| *v > 0.0);
            Ok((
                mart.passes() && terminal && y_ident && z_ident && positive,
                format!(
                    "martingale max t {:.3}; terminal exact {terminal}; y = −y' {y_ident}; z = −z' {z_ident}; positive {positive}",
                    mart.max_t_statistic
                ),
            ))
        });
    }
    suite.run("adjoint/basis_degree_monotone", || {
        let m = build_portfolio_model(&p, 11)?;
        let ens = simulate_forward(&m, &MeasurePolicy::uniform(11, 20)?, &driver, &grid)?;
        let xs = ens.cross_section(10);
        let targets: Vec<f64> = ens.scalar_states(20).iter().map(|x| (3.0 * x).sin()).collect();
        let mut prev = f64::INFINITY;
        let mut ok = true;
        for deg in 0..=5 {
            let basis = RegressionBasis::polynomial(deg).with_ridge(crate::adjoint::Ridge::Absolute(0.0));
            let r = LeastSquares::new(&basis, &xs, 1, None)?.project(&targets)?.residual_rms;
            ok &= r <= prev * (1.0 + 1e-12);
            prev = r;
        }
        Ok((ok, "in-sample residual over degrees 0..=5".into()))
    });
    suite.run("control/hamiltonian_linearity_and_minimizer", || {
        let m = build_portfolio_model(&p, 11)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0);
        let mut ok = true;
        for _ in 0..50 {
            let (y, z, yp) =
                ([rng.sample::<f64, _>(StandardNormal)], [rng.sample::<f64, _>(StandardNormal)], rng.random::<f64>());
            let ctx = HamiltonianContext { t: 0.5, x: &[0.0], y: &y, y_prime: yp, z: &z };
            let q1 = MeasurePolicy::uniform(11, 1)?.weights(0, &[0.0]);
            let q2 = minimize_hamiltonian(&ctx, &m, 1e-9)?;
            let lam = rng.random::<f64>();
            let mix: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
            let (h1, h2) = (integrated_hamiltonian(&ctx, &q1, &m)?, integrated_hamiltonian(&ctx, &q2, &m)?);
            ok &= close(integrated_hamiltonian(&ctx, &mix, &m)?, lam * h1 + (1.0 - lam) * h2, 1e-12);
            for a in 0..11 {
                let mut dirac = vec![0.0; 11];
                dirac[a] = 1.0;
                ok &= h2 <= integrated_hamiltonian(&ctx, &dirac, &m)? + 1e-12;
            }
        }
        Ok((ok, "50 random contexts".into()))
    });
    suite.run("control/example1_ties_mix_uniformly", || {
        let ctx = HamiltonianContext { t: 0.0, x: &[0.0], y: &[0.0], y_prime: 1.0, z: &[0.0] };
        let w = minimize_hamiltonian(&ctx, &std_counter_model(), 1e-9)?;
        Ok((w == [0.5, 0.5], format!("{w:?}")))
    });
    suite.run("portfolio/brute_force_oracles", || {
        let phis = ActionGrid::uniform(p.phi_low, p.phi_high, 31)?.points().to_vec();
        let neutral = brute_force_constant_policy(&p, &RiskFunction::Expectation, &phis, &driver, &grid)?;
        let theta = 1.0;
        let ent = brute_force_constant_policy(&p, &RiskFunction::entropic(theta)?, &phis, &driver, &grid)?;
        let near = (neutral.best_phi - merton_allocation(&p)).abs() <= (p.phi_high - p.phi_low) / 30.0 + 1e-12;
        let table_ok = ent.table.iter().all(|(phi, est)| {
            let m = p.r + (p.mu - p.r) * phi - 0.5 * p.sigma * p.sigma * phi * phi;
            let exact = -p.x0 - m * p.horizon + 0.5 * theta * p.sigma * p.sigma * phi * phi * p.horizon;
            (est.value - exact).abs() <= 3.0 * est.standard_error
        });
        let shifted = ent.best_phi <= neutral.best_phi;
        Ok((
            near && table_ok && shifted,
            format!(
                "neutral φ* {} ; entropic φ* {} ; closed-form table within 3 SE {table_ok}",
                neutral.best_phi, ent.best_phi
            ),
        ))
    });
    suite.run("portfolio/msa_risk_neutral_merton", || {
        let m = build_portfolio_model(&p, 31)?;
        let small = Arc::new(sample_brownian(&grid, 2000, 1, seed)?);
        let out = msa_solve(
            &m,
            &RiskFunction::Expectation,
            &MeasurePolicy::uniform(31, 20)?,
            &MsaConfig::default(),
            &small,
            &RegressionBasis::polynomial(3),
            &grid,
        )?;
        let worst = (0..20)
            .map(|k| {
                let w = out.policy.weights(k, &[0.0]);
                let mean: f64 = w.iter().enumerate().map(|(a, wa)| wa * m.actions().action(a)[0]).sum();
                (mean - merton_allocation(&p)).abs()
            })
            .fold(0.0, f64::max);
        let gap = out.report.best().hamiltonian_gap;
        Ok((worst <= 0.05 && gap <= 1e-3, format!("max |mean φ − Merton| {worst:.4}; Hamiltonian gap {gap:e}")))
    });
    suite.run("portfolio/unboundedness_diagnostic", || {
        let d = unboundedness_diagnostic(&p, 1.0, &[100, 1000, 10_000], 20, seed)?;
        Ok((true, format!("max |x_T| by path count: {d:?}")))
    });
}

/// Runs every invariant; the configuration contributes its seed, feasibility
/// exponents and model gradients.
pub fn run_suite(cfg: &ExperimentConfig) -> Vec<Check> {
    let mut suite = Suite { checks: Vec::new() };
    for c in cfg.feasibility_report().checks {
        suite.checks.push(Check { name: format!("feasibility/{}", c.name), ..c });
    }
    suite.run("model/gradients", || {
        let g = cfg.model()?.check_gradients(cfg.horizon(), 20, cfg.seed);
        Ok((g.passes(1e-6), format!("max relative error {:e}", g.max_relative_error)))
    });
    risk_checks(&mut suite, cfg.seed);
    sde_checks(&mut suite, cfg.seed);
    portfolio_checks(&mut suite, cfg.seed);
    suite.checks
}

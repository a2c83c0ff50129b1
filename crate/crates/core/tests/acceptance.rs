//! Acceptance criteria, one pass/fail line each. Runs as a plain binary so
//! the criteria execute sequentially and the single-threaded timing in
//! criterion 1 is not disturbed by other tests.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use riskmp::adjoint::{martingale_diagnostics, AdjointProcesses, RegressionBasis};
use riskmp::control::{msa_solve, MsaConfig, SolveOutcome};
use riskmp::portfolio::{brute_force_constant_policy, build_portfolio_model, risk_premium, PortfolioParams};
use riskmp::risk::{EmpiricalSample, RiskFunction};
use riskmp::sde::model::{first_order_model, std_counter_model};
use riskmp::sde::{
    convex_combine, sample_brownian, simulate_forward, simulate_variational, ActionGrid, BrownianDriver, Dims,
    FnCoefficients, InitialLaw, MeasurePolicy, ModelSpec, TimeGrid,
};

const SEED: u64 = 20_240_601;
const N_PATHS: usize = 20_000;
const N_STEPS: usize = 50;
const N_ACTIONS: usize = 31;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn sample(v: Vec<f64>) -> EmpiricalSample {
    EmpiricalSample::new(v).expect("non-empty sample")
}

/// Shared portfolio setting: default parameters on the full-size driver.
struct Portfolio {
    params: PortfolioParams,
    model: ModelSpec,
    grid: TimeGrid,
    driver: Arc<BrownianDriver>,
}

impl Portfolio {
    fn new() -> Self {
        let params = PortfolioParams::default();
        let model = build_portfolio_model(&params, N_ACTIONS).unwrap();
        let grid = TimeGrid::new(params.horizon, N_STEPS).unwrap();
        let driver = Arc::new(sample_brownian(&grid, N_PATHS, 1, SEED).unwrap());
        Self { params, model, grid, driver }
    }

    fn solve(&self, risk: &RiskFunction) -> SolveOutcome {
        msa_solve(
            &self.model,
            risk,
            &MeasurePolicy::uniform(N_ACTIONS, N_STEPS).unwrap(),
            &MsaConfig::default(),
            &self.driver,
            &RegressionBasis::polynomial(3),
            &self.grid,
        )
        .unwrap()
    }
}

/// Cross-path mean of `∫φ dπ_k(x)` at each step.
fn mean_allocation(out: &SolveOutcome, model: &ModelSpec) -> Vec<f64> {
    let ens = &out.ensemble;
    let mut w = vec![0.0; model.actions().len()];
    (0..ens.n_steps())
        .map(|k| {
            let per_path: Vec<f64> = (0..ens.n_paths())
                .map(|i| {
                    out.policy.weights_into(k, ens.state(i, k), &mut w);
                    w.iter().enumerate().map(|(a, wa)| wa * model.actions().action(a)[0]).sum()
                })
                .collect();
            mean(&per_path)
        })
        .collect()
}

fn criterion_1(pf: &Portfolio) -> (Outcome, SolveOutcome) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let out = pool.install(|| pf.solve(&RiskFunction::Expectation));
    let secs = start.elapsed().as_secs_f64();
    let alloc = mean_allocation(&out, &pf.model);
    let worst = alloc.iter().map(|a| (a - 2.0 / 3.0).abs()).fold(0.0, f64::max);
    let iota = risk_premium(&out.adjoints.adjustment, pf.params.sigma).unwrap();
    let iota_worst = (0..N_STEPS).map(|k| iota.step_mean(k).abs()).fold(0.0, f64::max);
    let passed = worst <= 0.05 && iota_worst <= 1e-3 && secs <= 60.0;
    let detail = format!(
        "max |mean φ_k − 2/3| = {worst:.4}, max |mean ι_k| = {iota_worst:e}, {secs:.1} s on one thread, {} iterations",
        out.report.iterations.len()
    );
    (outcome(passed, detail), out)
}

fn criterion_2() -> Outcome {
    let m = std_counter_model();
    let grid = TimeGrid::new(1.0, N_STEPS).unwrap();
    let driver = Arc::new(sample_brownian(&grid, 10_000, 1, SEED).unwrap());
    let mixed = simulate_forward(&m, &MeasurePolicy::uniform(2, N_STEPS).unwrap(), &driver, &grid).unwrap();
    let zero = mixed.scalar_states(N_STEPS).iter().all(|x| *x == 0.0);
    let mut strict_ok = true;
    let mut detail = format!("mixed x_T ≡ 0: {zero}");
    for atom in 0..2 {
        let ens = simulate_forward(&m, &MeasurePolicy::dirac(2, N_STEPS, atom).unwrap(), &driver, &grid).unwrap();
        let sq: Vec<f64> = ens.scalar_states(N_STEPS).iter().map(|x| x * x).collect();
        let (m2, se) = mean_se(&sq);
        strict_ok &= (m2 - 1.0).abs() <= 3.0 * se;
        detail.push_str(&format!("; a = {}: E[x_T²] = {m2:.4} ± {se:.4}", m.actions().action(atom)[0]));
    }
    outcome(zero && strict_ok, detail)
}

fn criterion_3() -> Outcome {
    let m = first_order_model();
    let t = 1.0;
    let grid = TimeGrid::new(t, N_STEPS).unwrap();
    let driver = Arc::new(sample_brownian(&grid, 10_000, 1, SEED).unwrap());
    let pi = MeasurePolicy::dirac(2, N_STEPS, 0).unwrap();
    let q = MeasurePolicy::dirac(2, N_STEPS, 1).unwrap();
    let base = simulate_forward(&m, &pi, &driver, &grid).unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let pert = simulate_forward(&m, &convex_combine(&pi, &q, eps).unwrap(), &driver, &grid).unwrap();
        let worst = (0..=N_STEPS)
            .map(|k| {
                let (a, b) = (pert.scalar_states(k), base.scalar_states(k));
                mean(&a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).collect::<Vec<_>>())
            })
            .fold(0.0, f64::max);
        let bound = 4.0 * t * eps * eps;
        passed &= worst <= bound;
        parts.push(format!("ε={eps}: {worst:.3e} ≤ {bound:.3e}"));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let values = normals(&mut rng, 10_000);
    let x = sample(values.clone());
    let h = 1e-4;
    let mut passed = true;
    let mut parts = Vec::new();
    for risk in [
        RiskFunction::mean_deviation(0.5).unwrap(),
        RiskFunction::smoothed_semideviation(0.5, 0.1).unwrap(),
        RiskFunction::entropic(1.0).unwrap(),
    ] {
        let d = risk.l_derivative(&x).unwrap().values;
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let raw = normals(&mut rng, values.len());
            let norm = mean(&raw.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
            let dir: Vec<f64> = raw.iter().map(|v| v / norm).collect();
            let plus = sample(values.iter().zip(&dir).map(|(v, e)| v + h * e).collect());
            let minus = sample(values.iter().zip(&dir).map(|(v, e)| v - h * e).collect());
            let fd = (risk.evaluate(&plus) - risk.evaluate(&minus)) / (2.0 * h);
            let inner = mean(&d.iter().zip(&dir).map(|(a, b)| a * b).collect::<Vec<_>>());
            worst = worst.max((fd - inner).abs());
        }
        passed &= worst <= 1e-6;
        parts.push(format!("{} {worst:.2e}", risk.name()));
    }
    outcome(passed, format!("max |fd − ⟨D, Y⟩| over 20 unit directions: {}", parts.join(", ")))
}

/// `E[X] + β E[(X − E[X])₊]` without smoothing.
fn plain_semideviation(values: &[f64], beta: f64) -> f64 {
    let m = mean(values);
    m + beta * mean(&values.iter().map(|x| (x - m).max(0.0)).collect::<Vec<_>>())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let risks = [
        RiskFunction::mean_deviation(0.5).unwrap(),
        RiskFunction::smoothed_semideviation(0.5, 0.1).unwrap(),
        RiskFunction::entropic(1.0).unwrap(),
    ];
    let mut translation: f64 = 0.0;
    let mut homogeneity: f64 = 0.0;
    let mut convexity = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (xv, yv) = (normals(&mut rng, 500), normals(&mut rng, 500));
        let (x, y) = (sample(xv.clone()), sample(yv.clone()));
        let a: f64 = rng.random_range(-5.0..5.0);
        for risk in &risks {
            let shifted = risk.evaluate(&x.map(|v| v + a));
            translation = translation.max((shifted - risk.evaluate(&x) - a).abs());
            for lam in [0.25, 0.5, 0.75] {
                let mix = sample(xv.iter().zip(&yv).map(|(p, q)| lam * p + (1.0 - lam) * q).collect());
                let excess = risk.evaluate(&mix) - lam * risk.evaluate(&x) - (1.0 - lam) * risk.evaluate(&y);
                convexity = convexity.max(excess);
            }
        }
        for lam in [0.5, 2.0, 10.0] {
            let md = &risks[0];
            homogeneity = homogeneity.max((md.evaluate(&x.map(|v| lam * v)) - lam * md.evaluate(&x)).abs());
        }
    }
    let (beta, eps) = (0.5, 0.1);
    let ssd = RiskFunction::smoothed_semideviation(beta, eps).unwrap();
    let cap = eps * beta * std::f64::consts::LN_2;
    let mut sandwich = true;
    let mut widest: f64 = 0.0;
    for _ in 0..100 {
        let v = normals(&mut rng, 500);
        let gap = ssd.evaluate(&sample(v.clone())) - plain_semideviation(&v, beta);
        sandwich &= gap > 0.0 && gap <= cap;
        widest = widest.max(gap);
    }
    let passed = translation <= 1e-12 && homogeneity <= 1e-12 && convexity <= 1e-12 && sandwich;
    outcome(
        passed,
        format!(
            "translation {translation:.1e}, homogeneity (mean-deviation) {homogeneity:.1e}, convexity excess {convexity:.1e}, sandwich gap ≤ {widest:.4e} (cap {cap:.4e})"
        ),
    )
}

fn criterion_6(neutral: &SolveOutcome, aware: &[(&str, &SolveOutcome)]) -> Outcome {
    let adj = &neutral.adjoints.adjustment;
    let y_ok = adj.y_prime.iter().all(|v| (v - 1.0).abs() <= 1e-8);
    let z_ok = adj.z_prime.iter().all(|v| v.abs() <= 1e-8);
    let mut passed = y_ok && z_ok;
    let mut parts = vec![format!("expectation: y' ≡ 1 {y_ok}, z' ≡ 0 {z_ok}")];
    for (name, out) in aware {
        let rep = martingale_diagnostics(&out.adjoints.adjustment);
        passed &= rep.passes();
        parts.push(format!("{name}: max |mean y'_k − mean D|/SE = {:.3}", rep.max_t_statistic));
    }
    outcome(passed, parts.join("; "))
}

fn identity_error(adj: &AdjointProcesses) -> (f64, f64) {
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { (a + b).abs() / b.abs() };
    let y = adj.adjoint.y.iter().zip(&adj.adjustment.y_prime).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    let z = adj.adjoint.z.iter().zip(&adj.adjustment.z_prime).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    (y, z)
}

fn criterion_7(solves: &[(&str, &SolveOutcome)]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, out) in solves {
        let (y, z) = identity_error(&out.adjoints);
        passed &= y <= 1e-2 && z <= 1e-2;
        parts.push(format!("{name}: max rel |y + y'| {y:.1e}, |z + z'| {z:.1e}"));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let c = FnCoefficients::new()
        .drift(|_, x, a, out| out[0] = a[0] * x[0].cos() - 0.5 * x[0])
        .diffusion(|_, x, a, out| out[0] = 0.2 + 0.3 * a[0] * x[0].sin())
        .drift_jacobian(|_, x, a, out| out[0] = -a[0] * x[0].sin() - 0.5)
        .diffusion_jacobian(|_, x, a, out| out[0] = 0.3 * a[0] * x[0].cos());
    let m = ModelSpec::new(
        Dims::scalar(),
        Arc::new(c),
        ActionGrid::scalar(&[-1.0, 1.0]).unwrap(),
        InitialLaw::Dirac(vec![0.3]),
    )
    .unwrap();
    let n_paths = 4000;
    let grid = TimeGrid::new(1.0, N_STEPS).unwrap();
    let driver = Arc::new(sample_brownian(&grid, n_paths, 1, SEED).unwrap());
    let pi = MeasurePolicy::dirac(2, N_STEPS, 0).unwrap();
    let q = MeasurePolicy::dirac(2, N_STEPS, 1).unwrap();
    let base = simulate_forward(&m, &pi, &driver, &grid).unwrap();
    let var = simulate_variational(&m, &base, &q).unwrap();
    let ratios: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&alpha| {
            let pert = simulate_forward(&m, &convex_combine(&pi, &q, alpha).unwrap(), &driver, &grid).unwrap();
            let sup_ms = (0..=N_STEPS)
                .map(|k| {
                    mean(
                        &(0..n_paths)
                            .map(|i| (pert.state(i, k)[0] - base.state(i, k)[0] - alpha * var.delta(i, k)[0]).powi(2))
                            .collect::<Vec<_>>(),
                    )
                })
                .fold(0.0, f64::max);
            sup_ms.sqrt() / alpha
        })
        .collect();
    let passed = ratios[1] <= ratios[0] && ratios[2] <= ratios[1];
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3e}")).collect();
    outcome(passed, format!("residual/α at α = 0.2, 0.1, 0.05: {}", shown.join(", ")))
}

fn criterion_9(pf: &Portfolio, solves: &[(RiskFunction, &SolveOutcome)]) -> Outcome {
    let phis = ActionGrid::uniform(pf.params.phi_low, pf.params.phi_high, 31).unwrap().points().to_vec();
    let mut passed = true;
    let mut parts = Vec::new();
    for (risk, out) in solves {
        let brute = brute_force_constant_policy(&pf.params, risk, &phis, &pf.driver, &pf.grid).unwrap();
        let best = out.report.best();
        let se = brute.table[brute.best_index].1.standard_error;
        let ok = best.objective <= brute.best_value + 2.0 * se;
        passed &= ok;
        parts.push(format!(
            "{}: MSA {:.6} vs best constant {:.6} at φ = {:.4} (+2 SE = {:.6})",
            risk.name(),
            best.objective,
            brute.best_value,
            brute.best_phi,
            brute.best_value + 2.0 * se
        ));
        if let RiskFunction::Entropic { theta } = *risk {
            // C = −x_T is Gaussian: θ⁻¹ ln E[e^{θC}] = −x0 − mT + θσ²φ²T/2.
            let p = &pf.params;
            let worst = brute
                .table
                .iter()
                .map(|(phi, est)| {
                    let m = p.r + (p.mu - p.r) * phi - 0.5 * p.sigma * p.sigma * phi * phi;
                    let exact = -p.x0 - m * p.horizon + 0.5 * theta * p.sigma * p.sigma * phi * phi * p.horizon;
                    (est.value - exact).abs() / est.standard_error
                })
                .fold(0.0, f64::max);
            passed &= worst <= 3.0;
            parts.push(format!("entropic table vs closed form: max {worst:.2} SE"));
            let neutral =
                brute_force_constant_policy(&pf.params, &RiskFunction::Expectation, &phis, &pf.driver, &pf.grid)
                    .unwrap();
            passed &= brute.best_phi <= neutral.best_phi;
            parts.push(format!("entropic φ* {:.4} ≤ risk-neutral φ* {:.4}", brute.best_phi, neutral.best_phi));
        }
    }
    outcome(passed, parts.join("; "))
}

fn solve_cli(config: &Path, out: &Path, threads: usize) -> bool {
    Command::new(env!("CARGO_BIN_EXE_riskmp"))
        .args(["solve", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", &threads.to_string()])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{
            "problem": { "kind": "portfolio" },
            "risk": { "kind": "mean_deviation", "beta": 0.5 },
            "n_steps": 20,
            "n_paths": 3000,
            "msa": { "max_iters": 15 },
            "seed": 7
        }"#,
    )
    .unwrap();
    let runs = [("a", 1), ("b", 1), ("c", 4), ("d", 4)];
    for (name, threads) in runs {
        if !solve_cli(&config, &dir.path().join(name), threads) {
            return outcome(false, format!("solve run {name} with {threads} threads failed"));
        }
    }
    let mut files: Vec<String> = std::fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    for (name, _) in &runs[1..] {
        for f in &files {
            let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
            let b = std::fs::read(dir.path().join(name).join(f)).unwrap_or_default();
            if a != b {
                return outcome(false, format!("{f} differs between run a and run {name}"));
            }
        }
    }
    outcome(true, format!("{} files byte-identical across 2 runs at 1 thread and 2 at 4 threads", files.len()))
}

fn main() {
    // Accept and ignore the libtest arguments cargo passes through.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }

    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut report = |n: usize, o: Outcome| {
        println!("criterion {n:>2}: {}  {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o));
    };

    let pf = Portfolio::new();
    let (c1, neutral) = criterion_1(&pf);
    report(1, c1);
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());

    let md_risk = RiskFunction::mean_deviation(0.5).unwrap();
    let ent_risk = RiskFunction::entropic(1.0).unwrap();
    let md = pf.solve(&md_risk);
    let ent = pf.solve(&ent_risk);
    report(6, criterion_6(&neutral, &[("mean_deviation", &md), ("entropic", &ent)]));
    report(7, criterion_7(&[("expectation", &neutral), ("mean_deviation", &md), ("entropic", &ent)]));
    report(8, criterion_8());
    report(9, criterion_9(&pf, &[(md_risk, &md), (ent_risk, &ent)]));
    report(10, criterion_10());

    let failed: Vec<usize> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    println!("{} criteria, {} failed", results.len(), failed.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

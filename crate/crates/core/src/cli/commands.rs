//! `simulate`, `solve` and `report`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::table::{Stamp, StampedCsv};
use crate::adjoint::martingale_diagnostics;
use crate::control::{msa_solve, SolveOutcome};
use crate::error::{Error, Result};
use crate::portfolio::{merton_allocation, optimal_allocation_from_adjoints, risk_premium};
use crate::risk::EmpiricalSample;
use crate::sde::policy::entropy;
use crate::sde::{sample_brownian, simulate_forward, total_cost, Check, MeasurePolicy, ModelSpec, PathEnsemble};

pub const OBJECTIVE_FILE: &str = "objective_trace.csv";
pub const POLICY_FILE: &str = "policy.csv";
pub const ADJOINT_FILE: &str = "adjoints.csv";
pub const PREMIUM_FILE: &str = "risk_premium.csv";
pub const CHECKS_FILE: &str = "checks.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Mixed policies whose mean per-step entropy stays below this many nats are
/// reported as effectively strict.
pub const STRICT_ENTROPY: f64 = 0.1;

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

fn second_moment(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
    s / n as f64
}

pub fn stamp(cfg: &ExperimentConfig) -> Stamp {
    Stamp { config_hash: cfg.hash(), seed: cfg.seed }
}

fn prepare(
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<(ModelSpec, crate::sde::TimeGrid, Arc<crate::sde::BrownianDriver>)> {
    std::fs::create_dir_all(out)?;
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let driver = Arc::new(sample_brownian(&grid, cfg.n_paths, model.dims().dim_w, cfg.seed)?);
    Ok((model, grid, driver))
}

pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let (model, grid, driver) = prepare(cfg, out)?;
    let policy = MeasurePolicy::uniform(model.actions().len(), grid.n_steps())?;
    let ens = simulate_forward(&model, &policy, &driver, &grid)?;
    let st = stamp(cfg);

    let mut paths = StampedCsv::new(st.clone(), &["step", "time", "x_mean", "x_sd", "x_min", "x_max"]);
    for k in 0..=grid.n_steps() {
        let xs = ens.scalar_states(k);
        let (m, s) = mean_sd(&xs);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        paths.push([
            k.to_string(),
            grid.time(k).to_string(),
            m.to_string(),
            s.to_string(),
            lo.to_string(),
            hi.to_string(),
        ]);
    }
    paths.write(&out.join("paths.csv"))?;

    let costs = total_cost(&ens, &model);
    let (m, s) = mean_sd(&costs);
    let sample = EmpiricalSample::new(costs.clone())?;
    let mut summary = StampedCsv::new(st, &["statistic", "value"]);
    summary.push(["n_paths".to_string(), cfg.n_paths.to_string()]);
    summary.push(["cost_mean".to_string(), m.to_string()]);
    summary.push(["cost_sd".to_string(), s.to_string()]);
    summary.push(["cost_min".to_string(), costs.iter().copied().fold(f64::INFINITY, f64::min).to_string()]);
    summary.push(["cost_max".to_string(), costs.iter().copied().fold(f64::NEG_INFINITY, f64::max).to_string()]);
    summary.push(["risk".to_string(), cfg.risk.evaluate(&sample).to_string()]);
    summary.push(["risk_standard_error".to_string(), cfg.risk.standard_error(&sample).to_string()]);
    summary.write(&out.join("costs.csv"))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub seed: u64,
    pub problem: String,
    pub risk: String,
    pub objective: f64,
    pub standard_error: f64,
    pub converged: bool,
    pub iterations: usize,
    pub best_iteration: usize,
    pub mean_action: f64,
    pub max_step_entropy: f64,
    pub merton_allocation: Option<f64>,
    pub risk_premium_mean: Option<f64>,
    pub checks_passed: usize,
    pub checks_total: usize,
}

struct PolicyStats {
    mean_action: Vec<f64>,
    entropy: Vec<f64>,
}

fn write_policy(outcome: &SolveOutcome, model: &ModelSpec, st: &Stamp, path: &Path) -> Result<PolicyStats> {
    let ens: &PathEnsemble = &outcome.ensemble;
    let grid = ens.grid();
    let n_actions = model.actions().len();
    let mut header =
        vec!["step".to_string(), "time".into(), "mean_action".into(), "sd_action".into(), "entropy".into()];
    header.extend((0..n_actions).map(|a| format!("w_{a}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = StampedCsv::new(st.clone(), &header_refs);
    let mut stats = PolicyStats { mean_action: Vec::new(), entropy: Vec::new() };
    let mut w = vec![0.0; n_actions];
    for k in 0..grid.n_steps() {
        let mut avg = vec![0.0; n_actions];
        let mut acts = Vec::with_capacity(ens.n_paths());
        let mut ent = 0.0;
        for i in 0..ens.n_paths() {
            outcome.policy.weights_into(k, ens.state(i, k), &mut w);
            let mut a_mean = 0.0;
            for (a, wa) in w.iter().enumerate() {
                avg[a] += wa;
                a_mean += wa * model.actions().action(a)[0];
            }
            acts.push(a_mean);
            ent += entropy(&w);
        }
        let np = ens.n_paths() as f64;
        let (m, s) = mean_sd(&acts);
        ent /= np;
        stats.mean_action.push(m);
        stats.entropy.push(ent);
        let mut row = vec![k.to_string(), grid.time(k).to_string(), m.to_string(), s.to_string(), ent.to_string()];
        row.extend(avg.iter().map(|v| (v / np).to_string()));
        table.push(row);
    }
    table.write(path)?;
    Ok(stats)
}

fn write_adjoints(outcome: &SolveOutcome, st: &Stamp, path: &Path) -> Result<()> {
    let adj = &outcome.adjoints;
    let n = adj.adjustment.n_steps;
    let np = adj.adjustment.n_paths;
    let grid = outcome.ensemble.grid();
    let mart = martingale_diagnostics(&adj.adjustment);
    let mut table = StampedCsv::new(
        st.clone(),
        &[
            "step",
            "time",
            "y_prime_mean",
            "y_prime_sd",
            "y_prime_m2",
            "z_prime_mean",
            "z_prime_m2",
            "y_mean",
            "y_m2",
            "z_mean",
            "z_m2",
            "martingale_deviation",
            "martingale_se",
        ],
    );
    for k in 0..=n {
        let yp = adj.adjustment.y_at(k);
        let (ypm, yps) = mean_sd(&yp);
        let y: Vec<f64> = (0..np).map(|i| adj.adjoint.y(i, k)[0]).collect();
        let (zpm, zp2, zm, z2) = if k < n {
            let zp: Vec<f64> = (0..np).map(|i| adj.adjustment.z(i, k)[0]).collect();
            let z: Vec<f64> = (0..np).map(|i| adj.adjoint.z(i, k)[0]).collect();
            (mean_sd(&zp).0, second_moment(zp.iter().copied()), mean_sd(&z).0, second_moment(z.iter().copied()))
        } else {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        };
        let d = &mart.steps[k];
        table.push([
            k.to_string(),
            grid.time(k).to_string(),
            ypm.to_string(),
            yps.to_string(),
            second_moment(yp.iter().copied()).to_string(),
            zpm.to_string(),
            zp2.to_string(),
            mean_sd(&y).0.to_string(),
            second_moment(y.iter().copied()).to_string(),
            zm.to_string(),
            z2.to_string(),
            d.deviation.to_string(),
            d.standard_error.to_string(),
        ]);
    }
    table.write(path)
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

pub fn solve(cfg: &ExperimentConfig, out: &Path) -> Result<Summary> {
    let (model, grid, driver) = prepare(cfg, out)?;
    let init = MeasurePolicy::uniform(model.actions().len(), grid.n_steps())?;
    let outcome = msa_solve(&model, &cfg.risk, &init, &cfg.msa, &driver, &cfg.basis(), &grid)?;
    let st = stamp(cfg);
    let report = &outcome.report;

    let mut trace = StampedCsv::new(
        st.clone(),
        &[
            "iteration",
            "objective",
            "standard_error",
            "hamiltonian_gap",
            "policy_change",
            "alpha",
            "martingale_passes",
            "martingale_max_t",
            "min_y_prime",
        ],
    );
    for r in &report.iterations {
        trace.push([
            r.iteration.to_string(),
            r.objective.to_string(),
            r.standard_error.to_string(),
            r.hamiltonian_gap.to_string(),
            r.policy_change.to_string(),
            r.alpha.to_string(),
            r.martingale_passes.to_string(),
            r.martingale_max_t.to_string(),
            r.min_y_prime.to_string(),
        ]);
    }
    trace.write(&out.join(OBJECTIVE_FILE))?;

    let stats = write_policy(&outcome, &model, &st, &out.join(POLICY_FILE))?;
    write_adjoints(&outcome, &st, &out.join(ADJOINT_FILE))?;

    let mut checks: Vec<Check> = cfg.feasibility_report().checks;
    let best = report.best();
    checks.push(check("msa_converged", report.converged, format!("{} iterations", report.iterations.len())));
    checks.push(check(
        "objective_monotone",
        report.monotone_violations.is_empty(),
        format!("increases beyond 2 SE at iterations {:?}", report.monotone_violations),
    ));
    checks.push(check(
        "martingale_y_prime",
        best.martingale_passes,
        format!("max |deviation|/SE = {}", best.martingale_max_t),
    ));
    checks.push(check(
        "hamiltonian_gap",
        best.hamiltonian_gap <= 1e-3,
        format!("mean gap {} ≤ 1e-3", best.hamiltonian_gap),
    ));
    let max_entropy = stats.entropy.iter().copied().fold(0.0, f64::max);
    checks.push(check(
        "policy_near_strict",
        max_entropy <= STRICT_ENTROPY,
        format!("max mean step entropy {max_entropy} ≤ {STRICT_ENTROPY}"),
    ));

    let mut merton = None;
    let mut premium_mean = None;
    if let Some(params) = cfg.portfolio_params() {
        merton = Some(merton_allocation(params));
        let positive = best.min_y_prime > 0.0;
        let required = cfg.risk.is_monotone();
        let note = if required { "" } else { "; not required, risk function is not monotone" };
        checks.push(check("y_prime_positive", positive || !required, format!("min y' = {}{note}", best.min_y_prime)));
        if positive {
            let iota = risk_premium(&outcome.adjoints.adjustment, params.sigma)?;
            let alloc = optimal_allocation_from_adjoints(&outcome.adjoints.adjustment, params)?;
            premium_mean = Some(iota.mean());
            let mut table = StampedCsv::new(
                st.clone(),
                &["step", "time", "iota_mean", "iota_sd", "allocation_mean", "policy_mean_action"],
            );
            for k in 0..grid.n_steps() {
                let col: Vec<f64> = (0..iota.n_paths).map(|i| iota.at(i, k)).collect();
                let (m, s) = mean_sd(&col);
                let a: Vec<f64> = (0..iota.n_paths).map(|i| alloc[i * iota.n_steps + k]).collect();
                table.push([
                    k.to_string(),
                    grid.time(k).to_string(),
                    m.to_string(),
                    s.to_string(),
                    mean_sd(&a).0.to_string(),
                    stats.mean_action[k].to_string(),
                ]);
            }
            table.write(&out.join(PREMIUM_FILE))?;
        }
    }

    let mut table = StampedCsv::new(st.clone(), &["check", "passed", "detail"]);
    for c in &checks {
        table.push([c.name.clone(), c.passed.to_string(), c.detail.replace(',', ";")]);
    }
    table.write(&out.join(CHECKS_FILE))?;

    let summary = Summary {
        config_hash: st.config_hash.clone(),
        seed: st.seed,
        problem: problem_name(cfg).into(),
        risk: cfg.risk.name().into(),
        objective: best.objective,
        standard_error: best.standard_error,
        converged: report.converged,
        iterations: report.iterations.len(),
        best_iteration: report.best_iteration,
        mean_action: stats.mean_action.iter().sum::<f64>() / stats.mean_action.len() as f64,
        max_step_entropy: max_entropy,
        merton_allocation: merton,
        risk_premium_mean: premium_mean,
        checks_passed: checks.iter().filter(|c| c.passed).count(),
        checks_total: checks.len(),
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    std::fs::write(out.join(SUMMARY_FILE), json)?;
    Ok(summary)
}

pub fn problem_name(cfg: &ExperimentConfig) -> &'static str {
    use super::config::ProblemConfig::*;
    match cfg.problem {
        Portfolio { .. } => "portfolio",
        Example1 { .. } => "example1",
        Example2 { .. } => "example2",
        Custom { .. } => "custom",
    }
}

fn read_checked(path: &Path, st: &Stamp) -> Result<StampedCsv> {
    let t = StampedCsv::read(path)?;
    if &t.stamp != st {
        return Err(Error::ArtifactMismatch(format!(
            "{} was produced by config {} (seed {}), expected {} (seed {})",
            path.display(),
            t.stamp.config_hash,
            t.stamp.seed,
            st.config_hash,
            st.seed
        )));
    }
    Ok(t)
}

/// Renders plot-ready tables from a finished `solve`, refusing inputs that
/// were produced by a different configuration. Returns a text summary.
pub fn report(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    let st = stamp(cfg);
    let summary_text = std::fs::read_to_string(out.join(SUMMARY_FILE))
        .map_err(|e| Error::ArtifactMismatch(format!("cannot read {SUMMARY_FILE}: {e}")))?;
    let summary: Summary =
        serde_json::from_str(&summary_text).map_err(|e| Error::ArtifactMismatch(format!("{SUMMARY_FILE}: {e}")))?;
    if summary.config_hash != st.config_hash || summary.seed != st.seed {
        return Err(Error::ArtifactMismatch(format!("{SUMMARY_FILE} belongs to config {}", summary.config_hash)));
    }

    let trace = read_checked(&out.join(OBJECTIVE_FILE), &st)?;
    let mut t = StampedCsv::new(st.clone(), &["iteration", "objective", "lower_2se", "upper_2se", "hamiltonian_gap"]);
    let (it, obj, se, gap) = (
        trace.numbers("iteration")?,
        trace.numbers("objective")?,
        trace.numbers("standard_error")?,
        trace.numbers("hamiltonian_gap")?,
    );
    for i in 0..it.len() {
        t.push([it[i], obj[i], obj[i] - 2.0 * se[i], obj[i] + 2.0 * se[i], gap[i]]);
    }
    t.write(&out.join("report_objective.csv"))?;

    let policy = read_checked(&out.join(POLICY_FILE), &st)?;
    let mut t = StampedCsv::new(st.clone(), &["time", "mean_action", "lower_1sd", "upper_1sd", "entropy"]);
    let (time, m, sd, ent) = (
        policy.numbers("time")?,
        policy.numbers("mean_action")?,
        policy.numbers("sd_action")?,
        policy.numbers("entropy")?,
    );
    for i in 0..time.len() {
        t.push([time[i], m[i], m[i] - sd[i], m[i] + sd[i], ent[i]]);
    }
    t.write(&out.join("report_policy.csv"))?;

    read_checked(&out.join(ADJOINT_FILE), &st)?;
    let premium_path = out.join(PREMIUM_FILE);
    if premium_path.exists() {
        let p = read_checked(&premium_path, &st)?;
        let mut t = StampedCsv::new(st.clone(), &["time", "iota_mean", "lower_1sd", "upper_1sd", "allocation_mean"]);
        let (time, m, sd, a) =
            (p.numbers("time")?, p.numbers("iota_mean")?, p.numbers("iota_sd")?, p.numbers("allocation_mean")?);
        for i in 0..time.len() {
            t.push([time[i], m[i], m[i] - sd[i], m[i] + sd[i], a[i]]);
        }
        t.write(&out.join("report_risk_premium.csv"))?;
    }

    let mut text = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(text, "problem {} / risk {}", summary.problem, summary.risk);
    let _ = writeln!(
        text,
        "objective {:.6} ± {:.6} after {} iterations (converged: {})",
        summary.objective, summary.standard_error, summary.iterations, summary.converged
    );
    let _ = writeln!(text, "mean action {:.4}, max step entropy {:.4}", summary.mean_action, summary.max_step_entropy);
    if let Some(m) = summary.merton_allocation {
        let _ = writeln!(text, "risk-neutral allocation {m:.4}");
    }
    if let Some(i) = summary.risk_premium_mean {
        let _ = writeln!(text, "mean risk premium {i:.6}");
    }
    let _ = writeln!(text, "checks {}/{}", summary.checks_passed, summary.checks_total);
    Ok(text)
}

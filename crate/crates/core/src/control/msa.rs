//! Damped method of successive approximations on a frozen Brownian driver.
//!
//! Each iteration simulates the current policy, differentiates the risk
//! function at the cost sample, solves `(y', z')` and `(y, z)` backward,
//! minimizes the Hamiltonian at every `(path, step)`, fits a feedback law
//! to the minimizers and mixes it into the policy with weight `α_k`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmin_measure, HamiltonianContext, HamiltonianEval};
use crate::adjoint::{
    adjoint_on, martingale_diagnostics, risk_adjustment_on, AdjointProcesses, CrossSections, RegressionBasis,
};
use crate::error::{Error, Result};
use crate::risk::{EmpiricalSample, RiskFunction};
use crate::sde::model::AtomTable;
use crate::sde::{
    convex_combine, simulate_forward, total_cost, BrownianDriver, FeedbackRule, MeasurePolicy, ModelSpec, PathEnsemble,
    PolicyRule, TimeGrid,
};

/// `α_k = initial / (1 + k / decay)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Damping {
    pub initial: f64,
    pub decay: f64,
}

impl Default for Damping {
    fn default() -> Self {
        Self { initial: 0.5, decay: 10.0 }
    }
}

impl Damping {
    pub fn alpha(&self, k: usize) -> f64 {
        self.initial / (1.0 + k as f64 / self.decay)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MsaConfig {
    pub max_iters: usize,
    pub damping: Damping,
    /// Relative tie tolerance: atoms within `η (1 + |H_min|)` of the minimum
    /// are mixed uniformly.
    pub tie_tolerance: f64,
    /// Stop once `|ΔJ| ≤ tol (1 + |J|)` and the Hamiltonian gap is below
    /// `gap_tolerance`.
    pub objective_tolerance: f64,
    pub gap_tolerance: f64,
    pub seed: u64,
}

impl Default for MsaConfig {
    fn default() -> Self {
        Self {
            max_iters: 60,
            damping: Damping::default(),
            tie_tolerance: 1e-9,
            objective_tolerance: 1e-6,
            gap_tolerance: 1e-4,
            seed: 0,
        }
    }
}

impl MsaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        let Damping { initial, decay } = self.damping;
        if !(initial > 0.0 && initial <= 1.0) {
            return Err(Error::InvalidParameter(format!("initial damping must lie in (0, 1], got {initial}")));
        }
        if !(decay > 0.0) {
            return Err(Error::InvalidParameter(format!("damping decay must be positive, got {decay}")));
        }
        for (name, v) in [
            ("tie_tolerance", self.tie_tolerance),
            ("objective_tolerance", self.objective_tolerance),
            ("gap_tolerance", self.gap_tolerance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub standard_error: f64,
    /// Mean over `(path, step)` of `∫H dπ − min_a H`.
    pub hamiltonian_gap: f64,
    /// Mean over `(path, step)` of `‖π_{k+1}(x) − π_k(x)‖₁`; zero on the
    /// final iteration.
    pub policy_change: f64,
    pub alpha: f64,
    pub martingale_passes: bool,
    pub martingale_max_t: f64,
    pub min_y_prime: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub max_iters_exceeded: bool,
    /// Index of the returned (lowest-objective) iterate.
    pub best_iteration: usize,
    /// Iterations whose objective rose by more than two standard errors.
    pub monotone_violations: Vec<usize>,
}

impl SolveReport {
    pub fn best(&self) -> &IterationRecord {
        &self.iterations[self.best_iteration]
    }
}

/// The lowest-objective iterate together with its forward and backward
/// solutions.
pub struct SolveOutcome {
    pub policy: MeasurePolicy,
    pub report: SolveReport,
    pub ensemble: PathEnsemble,
    pub derivative: Vec<f64>,
    pub adjoints: AdjointProcesses,
}

struct StepMinimizers {
    /// `[path][atom]` minimizing measures.
    weights: Vec<f64>,
    /// `[path][atom]` weights of the current policy.
    current: Vec<f64>,
    gap_sum: f64,
}

fn minimize_step(
    model: &ModelSpec,
    ensemble: &PathEnsemble,
    adjoints: &AdjointProcesses,
    step: usize,
    tie: f64,
) -> StepMinimizers {
    let n_actions = model.actions().len();
    let n_paths = ensemble.n_paths();
    let policy = ensemble.policy();
    let t = ensemble.grid().time(step);
    let table = AtomTable::build(model, t);
    let mut weights = vec![0.0; n_paths * n_actions];
    let mut current = vec![0.0; n_paths * n_actions];
    let gap_sum = weights
        .par_chunks_mut(n_actions)
        .zip(current.par_chunks_mut(n_actions))
        .enumerate()
        .map_init(
            || (HamiltonianEval::new(model), vec![0.0; n_actions]),
            |(eval, values), (i, (w, cur))| {
                let x = ensemble.state(i, step);
                let ctx = HamiltonianContext {
                    t,
                    x,
                    y: adjoints.adjoint.y(i, step),
                    y_prime: adjoints.adjustment.y(i, step),
                    z: adjoints.adjoint.z(i, step),
                };
                match &table {
                    Some(table) => HamiltonianEval::all_atoms_table(table, model, &ctx, values),
                    None => eval.all_atoms(model, &ctx, values),
                }
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                w.copy_from_slice(&argmin_measure(values, tie * (1.0 + min.abs())));
                policy.weights_into(step, x, cur);
                let integrated: f64 = cur.iter().zip(values.iter()).map(|(p, h)| p * h).sum();
                (integrated - min).max(0.0)
            },
        )
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    StepMinimizers { weights, current, gap_sum }
}

/// Regresses each selected atom's minimizer weight on the state features.
fn fit_rule(sections: &CrossSections, step: usize, mins: &StepMinimizers, n_actions: usize) -> Result<PolicyRule> {
    let n_paths = mins.weights.len() / n_actions;
    let first = &mins.weights[..n_actions];
    let uniform = (1..n_paths).all(|i| &mins.weights[i * n_actions..(i + 1) * n_actions] == first);
    if uniform {
        return Ok(PolicyRule::Constant(Arc::new(first.to_vec())));
    }
    let atoms: Vec<usize> =
        (0..n_actions).filter(|&j| (0..n_paths).any(|i| mins.weights[i * n_actions + j] > 0.0)).collect();
    let ls = sections.slice(step);
    let mut coefficients = Vec::with_capacity(atoms.len() * ls.feature_map().len());
    let mut targets = vec![0.0; n_paths];
    for &j in &atoms {
        for (i, t) in targets.iter_mut().enumerate() {
            *t = mins.weights[i * n_actions + j];
        }
        coefficients.extend(ls.coefficients(&targets)?);
    }
    Ok(PolicyRule::Feedback(Arc::new(FeedbackRule::new(ls.feature_map().clone(), atoms, coefficients)?)))
}

/// Sum over paths of `‖q(x_i) − π(x_i)‖₁` at one step, with `π` given by
/// the stored current weights.
fn rule_distance(ensemble: &PathEnsemble, step: usize, rule: &PolicyRule, mins: &StepMinimizers) -> f64 {
    let n_actions = mins.current.len() / ensemble.n_paths();
    mins.current
        .par_chunks(n_actions)
        .enumerate()
        .map_init(
            || vec![0.0; n_actions],
            |q, (i, cur)| {
                rule.weights_into(ensemble.state(i, step), q);
                q.iter().zip(cur).map(|(a, b)| (a - b).abs()).sum::<f64>()
            },
        )
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

struct Evaluation {
    ensemble: PathEnsemble,
    derivative: Vec<f64>,
    adjoints: AdjointProcesses,
    sections: CrossSections,
    objective: f64,
    standard_error: f64,
}

fn evaluate(
    model: &ModelSpec,
    risk: &RiskFunction,
    policy: &MeasurePolicy,
    driver: &Arc<BrownianDriver>,
    grid: &TimeGrid,
    basis: &RegressionBasis,
) -> Result<Evaluation> {
    let ensemble = simulate_forward(model, policy, driver, grid)?;
    let sample = EmpiricalSample::new(total_cost(&ensemble, model))?;
    let objective = risk.evaluate(&sample);
    let standard_error = risk.standard_error(&sample);
    let derivative = risk.l_derivative(&sample)?.values;
    let sections = CrossSections::new(&ensemble, basis)?;
    let adjustment = risk_adjustment_on(&sections, &ensemble, &derivative)?;
    let adjoint = adjoint_on(&sections, model, &ensemble, &adjustment)?;
    Ok(Evaluation {
        ensemble,
        derivative,
        adjoints: AdjointProcesses { adjustment, adjoint },
        sections,
        objective,
        standard_error,
    })
}

/// Runs damped successive approximations from `init` on the frozen
/// `driver` and returns the lowest-objective iterate.
pub fn msa_solve(
    model: &ModelSpec,
    risk: &RiskFunction,
    init: &MeasurePolicy,
    cfg: &MsaConfig,
    driver: &Arc<BrownianDriver>,
    basis: &RegressionBasis,
    grid: &TimeGrid,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    risk.validate()?;
    let n_actions = model.actions().len();
    let n = grid.n_steps();
    let mut policy = init.clone();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut monotone_violations = Vec::new();
    let mut best: Option<(usize, MeasurePolicy, Evaluation)> = None;
    let mut converged = false;

    for k in 0..cfg.max_iters {
        let eval = evaluate(model, risk, &policy, driver, grid, basis)?;
        let mart = martingale_diagnostics(&eval.adjoints.adjustment);
        let min_y_prime = eval.adjoints.adjustment.y_prime.iter().copied().fold(f64::INFINITY, f64::min);

        let mut gap = 0.0;
        let mut distance = 0.0;
        let mut rules = Vec::with_capacity(n);
        for step in 0..n {
            let mins = minimize_step(model, &eval.ensemble, &eval.adjoints, step, cfg.tie_tolerance);
            gap += mins.gap_sum;
            let rule = fit_rule(&eval.sections, step, &mins, n_actions)?;
            distance += rule_distance(&eval.ensemble, step, &rule, &mins);
            rules.push(rule);
        }
        let cells = (eval.ensemble.n_paths() * n) as f64;
        gap /= cells;

        if let Some(prev) = records.last() {
            if eval.objective > prev.objective + 2.0 * eval.standard_error {
                monotone_violations.push(k);
            }
        }
        let done = gap <= cfg.gap_tolerance
            && records.last().is_some_and(|p| {
                (eval.objective - p.objective).abs() <= cfg.objective_tolerance * (1.0 + eval.objective.abs())
            });
        let alpha = cfg.damping.alpha(k);
        let last = done || k + 1 == cfg.max_iters;

        let mut record = IterationRecord {
            iteration: k,
            objective: eval.objective,
            standard_error: eval.standard_error,
            hamiltonian_gap: gap,
            policy_change: 0.0,
            alpha,
            martingale_passes: mart.passes(),
            martingale_max_t: mart.max_t_statistic,
            min_y_prime,
        };
        let next = if last {
            None
        } else {
            let target = MeasurePolicy::from_rules(n_actions, rules)?;
            let next = convex_combine(&policy, &target, alpha)?;
            // π_{k+1} − π_k = α (q − π_k).
            record.policy_change = alpha * distance / cells;
            Some(next)
        };
        records.push(record);

        let improves = best.as_ref().is_none_or(|(_, _, b)| eval.objective < b.objective);
        match next {
            Some(next) => {
                let prev = std::mem::replace(&mut policy, next);
                if improves {
                    best = Some((k, prev, eval));
                }
            }
            None => {
                if improves {
                    best = Some((k, policy.clone(), eval));
                }
            }
        }
        if done {
            converged = true;
            break;
        }
    }

    let (best_iteration, policy, eval) = best.expect("at least one iteration runs");
    Ok(SolveOutcome {
        policy,
        report: SolveReport {
            iterations: records,
            converged,
            max_iters_exceeded: !converged,
            best_iteration,
            monotone_violations,
        },
        ensemble: eval.ensemble,
        derivative: eval.derivative,
        adjoints: eval.adjoints,
    })
}

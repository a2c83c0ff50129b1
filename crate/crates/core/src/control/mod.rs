//! Hamiltonian evaluation, pointwise minimization over atom measures, the
//! risk-aware objective and the successive-approximation solver.

pub mod msa;

use crate::error::{Error, Result};
use crate::risk::{EmpiricalSample, RiskFunction};
use crate::sde::model::AtomTable;
use crate::sde::{simulate_forward, total_cost, BrownianDriver, MeasurePolicy, ModelSpec, TimeGrid};
use std::sync::Arc;

pub use msa::{msa_solve, Damping, IterationRecord, MsaConfig, SolveOutcome, SolveReport};

/// Arguments of the Hamiltonian at one `(t, x)`. `z` is `dim_w × dim_x`,
/// row-major.
#[derive(Debug, Clone, Copy)]
pub struct HamiltonianContext<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub y_prime: f64,
    pub z: &'a [f64],
}

impl HamiltonianContext<'_> {
    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        let d = model.dims();
        if self.x.len() != d.dim_x || self.y.len() != d.dim_x || self.z.len() != d.dim_w * d.dim_x {
            return Err(Error::DimensionMismatch(format!(
                "context has |x|={}, |y|={}, |z|={}; model expects {}, {}, {}",
                self.x.len(),
                self.y.len(),
                self.z.len(),
                d.dim_x,
                d.dim_x,
                d.dim_w * d.dim_x
            )));
        }
        Ok(())
    }
}

/// Scratch buffers for repeated Hamiltonian evaluation.
pub(crate) struct HamiltonianEval {
    b: Vec<f64>,
    s: Vec<f64>,
}

impl HamiltonianEval {
    pub(crate) fn new(model: &ModelSpec) -> Self {
        let d = model.dims();
        Self { b: vec![0.0; d.dim_x], s: vec![0.0; d.dim_x * d.dim_w] }
    }

    pub(crate) fn at(&mut self, model: &ModelSpec, ctx: &HamiltonianContext, a: &[f64]) -> f64 {
        let d = model.dims();
        let (dx, dw) = (d.dim_x, d.dim_w);
        let coeffs = model.coefficients();
        coeffs.drift(ctx.t, ctx.x, a, &mut self.b);
        coeffs.diffusion(ctx.t, ctx.x, a, &mut self.s);
        let mut h = ctx.y_prime * coeffs.cost_rate(ctx.t, ctx.x, a);
        for i in 0..dx {
            h += ctx.y[i] * self.b[i];
            for j in 0..dw {
                h += ctx.z[j * dx + i] * self.s[i * dw + j];
            }
        }
        h
    }

    pub(crate) fn all_atoms(&mut self, model: &ModelSpec, ctx: &HamiltonianContext, out: &mut [f64]) {
        for (idx, h) in out.iter_mut().enumerate() {
            *h = self.at(model, ctx, model.actions().action(idx));
        }
    }

    /// `all_atoms` for state-free coefficients tabulated at `ctx.t`.
    pub(crate) fn all_atoms_table(table: &AtomTable, model: &ModelSpec, ctx: &HamiltonianContext, out: &mut [f64]) {
        let d = model.dims();
        let (dx, dw) = (d.dim_x, d.dim_w);
        for (a, h) in out.iter_mut().enumerate() {
            let (b, s) = (&table.b[a * dx..(a + 1) * dx], &table.s[a * dx * dw..(a + 1) * dx * dw]);
            let mut v = ctx.y_prime * table.c[a];
            for i in 0..dx {
                v += ctx.y[i] * b[i];
                for j in 0..dw {
                    v += ctx.z[j * dx + i] * s[i * dw + j];
                }
            }
            *h = v;
        }
    }
}

/// `H = y·b + y'c + Σ_{j,i} z_{ji} σ_{ij}` at a single action.
pub fn hamiltonian(ctx: &HamiltonianContext, action: &[f64], model: &ModelSpec) -> Result<f64> {
    ctx.validate(model)?;
    if action.len() != model.dims().dim_a {
        return Err(Error::DimensionMismatch(format!(
            "action has {} components, model expects {}",
            action.len(),
            model.dims().dim_a
        )));
    }
    Ok(HamiltonianEval::new(model).at(model, ctx, action))
}

/// `∫H dq` for a measure on the action grid.
pub fn integrated_hamiltonian(ctx: &HamiltonianContext, weights: &[f64], model: &ModelSpec) -> Result<f64> {
    ctx.validate(model)?;
    if weights.len() != model.actions().len() {
        return Err(Error::DimensionMismatch("weights do not match the action grid".into()));
    }
    let mut values = vec![0.0; weights.len()];
    HamiltonianEval::new(model).all_atoms(model, ctx, &mut values);
    Ok(weights.iter().zip(&values).map(|(w, h)| w * h).sum())
}

/// Uniform weights over the atoms whose value lies within `eta` of the
/// minimum.
pub fn argmin_measure(values: &[f64], eta: f64) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out: Vec<f64> = values.iter().map(|&h| if h - min <= eta { 1.0 } else { 0.0 }).collect();
    let count: f64 = out.iter().sum();
    if count == 0.0 {
        // Only reachable with NaN values; fall back to the first atom.
        out[0] = 1.0;
        return out;
    }
    for w in &mut out {
        *w /= count;
    }
    out
}

/// The integrated Hamiltonian is linear in the measure, so the infimum is
/// attained on atoms; ties within `eta` are mixed uniformly.
pub fn minimize_hamiltonian(ctx: &HamiltonianContext, model: &ModelSpec, eta: f64) -> Result<Vec<f64>> {
    ctx.validate(model)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("tie tolerance must be positive, got {eta}")));
    }
    let mut values = vec![0.0; model.actions().len()];
    HamiltonianEval::new(model).all_atoms(model, ctx, &mut values);
    Ok(argmin_measure(&values, eta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveEstimate {
    pub value: f64,
    pub standard_error: f64,
}

/// `ρ(C)` on the empirical total-cost sample of a forward simulation.
pub fn objective(
    model: &ModelSpec,
    risk: &RiskFunction,
    policy: &MeasurePolicy,
    driver: &Arc<BrownianDriver>,
    grid: &TimeGrid,
) -> Result<ObjectiveEstimate> {
    risk.validate()?;
    let ens = simulate_forward(model, policy, driver, grid)?;
    let sample = EmpiricalSample::new(total_cost(&ens, model))?;
    Ok(ObjectiveEstimate { value: risk.evaluate(&sample), standard_error: risk.standard_error(&sample) })
}

//! Log-wealth portfolio allocation between a bond and one stock.
//!
//! With allocation `φ` in the stock, log-wealth follows
//! `dx = [r + (μ−r)φ − σ²φ²/2] dt + σφ dw`; the cost is `C = −x_T`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjoint::RiskAdjustment;
use crate::control::{objective, ObjectiveEstimate};
use crate::error::{Error, Result};
use crate::risk::RiskFunction;
use crate::sde::{
    sample_brownian, simulate_forward, ActionGrid, BrownianDriver, Coefficients, Dims, InitialLaw, MeasurePolicy,
    ModelSpec, TimeGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortfolioParams {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    pub phi_low: f64,
    pub phi_high: f64,
    pub x0: f64,
    pub horizon: f64,
    /// Permits `phi_low = 0` (no stock floor).
    pub allow_zero_lower: bool,
}

impl Default for PortfolioParams {
    fn default() -> Self {
        Self {
            r: 0.02,
            mu: 0.08,
            sigma: 0.3,
            phi_low: 0.1,
            phi_high: 1.5,
            x0: 0.0,
            horizon: 1.0,
            allow_zero_lower: false,
        }
    }
}

impl PortfolioParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r", self.r), ("mu", self.mu), ("x0", self.x0)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::NonPositiveHorizon(self.horizon));
        }
        let lower_ok = if self.allow_zero_lower { self.phi_low >= 0.0 } else { self.phi_low > 0.0 };
        if !lower_ok || !(self.phi_low < self.phi_high) || !self.phi_high.is_finite() {
            return Err(Error::InvalidBounds(format!(
                "need {} phi_low < phi_high < ∞, got [{}, {}]",
                if self.allow_zero_lower { "0 ≤" } else { "0 <" },
                self.phi_low,
                self.phi_high
            )));
        }
        Ok(())
    }

    pub fn clip(&self, phi: f64) -> f64 {
        phi.clamp(self.phi_low, self.phi_high)
    }
}

#[derive(Debug, Clone, Copy)]
struct PortfolioCoefficients {
    r: f64,
    mu: f64,
    sigma: f64,
}

impl Coefficients for PortfolioCoefficients {
    fn drift(&self, _t: f64, _x: &[f64], a: &[f64], out: &mut [f64]) {
        let phi = a[0];
        out[0] = self.r + (self.mu - self.r) * phi - 0.5 * self.sigma * self.sigma * phi * phi;
    }
    fn diffusion(&self, _t: f64, _x: &[f64], a: &[f64], out: &mut [f64]) {
        out[0] = self.sigma * a[0];
    }
    fn cost_rate(&self, _t: f64, _x: &[f64], _a: &[f64]) -> f64 {
        0.0
    }
    fn terminal_cost(&self, x: &[f64]) -> f64 {
        -x[0]
    }
    fn drift_jacobian(&self, _t: f64, _x: &[f64], _a: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
    fn diffusion_jacobian(&self, _t: f64, _x: &[f64], _a: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
    fn cost_gradient(&self, _t: f64, _x: &[f64], _a: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
    fn terminal_gradient(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = -1.0;
    }
    fn state_free(&self) -> bool {
        true
    }
}

fn model_on(params: &PortfolioParams, actions: ActionGrid) -> Result<ModelSpec> {
    let coeffs = PortfolioCoefficients { r: params.r, mu: params.mu, sigma: params.sigma };
    ModelSpec::new(Dims::scalar(), Arc::new(coeffs), actions, InitialLaw::Dirac(vec![params.x0]))
}

/// The portfolio model on `n_actions` evenly spaced allocations in
/// `[phi_low, phi_high]`.
pub fn build_portfolio_model(params: &PortfolioParams, n_actions: usize) -> Result<ModelSpec> {
    params.validate()?;
    if n_actions < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 actions, got {n_actions}")));
    }
    model_on(params, ActionGrid::uniform(params.phi_low, params.phi_high, n_actions)?)
}

/// `clip((μ − r)/σ²)`, the risk-neutral optimum.
pub fn merton_allocation(params: &PortfolioParams) -> f64 {
    params.clip((params.mu - params.r) / (params.sigma * params.sigma))
}

/// `ι = σ z'/y'` on `[path][step]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskPremiumPath {
    pub n_paths: usize,
    pub n_steps: usize,
    pub values: Vec<f64>,
}

impl RiskPremiumPath {
    pub fn at(&self, path: usize, step: usize) -> f64 {
        self.values[path * self.n_steps + step]
    }

    pub fn step_mean(&self, step: usize) -> f64 {
        (0..self.n_paths).map(|i| self.at(i, step)).sum::<f64>() / self.n_paths as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

pub fn risk_premium(adjustment: &RiskAdjustment, sigma: f64) -> Result<RiskPremiumPath> {
    if adjustment.dim_w != 1 {
        return Err(Error::DimensionMismatch("risk premium needs a scalar Brownian motion".into()));
    }
    let (n_paths, n) = (adjustment.n_paths, adjustment.n_steps);
    let mut values = Vec::with_capacity(n_paths * n);
    for i in 0..n_paths {
        for k in 0..n {
            let yp = adjustment.y(i, k);
            if !(yp > 0.0) {
                return Err(Error::NonPositiveAdjustment { path: i, step: k, value: yp });
            }
            values.push(sigma * adjustment.z(i, k)[0] / yp);
        }
    }
    Ok(RiskPremiumPath { n_paths, n_steps: n, values })
}

/// `φ = clip((μ − r + ι)/σ²)` on `[path][step]`.
pub fn optimal_allocation_from_adjoints(adjustment: &RiskAdjustment, params: &PortfolioParams) -> Result<Vec<f64>> {
    let iota = risk_premium(adjustment, params.sigma)?;
    let s2 = params.sigma * params.sigma;
    Ok(iota.values.iter().map(|i| params.clip((params.mu - params.r + i) / s2)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub best_phi: f64,
    pub best_value: f64,
    pub best_index: usize,
    /// `(φ, objective)` for every grid point, in grid order.
    pub table: Vec<(f64, ObjectiveEstimate)>,
}

/// Evaluates the objective of every constant strict allocation in
/// `phi_grid` on the shared driver.
pub fn brute_force_constant_policy(
    params: &PortfolioParams,
    risk: &RiskFunction,
    phi_grid: &[f64],
    driver: &Arc<BrownianDriver>,
    grid: &TimeGrid,
) -> Result<BruteForceResult> {
    params.validate()?;
    if phi_grid.is_empty() {
        return Err(Error::InvalidParameter("empty allocation grid".into()));
    }
    if let Some(phi) = phi_grid.iter().find(|p| !(**p >= params.phi_low && **p <= params.phi_high)) {
        return Err(Error::InvalidBounds(format!(
            "allocation {phi} outside [{}, {}]",
            params.phi_low, params.phi_high
        )));
    }
    let table = phi_grid
        .par_iter()
        .map(|&phi| {
            let model = model_on(params, ActionGrid::scalar(&[phi])?)?;
            let policy = MeasurePolicy::dirac(1, grid.n_steps(), 0)?;
            Ok((phi, objective(&model, risk, &policy, driver, grid)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let best_index = (0..table.len()).fold(0, |b, i| if table[i].1.value < table[b].1.value { i } else { b });
    Ok(BruteForceResult { best_phi: table[best_index].0, best_value: table[best_index].1.value, best_index, table })
}

/// `max_i |x_T^i|` under a constant allocation for each path count. Path
/// streams are nested, so the maxima are nondecreasing in the count.
pub fn unboundedness_diagnostic(
    params: &PortfolioParams,
    phi: f64,
    path_counts: &[usize],
    n_steps: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    params.validate()?;
    let model = model_on(params, ActionGrid::scalar(&[phi])?)?;
    let grid = TimeGrid::new(params.horizon, n_steps)?;
    let policy = MeasurePolicy::dirac(1, n_steps, 0)?;
    path_counts
        .iter()
        .map(|&n| {
            let driver = Arc::new(sample_brownian(&grid, n, 1, seed)?);
            let ens = simulate_forward(&model, &policy, &driver, &grid)?;
            let max = ens.scalar_states(n_steps).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            Ok((n, max))
        })
        .collect()
}

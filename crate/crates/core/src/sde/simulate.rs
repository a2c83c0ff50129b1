//! Euler–Maruyama for the vague-controlled SDE and its running cost.
//!
//! Coefficients are averaged against the control measure *before* they
//! multiply `Δt` and `Δw`:
//!
//! ```text
//! x_{k+1} = x_k + [Σ_a w_a b(t_k, x_k, a)] Δt + [Σ_a w_a σ(t_k, x_k, a)] Δw_k
//! x'_{k+1} = x'_k + [Σ_a w_a c(t_k, x_k, a)] Δt
//! ```

use std::sync::Arc;

use rayon::prelude::*;

use super::brownian::{aux_stream, BrownianDriver};
use super::grid::TimeGrid;
use super::model::{AtomTable, Dims, InitialLaw, ModelSpec};
use super::policy::MeasurePolicy;
use crate::error::{Error, Result};

/// The simulated forward system on a shared grid. Immutable once built.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    grid: TimeGrid,
    dims: Dims,
    n_paths: usize,
    states: Vec<f64>,
    running: Vec<f64>,
    driver: Arc<BrownianDriver>,
    policy: MeasurePolicy,
}

impl PathEnsemble {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps()
    }

    pub fn driver(&self) -> &Arc<BrownianDriver> {
        &self.driver
    }

    pub fn policy(&self) -> &MeasurePolicy {
        &self.policy
    }

    /// State of path `i` at node `k`.
    #[inline]
    pub fn state(&self, path: usize, step: usize) -> &[f64] {
        let dx = self.dims.dim_x;
        let start = (path * (self.grid.n_steps() + 1) + step) * dx;
        &self.states[start..start + dx]
    }

    #[inline]
    pub fn running_cost(&self, path: usize, step: usize) -> f64 {
        self.running[path * (self.grid.n_steps() + 1) + step]
    }

    /// All path states at node `k`, row-major `n_paths × dim_x`.
    pub fn cross_section(&self, step: usize) -> Vec<f64> {
        let dx = self.dims.dim_x;
        let mut out = Vec::with_capacity(self.n_paths * dx);
        for i in 0..self.n_paths {
            out.extend_from_slice(self.state(i, step));
        }
        out
    }

    /// Raw `[path][node][component]` state array.
    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn running_costs(&self) -> &[f64] {
        &self.running
    }

    /// First coordinate of every path at node `k`.
    pub fn scalar_states(&self, step: usize) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.state(i, step)[0]).collect()
    }
}

pub(crate) fn check_compat(
    model: &ModelSpec,
    policy: &MeasurePolicy,
    driver: &BrownianDriver,
    grid: &TimeGrid,
) -> Result<()> {
    let dims = model.dims();
    if driver.dim_w() != dims.dim_w {
        return Err(Error::DimensionMismatch(format!(
            "driver has {} Brownian components, model expects {}",
            driver.dim_w(),
            dims.dim_w
        )));
    }
    if !driver.compatible_with(grid) {
        return Err(Error::DimensionMismatch("driver was sampled on a different grid".into()));
    }
    if policy.n_steps() != grid.n_steps() {
        return Err(Error::DimensionMismatch(format!(
            "policy covers {} steps, grid has {}",
            policy.n_steps(),
            grid.n_steps()
        )));
    }
    if policy.n_actions() != model.actions().len() {
        return Err(Error::DimensionMismatch(format!(
            "policy is over {} actions, model grid has {}",
            policy.n_actions(),
            model.actions().len()
        )));
    }
    Ok(())
}

pub(crate) fn initial_state(model: &ModelSpec, seed: u64, path: usize, out: &mut [f64]) {
    match model.initial() {
        InitialLaw::Dirac(x0) => out.copy_from_slice(x0),
        InitialLaw::Sampler(f) => {
            let mut rng = aux_stream(seed, path);
            f(&mut rng, out);
        }
    }
}

/// Measure-averaged drift, diffusion and cost rate at one point.
pub(crate) struct Averager {
    pub b: Vec<f64>,
    pub s: Vec<f64>,
    pub c: f64,
    tmp_b: Vec<f64>,
    tmp_s: Vec<f64>,
}

impl Averager {
    pub fn new(dims: Dims) -> Self {
        Self {
            b: vec![0.0; dims.dim_x],
            s: vec![0.0; dims.dim_x * dims.dim_w],
            c: 0.0,
            tmp_b: vec![0.0; dims.dim_x],
            tmp_s: vec![0.0; dims.dim_x * dims.dim_w],
        }
    }

    /// `weights` may be signed (e.g. `q − π`); zero entries are skipped.
    pub fn average(&mut self, model: &ModelSpec, t: f64, x: &[f64], weights: &[f64]) {
        let coeffs = model.coefficients();
        self.b.fill(0.0);
        self.s.fill(0.0);
        self.c = 0.0;
        for (ai, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let a = model.actions().action(ai);
            coeffs.drift(t, x, a, &mut self.tmp_b);
            coeffs.diffusion(t, x, a, &mut self.tmp_s);
            for (o, v) in self.b.iter_mut().zip(&self.tmp_b) {
                *o += w * v;
            }
            for (o, v) in self.s.iter_mut().zip(&self.tmp_s) {
                *o += w * v;
            }
            self.c += w * coeffs.cost_rate(t, x, a);
        }
    }

    /// Same as `average`, reading per-atom values from a table.
    pub fn average_table(&mut self, table: &AtomTable, weights: &[f64]) {
        let (dx, m) = (self.b.len(), self.s.len());
        self.b.fill(0.0);
        self.s.fill(0.0);
        self.c = 0.0;
        for (ai, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, v) in self.b.iter_mut().zip(&table.b[ai * dx..(ai + 1) * dx]) {
                *o += w * v;
            }
            for (o, v) in self.s.iter_mut().zip(&table.s[ai * m..(ai + 1) * m]) {
                *o += w * v;
            }
            self.c += w * table.c[ai];
        }
    }
}

pub fn simulate_forward(
    model: &ModelSpec,
    policy: &MeasurePolicy,
    driver: &Arc<BrownianDriver>,
    grid: &TimeGrid,
) -> Result<PathEnsemble> {
    check_compat(model, policy, driver, grid)?;
    let dims = model.dims();
    let (dx, dw) = (dims.dim_x, dims.dim_w);
    let n = grid.n_steps();
    let n_paths = driver.n_paths();
    let dt = grid.dt();
    let mut states = vec![0.0; n_paths * (n + 1) * dx];
    let mut running = vec![0.0; n_paths * (n + 1)];
    let tables: Option<Vec<AtomTable>> = (0..n).map(|k| AtomTable::build(model, grid.time(k))).collect();
    // State-free coefficients under state-independent weights average to
    // the same values on every path.
    let shared: Vec<Option<Averager>> = (0..n)
        .map(|k| {
            let tables = tables.as_ref()?;
            if !policy.step_is_constant(k) {
                return None;
            }
            let mut avg = Averager::new(dims);
            let mut w = vec![0.0; policy.n_actions()];
            policy.weights_into(k, &[], &mut w);
            avg.average_table(&tables[k], &w);
            Some(avg)
        })
        .collect();

    let outcomes: Vec<Result<()>> = states
        .par_chunks_mut((n + 1) * dx)
        .zip(running.par_chunks_mut(n + 1))
        .enumerate()
        .map(|(i, (xs, cs))| {
            let mut local = Averager::new(dims);
            let mut w = vec![0.0; policy.n_actions()];
            initial_state(model, driver.seed(), i, &mut xs[..dx]);
            if xs[..dx].iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalBlowup { step: 0, path: i });
            }
            cs[0] = 0.0;
            for k in 0..n {
                let t = grid.time(k);
                let (head, tail) = xs.split_at_mut((k + 1) * dx);
                let x = &head[k * dx..];
                let avg = match (&shared[k], &tables) {
                    (Some(fixed), _) => fixed,
                    (None, Some(tables)) => {
                        policy.weights_into(k, x, &mut w);
                        local.average_table(&tables[k], &w);
                        &local
                    }
                    (None, None) => {
                        policy.weights_into(k, x, &mut w);
                        local.average(model, t, x, &w);
                        &local
                    }
                };
                let dwk = driver.increment(i, k);
                let next = &mut tail[..dx];
                for r in 0..dx {
                    let mut v = x[r] + avg.b[r] * dt;
                    for (s, w) in avg.s[r * dw..(r + 1) * dw].iter().zip(dwk) {
                        v += s * w;
                    }
                    next[r] = v;
                }
                cs[k + 1] = cs[k] + avg.c * dt;
                if next.iter().any(|v| !v.is_finite()) || !cs[k + 1].is_finite() {
                    return Err(Error::NumericalBlowup { step: k + 1, path: i });
                }
            }
            Ok(())
        })
        .collect();
    if let Some(e) = outcomes.into_iter().find_map(|r| r.err()) {
        return Err(e);
    }
    Ok(PathEnsemble {
        grid: grid.clone(),
        dims,
        n_paths,
        states,
        running,
        driver: Arc::clone(driver),
        policy: policy.clone(),
    })
}

/// `C_i = x'_i(T) + g(x_i(T))`.
pub fn total_cost(ensemble: &PathEnsemble, model: &ModelSpec) -> Vec<f64> {
    let n = ensemble.n_steps();
    (0..ensemble.n_paths())
        .into_par_iter()
        .map(|i| ensemble.running_cost(i, n) + model.coefficients().terminal_cost(ensemble.state(i, n)))
        .collect()
}

//! Backward regression solvers for the risk adjustment `(y', z')` and the
//! adjoint pair `(y, z)`.
//!
//! Conditional expectations are cross-sectional polynomial regressions on
//! the state at each node. The martingale integrands use the centered
//! increment projection `Ê[(Y_{k+1} − Ê[Y_{k+1} | x_k]) Δw_k | x_k] / Δt`.
//! The adjoint is solved in multi-step form: the regression target at node
//! `k` is the path-wise sum `y_T + Σ_{j ≥ k} ∇_x H_j Δt`.

use rayon::prelude::*;

use super::basis::RegressionBasis;
use super::regression::LeastSquares;
use crate::error::{Error, Result};
use crate::sde::simulate::PathEnsemble;
use crate::sde::ModelSpec;

/// Per-node regression systems for one ensemble.
pub struct CrossSections {
    slices: Vec<LeastSquares>,
}

impl CrossSections {
    /// Factorizes the regression at every node `0..n_steps` (the terminal
    /// node is never regressed).
    pub fn new(ensemble: &PathEnsemble, basis: &RegressionBasis) -> Result<Self> {
        let dx = ensemble.dims().dim_x;
        let slices = (0..ensemble.n_steps())
            .map(|k| LeastSquares::new(basis, &ensemble.cross_section(k), dx, None))
            .collect::<Result<_>>()?;
        Ok(Self { slices })
    }

    pub fn slice(&self, step: usize) -> &LeastSquares {
        &self.slices[step]
    }
}

/// `y'` on `[path][node]` and `z'` on `[path][step][w-component]`.
#[derive(Debug, Clone)]
pub struct RiskAdjustment {
    pub n_paths: usize,
    pub n_steps: usize,
    pub dim_w: usize,
    pub y_prime: Vec<f64>,
    pub z_prime: Vec<f64>,
    /// RMS residual of the `y'` regression per step.
    pub residuals: Vec<f64>,
}

impl RiskAdjustment {
    #[inline]
    pub fn y(&self, path: usize, step: usize) -> f64 {
        self.y_prime[path * (self.n_steps + 1) + step]
    }

    #[inline]
    pub fn z(&self, path: usize, step: usize) -> &[f64] {
        let s = (path * self.n_steps + step) * self.dim_w;
        &self.z_prime[s..s + self.dim_w]
    }

    pub fn y_at(&self, step: usize) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.y(i, step)).collect()
    }
}

/// `y` on `[path][node][x-component]` (row covector) and `z` on
/// `[path][step][w-component][x-component]`.
#[derive(Debug, Clone)]
pub struct AdjointPair {
    pub n_paths: usize,
    pub n_steps: usize,
    pub dim_x: usize,
    pub dim_w: usize,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl AdjointPair {
    #[inline]
    pub fn y(&self, path: usize, step: usize) -> &[f64] {
        let s = (path * (self.n_steps + 1) + step) * self.dim_x;
        &self.y[s..s + self.dim_x]
    }

    #[inline]
    pub fn z(&self, path: usize, step: usize) -> &[f64] {
        let m = self.dim_w * self.dim_x;
        let s = (path * self.n_steps + step) * m;
        &self.z[s..s + m]
    }
}

#[derive(Debug, Clone)]
pub struct AdjointProcesses {
    pub adjustment: RiskAdjustment,
    pub adjoint: AdjointPair,
}

fn check_derivative(ensemble: &PathEnsemble, derivative: &[f64]) -> Result<()> {
    if derivative.len() != ensemble.n_paths() {
        return Err(Error::DimensionMismatch(format!(
            "{} derivative values for {} paths",
            derivative.len(),
            ensemble.n_paths()
        )));
    }
    if derivative.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidParameter("non-finite L-derivative value".into()));
    }
    Ok(())
}

pub fn solve_risk_adjustment(
    ensemble: &PathEnsemble,
    derivative: &[f64],
    basis: &RegressionBasis,
) -> Result<RiskAdjustment> {
    let sections = CrossSections::new(ensemble, basis)?;
    risk_adjustment_on(&sections, ensemble, derivative)
}

pub fn risk_adjustment_on(
    sections: &CrossSections,
    ensemble: &PathEnsemble,
    derivative: &[f64],
) -> Result<RiskAdjustment> {
    check_derivative(ensemble, derivative)?;
    let n = ensemble.n_steps();
    let n_paths = ensemble.n_paths();
    let dw = ensemble.dims().dim_w;
    let dt = ensemble.grid().dt();
    let driver = ensemble.driver();
    let mut y_prime = vec![0.0; n_paths * (n + 1)];
    let mut z_prime = vec![0.0; n_paths * n * dw];
    let mut residuals = vec![0.0; n];
    for i in 0..n_paths {
        y_prime[i * (n + 1) + n] = derivative[i];
    }
    let mut next: Vec<f64> = derivative.to_vec();
    let mut target = vec![0.0; n_paths];
    for k in (0..n).rev() {
        let ls = sections.slice(k);
        let direct = ls.project(derivative)?;
        residuals[k] = direct.residual_rms;
        let cond_next = ls.project(&next)?.fitted;
        for j in 0..dw {
            target.par_iter_mut().enumerate().for_each(|(i, t)| {
                *t = (next[i] - cond_next[i]) * driver.increment(i, k)[j] / dt;
            });
            let z = ls.project(&target)?.fitted;
            for i in 0..n_paths {
                z_prime[(i * n + k) * dw + j] = z[i];
            }
        }
        for i in 0..n_paths {
            y_prime[i * (n + 1) + k] = direct.fitted[i];
        }
        next = direct.fitted;
    }
    Ok(RiskAdjustment { n_paths, n_steps: n, dim_w: dw, y_prime, z_prime, residuals })
}

pub fn solve_adjoint(
    model: &ModelSpec,
    ensemble: &PathEnsemble,
    adjustment: &RiskAdjustment,
    basis: &RegressionBasis,
) -> Result<AdjointPair> {
    let sections = CrossSections::new(ensemble, basis)?;
    adjoint_on(&sections, model, ensemble, adjustment)
}

pub fn adjoint_on(
    sections: &CrossSections,
    model: &ModelSpec,
    ensemble: &PathEnsemble,
    adjustment: &RiskAdjustment,
) -> Result<AdjointPair> {
    let dims = model.dims();
    if dims != ensemble.dims() {
        return Err(Error::DimensionMismatch("ensemble was simulated with another model".into()));
    }
    let (dx, dw) = (dims.dim_x, dims.dim_w);
    let n = ensemble.n_steps();
    let n_paths = ensemble.n_paths();
    if adjustment.n_paths != n_paths || adjustment.n_steps != n {
        return Err(Error::DimensionMismatch("risk adjustment solved on another ensemble".into()));
    }
    let dt = ensemble.grid().dt();
    let driver = ensemble.driver();
    let policy = ensemble.policy();
    let coeffs = model.coefficients();

    let mut y = vec![0.0; n_paths * (n + 1) * dx];
    let mut z = vec![0.0; n_paths * n * dw * dx];
    let mut residuals = vec![0.0f64; n];

    // Path-wise accumulated target, component-major: acc[c][i].
    let mut acc = vec![vec![0.0; n_paths]; dx];
    let mut grad = vec![0.0; dx];
    for i in 0..n_paths {
        coeffs.terminal_gradient(ensemble.state(i, n), &mut grad);
        let yp = adjustment.y(i, n);
        for c in 0..dx {
            let v = yp * grad[c];
            y[(i * (n + 1) + n) * dx + c] = v;
            acc[c][i] = v;
        }
    }
    let mut next: Vec<Vec<f64>> = acc.clone();
    let mut cond = vec![vec![0.0; n_paths]; dx];
    let mut target = vec![0.0; n_paths];
    for k in (0..n).rev() {
        let ls = sections.slice(k);
        for c in 0..dx {
            cond[c] = ls.project(&next[c])?.fitted;
        }
        for j in 0..dw {
            for c in 0..dx {
                let (nc, cc) = (&next[c], &cond[c]);
                target.par_iter_mut().enumerate().for_each(|(i, t)| {
                    *t = (nc[i] - cc[i]) * driver.increment(i, k)[j] / dt;
                });
                let fitted = ls.project(&target)?.fitted;
                for i in 0..n_paths {
                    z[((i * n + k) * dw + j) * dx + c] = fitted[i];
                }
            }
        }
        let t = ensemble.grid().time(k);
        // State-free coefficients have ∇ₓH = 0 and leave the target unchanged.
        if !coeffs.state_free() {
            let increments: Vec<Result<Vec<f64>>> = (0..n_paths)
                .into_par_iter()
                .map(|i| {
                    let x = ensemble.state(i, k);
                    let yhat: Vec<f64> = (0..dx).map(|c| cond[c][i]).collect();
                    let zk = &z[(i * n + k) * dw * dx..(i * n + k + 1) * dw * dx];
                    let w = policy.weights(k, x);
                    let g = hamiltonian_state_gradient(model, t, x, &yhat, adjustment.y(i, k), zk, &w);
                    if g.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NumericalBlowup { step: k, path: i });
                    }
                    Ok(g)
                })
                .collect();
            for (i, g) in increments.into_iter().enumerate() {
                let g = g?;
                for c in 0..dx {
                    acc[c][i] += g[c] * dt;
                }
            }
        }
        for c in 0..dx {
            let p = ls.project(&acc[c])?;
            residuals[k] = residuals[k].max(p.residual_rms);
            for i in 0..n_paths {
                y[(i * (n + 1) + k) * dx + c] = p.fitted[i];
            }
            next[c] = p.fitted;
        }
    }
    Ok(AdjointPair { n_paths, n_steps: n, dim_x: dx, dim_w: dw, y, z, residuals })
}

/// `∇_x ∫H dπ = Σ_a w_a [y ∇_x b + y' ∇_x c + Σ_{i,j} z_{ji} ∇_x σ_{ij}]`.
pub fn hamiltonian_state_gradient(
    model: &ModelSpec,
    t: f64,
    x: &[f64],
    y: &[f64],
    y_prime: f64,
    z: &[f64],
    weights: &[f64],
) -> Vec<f64> {
    let dims = model.dims();
    let (dx, dw) = (dims.dim_x, dims.dim_w);
    let coeffs = model.coefficients();
    let (mut jb, mut js, mut gc) = (vec![0.0; dx * dx], vec![0.0; dx * dw * dx], vec![0.0; dx]);
    let mut out = vec![0.0; dx];
    for (ai, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let a = model.actions().action(ai);
        coeffs.drift_jacobian(t, x, a, &mut jb);
        coeffs.diffusion_jacobian(t, x, a, &mut js);
        coeffs.cost_gradient(t, x, a, &mut gc);
        for c in 0..dx {
            let mut g = y_prime * gc[c];
            for i in 0..dx {
                g += y[i] * jb[i * dx + c];
                for j in 0..dw {
                    g += z[j * dx + i] * js[(i * dw + j) * dx + c];
                }
            }
            out[c] += w * g;
        }
    }
    out
}

/// Risk adjustment followed by the adjoint, sharing one set of regressions.
pub fn solve_adjoints(
    model: &ModelSpec,
    ensemble: &PathEnsemble,
    derivative: &[f64],
    basis: &RegressionBasis,
) -> Result<AdjointProcesses> {
    let sections = CrossSections::new(ensemble, basis)?;
    let adjustment = risk_adjustment_on(&sections, ensemble, derivative)?;
    let adjoint = adjoint_on(&sections, model, ensemble, &adjustment)?;
    Ok(AdjointProcesses { adjustment, adjoint })
}

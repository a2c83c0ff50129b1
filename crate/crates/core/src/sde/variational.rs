//! First-order response of the state and running cost to the perturbation
//! `π → (1 − α)π + αq`, on the reference ensemble's Brownian increments.
//!
//! The perturbation direction `q` is evaluated along the reference paths.

use rayon::prelude::*;

use super::model::ModelSpec;
use super::policy::MeasurePolicy;
use super::simulate::{Averager, PathEnsemble};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Variation {
    n_steps: usize,
    dim_x: usize,
    /// `[path][node][component]`.
    pub delta: Vec<f64>,
    /// `[path][node]`.
    pub delta_prime: Vec<f64>,
}

impl Variation {
    pub fn delta(&self, path: usize, step: usize) -> &[f64] {
        let s = (path * (self.n_steps + 1) + step) * self.dim_x;
        &self.delta[s..s + self.dim_x]
    }

    pub fn delta_prime(&self, path: usize, step: usize) -> f64 {
        self.delta_prime[path * (self.n_steps + 1) + step]
    }
}

pub fn simulate_variational(model: &ModelSpec, ensemble: &PathEnsemble, q: &MeasurePolicy) -> Result<Variation> {
    let pi = ensemble.policy();
    if q.n_steps() != pi.n_steps() || q.n_actions() != pi.n_actions() {
        return Err(Error::DimensionMismatch("perturbation policy differs in shape from π".into()));
    }
    let dims = model.dims();
    if dims != ensemble.dims() {
        return Err(Error::DimensionMismatch("ensemble was simulated with another model".into()));
    }
    let (dx, dw) = (dims.dim_x, dims.dim_w);
    let n = ensemble.n_steps();
    let n_paths = ensemble.n_paths();
    let grid = ensemble.grid();
    let dt = grid.dt();
    let driver = ensemble.driver();
    let coeffs = model.coefficients();

    let mut delta = vec![0.0; n_paths * (n + 1) * dx];
    let mut delta_prime = vec![0.0; n_paths * (n + 1)];
    let outcomes: Vec<Result<()>> = delta
        .par_chunks_mut((n + 1) * dx)
        .zip(delta_prime.par_chunks_mut(n + 1))
        .enumerate()
        .map(|(i, (ds, dps))| {
            let na = pi.n_actions();
            let (mut wp, mut wq) = (vec![0.0; na], vec![0.0; na]);
            let mut avg = Averager::new(dims);
            let (mut jb, mut js, mut gc) = (vec![0.0; dx * dx], vec![0.0; dx * dw * dx], vec![0.0; dx]);
            let (mut tb, mut ts, mut tc) = (vec![0.0; dx * dx], vec![0.0; dx * dw * dx], vec![0.0; dx]);
            for k in 0..n {
                let t = grid.time(k);
                let x = ensemble.state(i, k);
                pi.weights_into(k, x, &mut wp);
                q.weights_into(k, x, &mut wq);
                jb.fill(0.0);
                js.fill(0.0);
                gc.fill(0.0);
                for (ai, &w) in wp.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let a = model.actions().action(ai);
                    coeffs.drift_jacobian(t, x, a, &mut tb);
                    coeffs.diffusion_jacobian(t, x, a, &mut ts);
                    coeffs.cost_gradient(t, x, a, &mut tc);
                    jb.iter_mut().zip(&tb).for_each(|(o, v)| *o += w * v);
                    js.iter_mut().zip(&ts).for_each(|(o, v)| *o += w * v);
                    gc.iter_mut().zip(&tc).for_each(|(o, v)| *o += w * v);
                }
                for (a, b) in wq.iter_mut().zip(&wp) {
                    *a -= b;
                }
                avg.average(model, t, x, &wq);
                let dwk = driver.increment(i, k);
                let (head, tail) = ds.split_at_mut((k + 1) * dx);
                let d = &head[k * dx..];
                let next = &mut tail[..dx];
                for r in 0..dx {
                    let mut drift = avg.b[r];
                    for c in 0..dx {
                        drift += jb[r * dx + c] * d[c];
                    }
                    let mut v = d[r] + drift * dt;
                    for j in 0..dw {
                        let mut s = avg.s[r * dw + j];
                        for c in 0..dx {
                            s += js[(r * dw + j) * dx + c] * d[c];
                        }
                        v += s * dwk[j];
                    }
                    next[r] = v;
                }
                let cost_rate = avg.c + gc.iter().zip(d).map(|(g, v)| g * v).sum::<f64>();
                dps[k + 1] = dps[k] + cost_rate * dt;
                if next.iter().any(|v| !v.is_finite()) || !dps[k + 1].is_finite() {
                    return Err(Error::NumericalBlowup { step: k + 1, path: i });
                }
            }
            Ok(())
        })
        .collect();
    if let Some(e) = outcomes.into_iter().find_map(|r| r.err()) {
        return Err(e);
    }
    Ok(Variation { n_steps: n, dim_x: dx, delta, delta_prime })
}

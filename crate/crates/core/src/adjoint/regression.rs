//! Cross-sectional least squares: the computable stand-in for `E[· | x_t]`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::basis::{FeatureMap, RegressionBasis};
use crate::error::{Error, Result};

const CHUNK: usize = 2048;

/// Factorized normal equations for one cross-section of states. Several
/// targets can be projected onto the same basis without refactoring.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    map: FeatureMap,
    design: Vec<f64>,
    weights: Option<Vec<f64>>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    n: usize,
}

/// Result of projecting one target vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    /// Weighted root-mean-square residual.
    pub residual_rms: f64,
}

impl LeastSquares {
    pub fn new(basis: &RegressionBasis, states: &[f64], dim_x: usize, weights: Option<&[f64]>) -> Result<Self> {
        if dim_x == 0 || !states.len().is_multiple_of(dim_x) {
            return Err(Error::DimensionMismatch("state array is not a multiple of dim_x".into()));
        }
        let n = states.len() / dim_x;
        if let Some(w) = weights {
            if w.len() != n {
                return Err(Error::DimensionMismatch("weights length differs from sample".into()));
            }
            if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidParameter("regression weights must be finite and ≥ 0".into()));
            }
        }
        if states.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("regression states must be finite".into()));
        }
        let map = FeatureMap::fit(states, dim_x, basis.degree, weights);
        Self::with_map(basis, map, states, weights)
    }

    pub fn with_map(basis: &RegressionBasis, map: FeatureMap, states: &[f64], weights: Option<&[f64]>) -> Result<Self> {
        let dim_x = map.dim_x();
        let n = states.len() / dim_x;
        let m = map.len();
        if n < m {
            return Err(Error::RankDeficient(m));
        }
        let mut design = vec![0.0; n * m];
        design.par_chunks_mut(m * CHUNK).enumerate().for_each(|(c, rows)| {
            for (r, row) in rows.chunks_mut(m).enumerate() {
                let i = c * CHUNK + r;
                map.eval(&states[i * dim_x..(i + 1) * dim_x], row);
            }
        });
        // Chunk partial Gram matrices in parallel, then sum them in chunk order.
        let partials: Vec<Vec<f64>> = design
            .par_chunks(m * CHUNK)
            .enumerate()
            .map(|(c, rows)| {
                let mut g = vec![0.0; m * m];
                for (r, row) in rows.chunks(m).enumerate() {
                    let w = weights.map_or(1.0, |w| w[c * CHUNK + r]);
                    for a in 0..m {
                        let wa = w * row[a];
                        for b in a..m {
                            g[a * m + b] += wa * row[b];
                        }
                    }
                }
                g
            })
            .collect();
        let mut gram = DMatrix::<f64>::zeros(m, m);
        for g in &partials {
            for a in 0..m {
                for b in a..m {
                    gram[(a, b)] += g[a * m + b];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)];
            }
        }
        let total_weight = weights.map_or(n as f64, |w| w.iter().sum());
        let lambda = basis.ridge.lambda(total_weight);
        for a in 1..m {
            gram[(a, a)] += lambda;
        }
        let diag: Vec<f64> = (0..m).map(|a| gram[(a, a)]).collect();
        let chol = gram.cholesky().ok_or(Error::RankDeficient(m))?;
        let l = chol.l_dirty();
        for a in 0..m {
            let pivot = l[(a, a)] * l[(a, a)];
            if !(pivot > 1e-12 * diag[a]) || !pivot.is_finite() {
                return Err(Error::RankDeficient(m));
            }
        }
        Ok(Self { map, design, weights: weights.map(|w| w.to_vec()), chol, n })
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.map
    }

    pub fn coefficients(&self, targets: &[f64]) -> Result<Vec<f64>> {
        if targets.len() != self.n {
            return Err(Error::DimensionMismatch(format!("expected {} targets, got {}", self.n, targets.len())));
        }
        let m = self.map.len();
        let partials: Vec<Vec<f64>> = self
            .design
            .par_chunks(m * CHUNK)
            .enumerate()
            .map(|(c, rows)| {
                let mut rhs = vec![0.0; m];
                for (r, row) in rows.chunks(m).enumerate() {
                    let i = c * CHUNK + r;
                    let wy = self.weights.as_ref().map_or(1.0, |w| w[i]) * targets[i];
                    for a in 0..m {
                        rhs[a] += row[a] * wy;
                    }
                }
                rhs
            })
            .collect();
        let mut rhs = DVector::<f64>::zeros(m);
        for p in &partials {
            for a in 0..m {
                rhs[a] += p[a];
            }
        }
        Ok(self.chol.solve(&rhs).iter().copied().collect())
    }

    pub fn project(&self, targets: &[f64]) -> Result<Projection> {
        if let Some(&first) = targets.first() {
            // Constants are representable exactly; skip the solve so that
            // e.g. a unit risk adjustment stays bit-exact.
            if targets.len() == self.n && targets.iter().all(|&t| t == first) {
                let mut coefficients = vec![0.0; self.map.len()];
                coefficients[0] = first;
                return Ok(Projection { coefficients, fitted: vec![first; self.n], residual_rms: 0.0 });
            }
        }
        let coefficients = self.coefficients(targets)?;
        let m = self.map.len();
        let mut fitted = vec![0.0; self.n];
        fitted.par_iter_mut().zip(self.design.par_chunks(m)).for_each(|(f, row)| *f = dot(row, &coefficients));
        let (mut sw, mut ss) = (0.0, 0.0);
        for i in 0..self.n {
            let w = self.weights.as_ref().map_or(1.0, |w| w[i]);
            let r = targets[i] - fitted[i];
            sw += w;
            ss += w * r * r;
        }
        let residual_rms = if sw > 0.0 { (ss / sw).sqrt() } else { 0.0 };
        Ok(Projection { coefficients, fitted, residual_rms })
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A fitted conditional-expectation estimator `x ↦ Ê[target | x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    map: FeatureMap,
    coefficients: Vec<f64>,
    residual_rms: f64,
}

impl Predictor {
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.map.features(x), &self.coefficients)
    }

    pub fn residual_rms(&self) -> f64 {
        self.residual_rms
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

/// Weighted ridge least squares of `targets` on polynomial features of
/// `states` (row-major, `dim_x` per sample).
pub fn fit_conditional(
    basis: &RegressionBasis,
    states: &[f64],
    dim_x: usize,
    targets: &[f64],
    weights: Option<&[f64]>,
) -> Result<Predictor> {
    let ls = LeastSquares::new(basis, states, dim_x, weights)?;
    let p = ls.project(targets)?;
    Ok(Predictor { map: ls.map, coefficients: p.coefficients, residual_rms: p.residual_rms })
}

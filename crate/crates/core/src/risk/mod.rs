//! Law-invariant risk functions over weighted empirical samples.
//!
//! Each function is evaluated at the empirical law of a Monte Carlo cost
//! sample. The L-derivative is returned pointwise, one value per sample
//! entry, so that `Σ w_i D_i Y_i` is the first-order change of the risk along
//! a perturbation `Y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskFunction {
    Expectation,
    /// `E[X] + β ‖X − E[X]‖₂`.
    MeanDeviation {
        beta: f64,
        /// Absolute deviation below which the sample counts as constant.
        /// Defaults to `1e-10 (1 + |mean|)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    /// `E[X] + β E[(X − E[X])_{ε+}]` with `(x)_{ε+} = ε softplus(x/ε)`.
    SmoothedSemideviation {
        beta: f64,
        epsilon: f64,
    },
    /// `θ⁻¹ ln E[exp(θX)]`.
    Entropic {
        theta: f64,
    },
}

impl RiskFunction {
    pub fn mean_deviation(beta: f64) -> Result<Self> {
        let r = RiskFunction::MeanDeviation { beta, tolerance: None };
        r.validate()?;
        Ok(r)
    }

    pub fn smoothed_semideviation(beta: f64, epsilon: f64) -> Result<Self> {
        let r = RiskFunction::SmoothedSemideviation { beta, epsilon };
        r.validate()?;
        Ok(r)
    }

    pub fn entropic(theta: f64) -> Result<Self> {
        let r = RiskFunction::Entropic { theta };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            RiskFunction::Expectation => Ok(()),
            RiskFunction::MeanDeviation { beta, tolerance } => {
                positive("beta", beta)?;
                if let Some(t) = tolerance {
                    positive("tolerance", t)?;
                }
                Ok(())
            }
            RiskFunction::SmoothedSemideviation { beta, epsilon } => {
                positive("beta", beta)?;
                positive("epsilon", epsilon)
            }
            RiskFunction::Entropic { theta } => positive("theta", theta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RiskFunction::Expectation => "expectation",
            RiskFunction::MeanDeviation { .. } => "mean_deviation",
            RiskFunction::SmoothedSemideviation { .. } => "smoothed_semideviation",
            RiskFunction::Entropic { .. } => "entropic",
        }
    }

    /// Whether `X ≤ Y` a.s. implies `ρ(X) ≤ ρ(Y)`, so that the L-derivative
    /// is a non-negative density. Mean-deviation is not monotone for any
    /// `β > 0`.
    pub fn is_monotone(&self) -> bool {
        match *self {
            RiskFunction::Expectation | RiskFunction::Entropic { .. } => true,
            RiskFunction::MeanDeviation { beta, .. } => beta == 0.0,
            RiskFunction::SmoothedSemideviation { beta, .. } => beta <= 1.0,
        }
    }

    pub fn evaluate(&self, sample: &EmpiricalSample) -> f64 {
        let mean = sample.mean();
        match *self {
            RiskFunction::Expectation => mean,
            RiskFunction::MeanDeviation { beta, .. } => mean + beta * sample.deviation_about(mean),
            RiskFunction::SmoothedSemideviation { beta, epsilon } => {
                let excess = sample.expect(|x| smoothed_positive_part(x - mean, epsilon));
                mean + beta * excess
            }
            RiskFunction::Entropic { theta } => {
                let (shift, sum) = shifted_exp_sum(sample, theta);
                (shift + sum.ln()) / theta
            }
        }
    }

    pub fn l_derivative(&self, sample: &EmpiricalSample) -> Result<DerivativeSample> {
        let n = sample.len();
        let values = match *self {
            RiskFunction::Expectation => vec![1.0; n],
            RiskFunction::MeanDeviation { beta, tolerance } => {
                let mean = sample.mean();
                let dev = sample.deviation_about(mean);
                let tol = tolerance.unwrap_or(1e-10 * (1.0 + mean.abs()));
                if !(dev > tol) {
                    return Err(Error::DegenerateSample { deviation: dev, tolerance: tol });
                }
                sample.values.iter().map(|x| 1.0 + beta * (x - mean) / dev).collect()
            }
            RiskFunction::SmoothedSemideviation { beta, epsilon } => {
                let mean = sample.mean();
                let u: Vec<f64> = sample.values.iter().map(|x| logistic((x - mean) / epsilon)).collect();
                let ubar: f64 = u.iter().zip(&sample.weights).map(|(u, w)| u * w).sum();
                u.iter().map(|u| 1.0 + beta * (u - ubar)).collect()
            }
            RiskFunction::Entropic { theta } => {
                let (shift, sum) = shifted_exp_sum(sample, theta);
                sample.values.iter().map(|x| (theta * x - shift).exp() / sum).collect()
            }
        };
        Ok(DerivativeSample { values })
    }

    /// Monte Carlo standard error of `evaluate` from the empirical influence
    /// function: `sd(ψ(C)) / √n_eff`.
    pub fn standard_error(&self, sample: &EmpiricalSample) -> f64 {
        let mean = sample.mean();
        let influence: Vec<f64> = match *self {
            RiskFunction::Expectation => sample.values.iter().map(|x| x - mean).collect(),
            RiskFunction::MeanDeviation { beta, .. } => {
                let s = sample.deviation_about(mean);
                sample
                    .values
                    .iter()
                    .map(|x| {
                        let d = x - mean;
                        if s > 0.0 {
                            d + beta * (d * d - s * s) / (2.0 * s)
                        } else {
                            d
                        }
                    })
                    .collect()
            }
            RiskFunction::SmoothedSemideviation { beta, epsilon } => {
                let excess = sample.expect(|x| smoothed_positive_part(x - mean, epsilon));
                let ubar = sample.expect(|x| logistic((x - mean) / epsilon));
                sample
                    .values
                    .iter()
                    .map(|x| {
                        let d = x - mean;
                        d + beta * (smoothed_positive_part(d, epsilon) - excess - ubar * d)
                    })
                    .collect()
            }
            RiskFunction::Entropic { theta } => {
                let (shift, sum) = shifted_exp_sum(sample, theta);
                sample.values.iter().map(|x| ((theta * x - shift).exp() / sum - 1.0) / theta).collect()
            }
        };
        let var: f64 = influence.iter().zip(&sample.weights).map(|(v, w)| w * v * v).sum();
        (var / sample.effective_size()).sqrt()
    }
}

/// `(x)_{ε+} = x + ε ln(1 + e^{−x/ε})`, evaluated as `ε softplus(x/ε)`.
pub fn smoothed_positive_part(x: f64, epsilon: f64) -> f64 {
    let u = x / epsilon;
    epsilon * (u.max(0.0) + (-u.abs()).exp().ln_1p())
}

/// `U(u) = 1/(1 + e^{−u})`, the derivative of softplus.
fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Returns `(M, Σ w_i e^{θx_i − M})` with `M = max θx_i`.
fn shifted_exp_sum(sample: &EmpiricalSample, theta: f64) -> (f64, f64) {
    let shift = sample.values.iter().map(|x| theta * x).fold(f64::NEG_INFINITY, f64::max);
    let sum = sample.values.iter().zip(&sample.weights).map(|(x, w)| w * (theta * x - shift).exp()).sum::<f64>();
    // Dividing by the weight total keeps constants exact.
    (shift, sum / sample.weights.iter().sum::<f64>())
}

/// Values with probability weights; the empirical stand-in for the law of
/// the total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl EmpiricalSample {
    /// Uniform weights `1/n`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empirical sample is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("empirical sample has non-finite values".into()));
        }
        let w = 1.0 / values.len() as f64;
        let weights = vec![w; values.len()];
        Ok(Self { values, weights })
    }

    pub fn with_weights(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::DimensionMismatch("values and weights differ in length".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("sample weights must be finite and ≥ 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidParameter(format!("sample weights sum to {total}, not 1")));
        }
        let mut s = Self::new(values)?;
        s.weights = weights;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    /// Weighted `L²` deviation about `center`.
    pub fn deviation_about(&self, center: f64) -> f64 {
        self.expect(|x| (x - center) * (x - center)).sqrt()
    }

    /// Kish effective sample size `1 / Σ w_i²`.
    pub fn effective_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Same weights, values `x_i + h·d_i`.
    pub fn perturbed(&self, direction: &[f64], h: f64) -> Result<Self> {
        if direction.len() != self.len() {
            return Err(Error::DimensionMismatch("direction length differs from sample".into()));
        }
        let values = self.values.iter().zip(direction).map(|(x, d)| x + h * d).collect();
        Ok(Self { values, weights: self.weights.clone() })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|x| f(*x)).collect(), weights: self.weights.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSample {
    pub values: Vec<f64>,
}

impl DerivativeSample {
    pub fn inner(&self, sample: &EmpiricalSample, direction: &[f64]) -> f64 {
        self.values.iter().zip(sample.weights()).zip(direction).map(|((d, w), y)| w * d * y).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalCheck {
    pub finite_difference: f64,
    pub inner_product: f64,
    pub abs_error: f64,
}

/// Central difference of `evaluate` along `direction` against `⟨D, direction⟩`.
pub fn directional_derivative_check(
    risk: &RiskFunction,
    sample: &EmpiricalSample,
    direction: &[f64],
    h: f64,
) -> Result<DirectionalCheck> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h must be positive, got {h}")));
    }
    let d = risk.l_derivative(sample)?;
    let up = risk.evaluate(&sample.perturbed(direction, h)?);
    let down = risk.evaluate(&sample.perturbed(direction, -h)?);
    let finite_difference = (up - down) / (2.0 * h);
    let inner_product = d.inner(sample, direction);
    Ok(DirectionalCheck { finite_difference, inner_product, abs_error: (finite_difference - inner_product).abs() })
}

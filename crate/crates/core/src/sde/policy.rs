//! Measure-valued feedback policies on a finite action grid.
//!
//! A policy assigns, per time step and state, a probability vector over the
//! action grid. Each step holds a convex mixture of rules; a rule is either a
//! fixed weight vector or a feedback law fitted on polynomial state features.

use std::sync::Arc;

use crate::adjoint::basis::FeatureMap;
use crate::adjoint::regression::dot;
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Weights from clamped linear scores: `w_j ∝ max(0, φ(x)·β_j)` over a subset
/// of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackRule {
    map: FeatureMap,
    atoms: Vec<usize>,
    coefficients: Vec<f64>,
}

impl FeedbackRule {
    pub fn new(map: FeatureMap, atoms: Vec<usize>, coefficients: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || coefficients.len() != atoms.len() * map.len() {
            return Err(Error::DimensionMismatch("feedback rule needs one coefficient row per atom".into()));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("feedback coefficients must be finite".into()));
        }
        Ok(Self { map, atoms, coefficients })
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    /// Adds `scale · w(x)` into the dense `out`.
    fn accumulate(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        let m = self.map.len();
        let mut feat_buf = [0.0f64; 32];
        let owned;
        let feats: &[f64] = if m <= 32 {
            self.map.eval(x, &mut feat_buf[..m]);
            &feat_buf[..m]
        } else {
            owned = self.map.features(x);
            &owned
        };
        let mut raw = [0.0f64; 64];
        let mut raw_vec;
        let scores: &mut [f64] = if self.atoms.len() <= 64 {
            &mut raw[..self.atoms.len()]
        } else {
            raw_vec = vec![0.0; self.atoms.len()];
            &mut raw_vec
        };
        let mut total = 0.0;
        let mut best = 0;
        for (j, s) in scores.iter_mut().enumerate() {
            let v = dot(feats, &self.coefficients[j * m..(j + 1) * m]);
            *s = v;
            total += v.max(0.0);
        }
        for j in 1..scores.len() {
            if scores[j] > scores[best] {
                best = j;
            }
        }
        if !(total > 0.0) || !total.is_finite() {
            out[self.atoms[best]] += scale;
            return;
        }
        for (j, s) in scores.iter().enumerate() {
            if *s > 0.0 {
                out[self.atoms[j]] += scale * (s / total);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyRule {
    Constant(Arc<Vec<f64>>),
    Feedback(Arc<FeedbackRule>),
}

impl PolicyRule {
    /// Dense weights of this rule alone at `x`.
    pub fn weights_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        match self {
            PolicyRule::Constant(w) => out.copy_from_slice(w),
            PolicyRule::Feedback(f) => f.accumulate(x, 1.0, out),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct StepRule {
    parts: Vec<(f64, PolicyRule)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePolicy {
    n_actions: usize,
    steps: Vec<StepRule>,
}

fn check_weights(w: &[f64], n_actions: usize) -> Result<()> {
    if w.len() != n_actions {
        return Err(Error::DimensionMismatch(format!(
            "weight vector has {} entries, action grid has {n_actions}",
            w.len()
        )));
    }
    if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("policy weights must be finite and non-negative".into()));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidParameter(format!("policy weights sum to {s}, not 1")));
    }
    Ok(())
}

impl MeasurePolicy {
    /// State-independent weights, one vector per step.
    pub fn constant(n_actions: usize, per_step: Vec<Vec<f64>>) -> Result<Self> {
        if per_step.is_empty() {
            return Err(Error::ZeroSteps);
        }
        let steps = per_step
            .into_iter()
            .map(|w| {
                check_weights(&w, n_actions)?;
                Ok(StepRule { parts: vec![(1.0, PolicyRule::Constant(Arc::new(w)))] })
            })
            .collect::<Result<_>>()?;
        Ok(Self { n_actions, steps })
    }

    /// The same weights at every step.
    pub fn stationary(n_actions: usize, n_steps: usize, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, n_actions)?;
        if n_steps == 0 {
            return Err(Error::ZeroSteps);
        }
        let rule = PolicyRule::Constant(Arc::new(weights));
        Ok(Self { n_actions, steps: vec![StepRule { parts: vec![(1.0, rule)] }; n_steps] })
    }

    /// Strict control: all mass on one action.
    pub fn dirac(n_actions: usize, n_steps: usize, atom: usize) -> Result<Self> {
        if atom >= n_actions {
            return Err(Error::InvalidParameter(format!("atom {atom} outside grid of {n_actions}")));
        }
        let mut w = vec![0.0; n_actions];
        w[atom] = 1.0;
        Self::stationary(n_actions, n_steps, w)
    }

    pub fn uniform(n_actions: usize, n_steps: usize) -> Result<Self> {
        if n_actions == 0 {
            return Err(Error::InvalidParameter("empty action grid".into()));
        }
        Self::stationary(n_actions, n_steps, vec![1.0 / n_actions as f64; n_actions])
    }

    /// One rule per step.
    pub fn from_rules(n_actions: usize, rules: Vec<PolicyRule>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::ZeroSteps);
        }
        for r in &rules {
            match r {
                PolicyRule::Constant(w) => check_weights(w, n_actions)?,
                PolicyRule::Feedback(f) => {
                    if f.atoms.iter().any(|&a| a >= n_actions) {
                        return Err(Error::InvalidParameter("feedback atom outside grid".into()));
                    }
                }
            }
        }
        Ok(Self { n_actions, steps: rules.into_iter().map(|r| StepRule { parts: vec![(1.0, r)] }).collect() })
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// True when no step depends on the state.
    pub fn is_state_independent(&self) -> bool {
        self.steps.iter().all(|s| s.parts.iter().all(|(_, r)| matches!(r, PolicyRule::Constant(_))))
    }

    /// True when the weights at `step` do not depend on the state.
    pub fn step_is_constant(&self, step: usize) -> bool {
        self.steps[step].parts.iter().all(|(_, r)| matches!(r, PolicyRule::Constant(_)))
    }

    /// Number of mixture components at `step`.
    pub fn components(&self, step: usize) -> usize {
        self.steps[step].parts.len()
    }

    /// Dense weights over the action grid at `(step, x)`.
    pub fn weights_into(&self, step: usize, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (c, rule) in &self.steps[step].parts {
            match rule {
                PolicyRule::Constant(w) => {
                    for (o, v) in out.iter_mut().zip(w.iter()) {
                        *o += c * v;
                    }
                }
                PolicyRule::Feedback(f) => f.accumulate(x, *c, out),
            }
        }
    }

    pub fn weights(&self, step: usize, x: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.n_actions];
        self.weights_into(step, x, &mut w);
        w
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n_actions != other.n_actions || self.steps.len() != other.steps.len() {
            return Err(Error::DimensionMismatch(format!(
                "policies differ in shape: {}×{} vs {}×{}",
                self.steps.len(),
                self.n_actions,
                other.steps.len(),
                other.n_actions
            )));
        }
        Ok(())
    }
}

/// Shannon entropy (nats) of a weight vector.
pub fn entropy(weights: &[f64]) -> f64 {
    -weights.iter().filter(|&&w| w > 0.0).map(|w| w * w.ln()).sum::<f64>()
}

/// `(1 − α) π + α q`, per step and state.
pub fn convex_combine(pi: &MeasurePolicy, q: &MeasurePolicy, alpha: f64) -> Result<MeasurePolicy> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    pi.same_shape(q)?;
    if alpha == 0.0 {
        return Ok(pi.clone());
    }
    if alpha == 1.0 {
        return Ok(q.clone());
    }
    let steps = pi
        .steps
        .iter()
        .zip(&q.steps)
        .map(|(a, b)| {
            let mut constant: Option<Vec<f64>> = None;
            let mut parts = Vec::new();
            let scaled =
                a.parts.iter().map(|(c, r)| ((1.0 - alpha) * c, r)).chain(b.parts.iter().map(|(c, r)| (alpha * c, r)));
            let mut constant_mass = 0.0;
            for (c, r) in scaled {
                match r {
                    PolicyRule::Constant(w) => {
                        let acc = constant.get_or_insert_with(|| vec![0.0; pi.n_actions]);
                        for (o, v) in acc.iter_mut().zip(w.iter()) {
                            *o += c * v;
                        }
                        constant_mass += c;
                    }
                    PolicyRule::Feedback(_) => parts.push((c, r.clone())),
                }
            }
            if let Some(w) = constant {
                // Merged constants are stored normalized with their total mass.
                let w = w.into_iter().map(|v| v / constant_mass).collect();
                parts.insert(0, (constant_mass, PolicyRule::Constant(Arc::new(w))));
            }
            StepRule { parts }
        })
        .collect();
    Ok(MeasurePolicy { n_actions: pi.n_actions, steps })
}

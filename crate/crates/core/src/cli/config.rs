//! Experiment configuration: a single JSON document.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adjoint::{RegressionBasis, Ridge};
use crate::control::MsaConfig;
use crate::error::{Error, Result};
use crate::portfolio::{build_portfolio_model, PortfolioParams};
use crate::risk::RiskFunction;
use crate::sde::model::{first_order_model, std_counter_model};
use crate::sde::{check_feasibility, FeasibilityConfig, FeasibilityReport, ModelSpec, TableCoefficients, TimeGrid};

fn unit_horizon() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Portfolio {
        #[serde(default)]
        params: PortfolioParams,
    },
    /// `A = {−1, 1}`, `σ = a`, `g = x²/2`.
    Example1 {
        #[serde(default = "unit_horizon")]
        horizon: f64,
    },
    /// `A = {0, 1}`, `σ = a`, `g = x²`.
    Example2 {
        #[serde(default = "unit_horizon")]
        horizon: f64,
    },
    /// Scalar model with per-action coefficient rows:
    /// `b = b0 + b1 x`, `σ = s0 + s1 x`, `c = c0 + c1 x + c2 x²` and
    /// `g = g0 + g1 x + g2 x²`.
    Custom {
        #[serde(default = "unit_horizon")]
        horizon: f64,
        #[serde(default)]
        x0: f64,
        actions: Vec<f64>,
        drift: Vec<[f64; 2]>,
        diffusion: Vec<[f64; 2]>,
        cost: Vec<[f64; 3]>,
        terminal: [f64; 3],
    },
}

fn default_steps() -> usize {
    50
}
fn default_paths() -> usize {
    20_000
}
fn default_actions() -> usize {
    31
}
fn default_degree() -> usize {
    3
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_ridge() -> Ridge {
    Ridge::PerSample(1e-8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub risk: RiskFunction,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    /// Size of the allocation grid; portfolio only.
    #[serde(default = "default_actions")]
    pub n_actions: usize,
    #[serde(default = "default_degree")]
    pub basis_degree: usize,
    #[serde(default = "default_ridge")]
    pub ridge: Ridge,
    #[serde(default)]
    pub msa: MsaConfig,
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Growth exponents; defaults to a preset matching the problem.
    #[serde(default)]
    pub feasibility: Option<FeasibilityConfig>,
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |e: Error| match e {
            Error::ConfigInvalid(m) => Error::ConfigInvalid(m),
            other => Error::ConfigInvalid(other.to_string()),
        };
        if self.n_steps == 0 {
            return Err(Error::ConfigInvalid("n_steps must be positive".into()));
        }
        if self.n_paths < 2 {
            return Err(Error::ConfigInvalid("n_paths must be at least 2".into()));
        }
        self.risk.validate().map_err(invalid)?;
        self.msa.validate().map_err(invalid)?;
        let (Ridge::PerSample(l) | Ridge::Absolute(l)) = self.ridge;
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::ConfigInvalid(format!("ridge must be finite and non-negative, got {l}")));
        }
        self.model().map_err(invalid)?;
        self.grid().map_err(invalid)?;
        let report = self.feasibility_report();
        if !report.feasible() {
            let names: Vec<String> = report.violations().map(|c| format!("{} ({})", c.name, c.detail)).collect();
            return Err(Error::ConfigInvalid(format!("infeasible exponents: {}", names.join("; "))));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        match &self.problem {
            ProblemConfig::Portfolio { params } => params.horizon,
            ProblemConfig::Example1 { horizon }
            | ProblemConfig::Example2 { horizon }
            | ProblemConfig::Custom { horizon, .. } => *horizon,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon(), self.n_steps)
    }

    pub fn model(&self) -> Result<ModelSpec> {
        match &self.problem {
            ProblemConfig::Portfolio { params } => build_portfolio_model(params, self.n_actions),
            ProblemConfig::Example1 { .. } => Ok(std_counter_model()),
            ProblemConfig::Example2 { .. } => Ok(first_order_model()),
            ProblemConfig::Custom { x0, actions, drift, diffusion, cost, terminal, .. } => TableCoefficients {
                actions: actions.clone(),
                drift: drift.clone(),
                diffusion: diffusion.clone(),
                cost: cost.clone(),
                terminal: *terminal,
            }
            .into_model(*x0),
        }
    }

    pub fn basis(&self) -> RegressionBasis {
        RegressionBasis::polynomial(self.basis_degree).with_ridge(self.ridge)
    }

    pub fn portfolio_params(&self) -> Option<&PortfolioParams> {
        match &self.problem {
            ProblemConfig::Portfolio { params } => Some(params),
            _ => None,
        }
    }

    pub fn feasibility_config(&self) -> FeasibilityConfig {
        self.feasibility.unwrap_or_else(|| match self.problem {
            ProblemConfig::Portfolio { .. } => FeasibilityConfig::portfolio(2.0, 8.0),
            _ => FeasibilityConfig::bounded_quadratic(2.0, 8.0),
        })
    }

    pub fn feasibility_report(&self) -> FeasibilityReport {
        check_feasibility(&self.feasibility_config())
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "expectation" }, "seed": 5 }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!((cfg.n_steps, cfg.n_paths, cfg.n_actions, cfg.basis_degree), (50, 20_000, 31, 3));
        assert_eq!(cfg.msa, MsaConfig::default());
        assert_eq!(cfg.portfolio_params(), Some(&PortfolioParams::default()));
        assert_eq!(cfg.model().unwrap().actions().len(), 31);
    }

    #[test]
    fn hash_is_stable_and_ignores_output_dir() {
        let a = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        let mut b = a.clone();
        b.output_dir = PathBuf::from("/elsewhere");
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.seed = 6;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn rejects_invalid_documents() {
        for body in [
            r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "expectation" } }"#,
            r#"{ "problem": { "kind": "nope" }, "risk": { "kind": "expectation" }, "seed": 1 }"#,
            r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "mean_deviation", "beta": -1 }, "seed": 1 }"#,
            r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "expectation" }, "seed": 1, "n_steps": 0 }"#,
            r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "expectation" }, "seed": 1, "n_actions": 1 }"#,
            r#"{ "problem": { "kind": "portfolio", "params": { "phi_low": 0 } }, "risk": { "kind": "expectation" }, "seed": 1 }"#,
            r#"{ "problem": { "kind": "portfolio" }, "risk": { "kind": "expectation" }, "seed": 1, "msa": { "max_iters": 0 } }"#,
            r#"{ "problem": { "kind": "example1", "horizon": -1 }, "risk": { "kind": "expectation" }, "seed": 1 }"#,
            r#"{ "problem": { "kind": "custom", "actions": [0, 1], "drift": [[0, 0]], "diffusion": [[1, 0], [1, 0]],
                 "cost": [[0, 0, 0], [0, 0, 0]], "terminal": [0, 0, 1] }, "risk": { "kind": "expectation" }, "seed": 1 }"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json_str(body), Err(Error::ConfigInvalid(_))), "accepted {body}");
        }
    }

    #[test]
    fn zero_lower_bound_needs_the_flag() {
        let body = r#"{ "problem": { "kind": "portfolio", "params": { "phi_low": 0, "allow_zero_lower": true } },
                        "risk": { "kind": "expectation" }, "seed": 1 }"#;
        assert!(ExperimentConfig::from_json_str(body).is_ok());
    }

    proptest! {
        #[test]
        fn accepted_configs_build(steps in 0usize..80, paths in 0usize..50, actions in 0usize..40, degree in 0usize..6,
                                  beta in -1.0f64..3.0, seed: u64) {
            let body = format!(
                r#"{{ "problem": {{ "kind": "portfolio" }}, "risk": {{ "kind": "mean_deviation", "beta": {beta} }},
                     "n_steps": {steps}, "n_paths": {paths}, "n_actions": {actions}, "basis_degree": {degree}, "seed": {seed} }}"#
            );
            if let Ok(cfg) = ExperimentConfig::from_json_str(&body) {
                prop_assert!(cfg.model().is_ok());
                prop_assert!(cfg.grid().is_ok());
                prop_assert!(cfg.feasibility_report().feasible());
            }
        }

        #[test]
        fn arbitrary_text_is_rejected_without_panicking(text in "\\PC{0,120}") {
            let _ = ExperimentConfig::from_json_str(&text);
        }
    }
}

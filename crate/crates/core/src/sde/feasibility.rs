//! Growth/integrability exponents and the inequalities that make the total
//! cost `p`-integrable.

use serde::{Deserialize, Serialize};

/// Growth exponents. `pbar3` may be `f64::INFINITY`; in JSON it is written as
/// `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityConfig {
    pub growth_constant: f64,
    pub pbar1: f64,
    pub pbar2: f64,
    #[serde(with = "infinite_as_null")]
    pub pbar3: f64,
    pub pbar: f64,
    pub p1: f64,
    pub p2: f64,
    pub p1_prime: f64,
    pub p2_prime: f64,
    pub p: f64,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl FeasibilityConfig {
    /// Exponents of the log-wealth allocation model (bounded coefficients,
    /// linear terminal cost, deterministic start) with the given `p`, `pbar`.
    pub fn portfolio(p: f64, pbar: f64) -> Self {
        Self {
            growth_constant: 1.0,
            pbar1: 0.0,
            pbar2: 0.0,
            pbar3: f64::INFINITY,
            pbar,
            p1: 1.0,
            p2: 0.0,
            p1_prime: 0.0,
            p2_prime: 0.0,
            p,
        }
    }

    /// Bounded coefficients with quadratic terminal cost (the two scalar
    /// counterexample models).
    pub fn bounded_quadratic(p: f64, pbar: f64) -> Self {
        Self {
            growth_constant: 1.0,
            pbar1: 0.0,
            pbar2: 0.0,
            pbar3: f64::INFINITY,
            pbar,
            p1: 2.0,
            p2: 0.0,
            p1_prime: 1.0,
            p2_prime: 0.0,
            p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub checks: Vec<Check>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn check_feasibility(cfg: &FeasibilityConfig) -> FeasibilityReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check { name: name.to_string(), passed, detail });
    };
    let finite =
        [cfg.growth_constant, cfg.pbar1, cfg.pbar2, cfg.pbar, cfg.p1, cfg.p2, cfg.p1_prime, cfg.p2_prime, cfg.p]
            .iter()
            .all(|v| v.is_finite())
            && !cfg.pbar3.is_nan();
    push("finite_exponents", finite, "all exponents finite except pbar3".into());
    push("growth_constant", cfg.growth_constant >= 0.0, format!("L = {}", cfg.growth_constant));
    push("pbar1_range", (0.0..=1.0).contains(&cfg.pbar1), format!("pbar1 = {} ∈ [0, 1]", cfg.pbar1));
    push("pbar2_nonneg", cfg.pbar2 >= 0.0, format!("pbar2 = {} ≥ 0", cfg.pbar2));
    push("pbar3_positive", cfg.pbar3 > 0.0, format!("pbar3 = {} > 0", cfg.pbar3));
    push("p_at_least_one", cfg.p >= 1.0, format!("p = {} ≥ 1", cfg.p));
    push("pbar_at_least_one", cfg.pbar >= 1.0, format!("pbar = {} ≥ 1", cfg.pbar));
    push(
        "nonneg_cost_exponents",
        cfg.p1 >= 0.0 && cfg.p2 >= 0.0 && cfg.p1_prime >= 0.0 && cfg.p2_prime >= 0.0,
        "p1, p2, p1', p2' ≥ 0".into(),
    );
    push("p_less_pbar", cfg.p < cfg.pbar, format!("p = {} < pbar = {}", cfg.p, cfg.pbar));
    push("pbar_le_pbar3", cfg.pbar <= cfg.pbar3, format!("pbar = {} ≤ pbar3 = {}", cfg.pbar, cfg.pbar3));
    let ratio = cfg.pbar3 / cfg.pbar;
    push("pbar2_le_pbar3_over_pbar", cfg.pbar2 <= ratio, format!("pbar2 = {} ≤ {}", cfg.pbar2, ratio));
    push(
        "derivative_growth",
        cfg.p1_prime <= cfg.p1 && cfg.p2_prime <= cfg.p2,
        format!("p1' = {} ≤ p1 = {}, p2' = {} ≤ p2 = {}", cfg.p1_prime, cfg.p1, cfg.p2_prime, cfg.p2),
    );
    let bound = cfg.pbar / cfg.p - 1.0;
    push(
        "cost_growth_strict",
        cfg.p1 < bound && cfg.p2 < bound,
        format!("p1 = {}, p2 = {} < pbar/p − 1 = {}", cfg.p1, cfg.p2, bound),
    );
    // On a finite action grid every control is bounded, so r-admissibility
    // holds for every r.
    push("admissible_finite_grid", true, "finite action grid".into());
    FeasibilityReport { checks }
}

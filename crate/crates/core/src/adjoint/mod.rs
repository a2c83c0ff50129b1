//! Regression-based backward solvers: the risk adjustment `y'_t = E[D | F_t]`
//! with its integrand `z'`, and the adjoint BSDE
//! `dy = −∇_x H dt + z dw`, `y_T = y'_T ∇g(x_T)`.

pub mod backward;
pub mod basis;
pub mod diagnostics;
pub mod regression;

pub use backward::{
    adjoint_on, hamiltonian_state_gradient, risk_adjustment_on, solve_adjoint, solve_adjoints, solve_risk_adjustment,
    AdjointPair, AdjointProcesses, CrossSections, RiskAdjustment,
};
pub use basis::{BasisFamily, FeatureMap, RegressionBasis, Ridge};
pub use diagnostics::{martingale_diagnostics, MartingaleReport, StepDeviation};
pub use regression::{fit_conditional, LeastSquares, Predictor, Projection};

#[cfg(test)]
mod tests;

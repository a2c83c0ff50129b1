//! Forward simulation of vague-controlled SDEs.

pub mod brownian;
pub mod feasibility;
pub mod grid;
pub mod model;
pub mod policy;
pub mod simulate;
pub mod variational;

pub use brownian::{sample_brownian, BrownianDriver};
pub use feasibility::{check_feasibility, Check, FeasibilityConfig, FeasibilityReport};
pub use grid::{build_time_grid, TimeGrid};
pub use model::{ActionGrid, Coefficients, Dims, FnCoefficients, InitialLaw, ModelSpec, TableCoefficients};
pub use policy::{convex_combine, FeedbackRule, MeasurePolicy, PolicyRule};
pub use simulate::{simulate_forward, total_cost, PathEnsemble};
pub use variational::{simulate_variational, Variation};

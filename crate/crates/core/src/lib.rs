//! Risk-aware stochastic minimum principle, numerically.
//!
//! The crate simulates SDEs driven by measure-valued ("vague") controls,
//! evaluates law-invariant risk functions together with their L-derivatives,
//! estimates the adjoint and risk-adjustment processes by least-squares Monte
//! Carlo, and iterates pointwise Hamiltonian minimization (the method of
//! successive approximations) towards a candidate optimal control.
//!
//! Module map:
//!
//! - [`sde`]: time grid, Brownian sampling, forward and variational
//!   simulation, policy algebra, feasibility checks.
//! - [`risk`]: risk functions over empirical samples and their derivatives.
//! - [`adjoint`]: regression conditional expectations and backward solvers.
//! - [`control`]: Hamiltonian, its minimization, the objective, and MSA.
//! - [`portfolio`]: the log-wealth allocation model and its closed forms.
//! - [`cli`]: JSON configuration, experiment orchestration, CSV artifacts.

// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adjoint;
pub mod cli;
pub mod control;
pub mod error;
pub mod portfolio;
pub mod risk;
pub mod sde;

pub use error::{Error, Result};

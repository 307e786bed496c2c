//! Accelerated first-order methods for smooth convex multiobjective optimization.
//!
//! The crate provides:
//!
//! - [`problem`]: the [`Problem`] trait, built-in convex test problems, reference
//!   sets and finite-difference gradient checks;
//! - [`simplex`]: simplex projection and the simplex-constrained least-squares
//!   subproblems over the convex hull of the gradients;
//! - [`schedule`] and [`solver`]: the accelerated gradient method with the
//!   generalized momentum schedule, and the steepest-descent baseline;
//! - [`diagnostics`]: gaps, merit surrogate, energies, Lyapunov values, rate fits;
//! - [`mavd`]: a simulator for the inertial system with vanishing damping.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix `f64`.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod mavd;
pub mod problem;
pub mod scalar;
pub mod schedule;
pub mod simplex;
pub mod solver;

pub use error::{Error, Result};
pub use problem::{Jos1, Problem, QuadraticEnsemble, RefOrigin, ReferenceSet};
pub use scalar::Scalar;
pub use schedule::StepSchedule;
pub use simplex::{GradientHull, SimplexWeights};
pub use solver::{RunResult, SolverConfig, SolverState, StepInfo, Termination};

pub type Hull64 = GradientHull<f64>;
pub type Weights64 = SimplexWeights<f64>;
pub type Schedule64 = StepSchedule<f64>;
pub type State64 = SolverState<f64>;
pub type Config64 = SolverConfig<f64>;
pub type Refs64 = ReferenceSet<f64>;
pub type Row64 = diagnostics::DiagnosticsRow<f64>;
pub type Jos1_64 = Jos1<f64>;
pub type Quadratic64 = QuadraticEnsemble<f64>;

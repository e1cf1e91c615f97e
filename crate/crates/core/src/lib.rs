//! Numerical toolkit for delay differential equations whose delay is
//! governed by a companion ordinary differential equation, and for the
//! time transformations that turn them into constant-lag systems.
//!
//! The model integrated here is
//!
//! ```text
//! y'(t)   = f(t, y(t), y(t − η(t)))            state, in ℝᵐ
//! η'(t)   = −μ·(η(t) − η̄) + G(y(t))            delay, relaxing toward η̄
//! y = g on [t0 − 2η̄, t0],  η(t0) = η0          initial data
//! ```
//!
//! As long as `|G| ≤ μ·η̄`, the delay stays inside `[0, 2η̄]`, so the
//! history span `2η̄` never runs out. When additionally `2μη̄ < 1`, the
//! deviating argument `t − η(t)` is strictly increasing and can be
//! inverted; composing its inverse window by window builds a monotone
//! time map `α` under which the rebased state `z(s) = y(α(s))` solves a
//! constant-lag equation. The crate provides:
//!
//! * [`trajectory`] — piecewise cubic-Hermite storage with dense, exactly
//!   reproducible evaluation;
//! * [`monotone`] — certified monotone functions and safeguarded
//!   Newton/bisection inversion;
//! * [`sdd`] — the fixed-step integrator for the state-dependent-delay
//!   system, plus an independent fixed-point reference solver;
//! * [`transform`] — construction of the time map and its growth and
//!   equivalence diagnostics;
//! * [`transformed`] — the constant-lag companion system solved by the
//!   method of steps, with recovery of the original unknowns;
//! * [`verify`] — the claim-anchored verification harness and numerical
//!   experiments;
//! * [`scenario`] — a closed catalog of right-hand sides, couplings and
//!   histories for driving the above from configuration files.
//!
//! All numerics are generic over the scalar type through [`real::Real`];
//! the `*64` aliases below fix `f64`, for which the shipped tolerances
//! are calibrated.

// Index loops walk several parallel slices at once, and the negated
// comparisons (`!(x > 0)`) deliberately reject NaN along with the
// out-of-range values.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub(crate) mod grid;
pub mod monotone;
pub mod real;
pub mod scenario;
pub mod sdd;
pub mod trajectory;
pub mod transform;
pub mod transformed;
pub mod verify;

pub use monotone::{MonotoneError, MonotoneFn};
pub use real::Real;
pub use scenario::{builtin, builtin_catalog, CouplingSpec, HistorySpec, RequestedCheck, RhsSpec, Scenario, ScenarioError};
pub use sdd::{InitialData, ModelBounds, Params, PicardReference, SddError, SddSolution};
pub use trajectory::{Segment, Trajectory, TrajectoryBuilder, TrajectoryError};
pub use transform::{build_time_map, GrowthMargins, TimeEquivalence, TimeMap, TimeMapSeed, TransformError};
pub use transformed::{
    integrate_transformed, process_restart_check, transformed_delay_rate, JoinJump, RestartReport,
    TransformedError, TransformedSolution,
};
pub use verify::{
    alpha_convergence_experiment, continuous_dependence_experiment, manifold_residual,
    regularity_estimates, stability_transfer_check, verify_equivalence, BoundKind, Check, Claim,
    ModulusRow, VerificationReport, VerifyError,
};

/// `f64` trajectory.
pub type Trajectory64 = Trajectory<f64>;
/// `f64` monotone function.
pub type MonotoneFn64 = MonotoneFn<f64>;
/// `f64` model definition.
pub type Params64 = Params<f64>;
/// `f64` initial data.
pub type InitialData64 = InitialData<f64>;
/// `f64` solution of the state-dependent-delay system.
pub type SddSolution64 = SddSolution<f64>;
/// `f64` time map.
pub type TimeMap64 = TimeMap<f64>;
/// `f64` solution of the transformed constant-lag system.
pub type TransformedSolution64 = TransformedSolution<f64>;

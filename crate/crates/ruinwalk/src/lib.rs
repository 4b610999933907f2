//! Analysis of the `[pqrs]` random walk: a discrete walk that at each step
//! moves forward with probability `p`, backward with probability `q`, stays
//! put with probability `r`, or is absorbed in its current state with
//! probability `s` (`p + q + r + s = 1`).
//!
//! The crate evaluates, in closed form, absorption probabilities at barriers,
//! distributions of the running maximum and minimum, factorial moments of the
//! barrier absorption times, and the expected time before absorption, on the
//! interval `[0, N]`, the half-line `[0, ∞)` and the full integer line.
//! Every analytic value can be cross-checked against an independent Monte
//! Carlo engine ([`mc`]) and, in the test suite, against direct linear-system
//! solves.

pub mod absorption;
pub mod cli;
pub mod extrema;
pub mod mc;
pub mod meantime;
pub mod moments;
pub mod walk_core;

pub use walk_core::{validate_params, DomainKind, DomainSpec, Regime, RootPair, WalkParams};

use thiserror::Error;

/// Errors shared across all modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative probability for {0}")]
    NegativeProbability(&'static str),
    #[error("probabilities sum to {0:.17}, not 1")]
    SumNotOne(f64),
    #[error("p and q must both be positive")]
    ZeroStepProbability,
    #[error("negative discriminant at z = {0}")]
    NegativeDiscriminant(f64),
    #[error("double characteristic root at z = {0}")]
    DegenerateRoot(f64),
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(i64, i64),
    #[error("start {0} outside interval [{1}, {2}]")]
    StartOutsideInterval(i64, i64, i64),
    #[error("start {0} below barrier {1}")]
    StartBelowBarrier(i64, i64),
    #[error("start {0} above barrier {1}")]
    StartAboveBarrier(i64, i64),
    #[error("state {0} is not a transient state of this domain")]
    NonTransientState(i64),
    #[error("expected visit count diverges")]
    InfiniteVisits,
    #[error("moment is infinite")]
    InfiniteMoment,
    #[error("tail enumeration exceeded {0} support points")]
    NonconvergentTail(u64),
    #[error("finite-difference stencil unstable: estimated relative error {0:.3e}")]
    StencilUnstable(f64),
    #[error("{0} of {1} paths censored at the step cap in a regime with a.s. absorption")]
    ExcessiveCensoring(u64, u64),
    #[error("missing Monte Carlo quantity: {0}")]
    MissingQuantity(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Numerical local fractional calculus on self-similar Cantor-type sets.
//!
//! Equations D^q f = ḡ·1_C, with C a Cantor-type set of similarity dimension
//! q, have devil's-staircase solutions: fractal integrals of ḡ against the
//! set's natural measure. This crate builds such sets, evaluates the
//! staircase P_C digit-exactly, computes the integrals with certified
//! lower/upper bounds, estimates critical orders and local fractional
//! derivatives at a point, and solves separable equations
//! dy/dx^q = ḡ(x)·1_C(x)·h(y) by the auxiliary-equation split.
//!
//! All values are immutable after construction and every operation is a pure
//! function of its inputs; everything is safe for unrestricted concurrent
//! use. Sums run in fixed ascending cover order with compensated
//! accumulation, so results are reproducible bit-for-bit.

pub mod error;
mod gamma;
pub mod lfd;
pub mod measure;
pub mod sets;
pub mod solver;
mod sum;

pub use error::{Error, Result};
pub use gamma::gamma_plus_one;
pub use lfd::{
    estimate_critical_order, lfd_at, verify_solution, LfdEstimate, ResidualPoint, SampledFunction,
    ScaleLadder, Side, VerificationReport,
};
pub use measure::{
    cdf, integrate_recursive, integrate_riemann, integrate_sum, BoundsQuality, FractalTerm, Gbar,
    GbarExpr, IntegralResult, IntegrationMethod, StaircaseEvaluator, TagRule,
};
pub use sets::{
    ContractionMap, CoverInterval, GapReport, Interval, Location, SelfSimilarSet, SetCover,
    DEFAULT_MAX_DEPTH,
};
pub use solver::{
    solve, solve_sum_rhs, Anchor, CustomH, EvaluatedPoint, HDoc, HSpec, ProblemDoc, ScalarFn,
    SeparableProblem, SolutionEvaluator,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

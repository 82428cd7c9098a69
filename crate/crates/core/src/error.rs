//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient interval [{lo}, {hi}] is empty, inverted or not finite")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("contraction ratio {0} outside (0, 1)")]
    InvalidRatio(f64),

    #[error("need at least two contraction maps, got {0}")]
    TooFewMaps(usize),

    #[error("at most 36 contraction maps supported (digit addresses), got {0}")]
    TooManyMaps(usize),

    #[error("contraction ratios differ: {0} vs {1}")]
    UnequalRatios(f64, f64),

    #[error("map image [{lo}, {hi}] escapes the ambient interval [{a}, {b}]")]
    MapEscapesAmbient { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("images of maps {i} and {j} have overlapping interiors")]
    OverlappingChildren { i: usize, j: usize },

    #[error("m·r = {0} ≥ 1: similarity dimension would reach 1, not a Cantor-type set")]
    DimensionNotFractal(f64),

    #[error("middle fraction parameter p = {0} must be a finite number > 2")]
    InvalidMiddleFraction(f64),

    #[error("depth {depth} exceeds configured maximum {max}")]
    DepthExceedsMax { depth: u32, max: u32 },

    #[error("x = {x} outside ambient interval [{lo}, {hi}]")]
    OutsideAmbient { x: f64, lo: f64, hi: f64 },

    #[error("order q = {0} outside (0, 1)")]
    OrderOutOfRange(f64),

    #[error("non-finite sample at x = {0}")]
    NonFiniteSample(f64),

    #[error("integration range [{x0}, {x1}] is invalid or escapes the ambient interval")]
    InvalidRange { x0: f64, x1: f64 },

    #[error("set dimensions differ beyond 1e-12: {0} vs {1}; the equation order would be ill-defined")]
    DimensionMismatch(f64, f64),

    #[error("no integrand terms supplied")]
    NoTerms,

    #[error("negative Lipschitz bound {0}")]
    NegativeLipschitz(f64),

    #[error("scale ladder invalid: {0}")]
    InvalidLadder(String),

    #[error("only {usable} usable scales in the ladder (need at least 4)")]
    InsufficientScales { usable: usize },

    #[error("sample abscissae must be strictly increasing (violation at index {0})")]
    NonMonotoneSamples(usize),

    #[error("need at least {0} samples")]
    TooFewSamples(usize),

    #[error("malformed CSV at line {0}: expected two numeric columns x,f")]
    MalformedCsv(usize),

    #[error("sample x = {x} is not a set point: generation-{generation} gap ({lo}, {hi})")]
    SampleNotInSet {
        x: f64,
        generation: u32,
        lo: f64,
        hi: f64,
    },

    #[error("no real solution branch for y0 = {y0} with exponent k = {k}")]
    InvalidPowerBranch { y0: f64, k: f64 },

    #[error("x = {x} is outside the solution's validity interval (boundary at x = {boundary})")]
    OutsideValidity { x: f64, boundary: f64 },

    #[error("root bracketing failed while inverting the antiderivative at target {0}")]
    BracketFailure(f64),

    #[error("custom h anchored by an integration constant requires an explicit inverse handle")]
    MissingInverse,

    #[error("unknown integrand expression '{0}' (expected one|x|x2|poly:[c0,c1,...])")]
    UnknownExpr(String),

    #[error("unknown h kind '{0}' (expected constant_one|linear|quadratic|power)")]
    UnknownHKind(String),

    #[error("h kind 'power' requires the exponent field k")]
    MissingPowerExponent,

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to rejected
    /// input. The CLI maps the two classes to distinct exit codes.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteSample(_)
                | Error::InsufficientScales { .. }
                | Error::BracketFailure(_)
                | Error::OutsideValidity { .. }
                | Error::InvalidPowerBranch { .. }
        )
    }
}

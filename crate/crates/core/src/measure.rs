//! The staircase function P_C and fractal integrals ∫ ḡ·1_C d^q x.
//!
//! Integrals are generalized Riemann sums over the set's own depth-n cover:
//! each interval I contributes ḡ(tag)·|I|^q/Γ(q+1) with the tag fixed at the
//! left endpoint (a set point). Since m·r^q = 1 the weights sum to
//! (b−a)^q/Γ(q+1) at every depth, which is what makes the limit finite for
//! fractally-supported integrands. Upper/lower sums bound the oscillation of
//! ḡ over cover intervals, not of the indicator; a Darboux reading would
//! collapse to zero because set points are nowhere dense.
//!
//! The staircase P_C(x) = (b−a)^q·F_C(x)/Γ(q+1), with F_C the distribution
//! function of the natural measure (mass m^{−n} per depth-n interval), is the
//! closed form of the ḡ ≡ 1 integral over [a, x]; the identity is exercised
//! against the Riemann sums in the tests.

use crate::error::{Error, Result};
use crate::gamma::gamma_plus_one;
use crate::sets::{DescendStep, Interval, SelfSimilarSet};
use crate::sum::CompensatedSum;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Named integrand expressions accepted by file formats and the CLI:
/// `one`, `x`, `x2`, `poly:[c0,c1,...]`.
#[derive(Debug, Clone, PartialEq)]
pub enum GbarExpr {
    One,
    X,
    X2,
    Poly(Vec<f64>),
}

impl GbarExpr {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(GbarExpr::One),
            "x" => Ok(GbarExpr::X),
            "x2" => Ok(GbarExpr::X2),
            _ => {
                if let Some(body) = s.strip_prefix("poly:") {
                    let coeffs: Vec<f64> =
                        serde_json::from_str(body).map_err(|_| Error::UnknownExpr(s.to_string()))?;
                    if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                        return Err(Error::UnknownExpr(s.to_string()));
                    }
                    Ok(GbarExpr::Poly(coeffs))
                } else {
                    Err(Error::UnknownExpr(s.to_string()))
                }
            }
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            GbarExpr::One => 1.0,
            GbarExpr::X => t,
            GbarExpr::X2 => t * t,
            GbarExpr::Poly(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck),
        }
    }

    /// A valid Lipschitz bound on the given interval (sup of |derivative|
    /// bounded coefficient-wise for polynomials).
    pub fn lipschitz_bound(&self, iv: Interval) -> f64 {
        let t = iv.lo.abs().max(iv.hi.abs());
        match self {
            GbarExpr::One => 0.0,
            GbarExpr::X => 1.0,
            GbarExpr::X2 => 2.0 * t,
            GbarExpr::Poly(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, ck)| i as f64 * ck.abs() * t.powi(i as i32 - 1))
                .sum(),
        }
    }
}

impl fmt::Display for GbarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GbarExpr::One => write!(f, "one"),
            GbarExpr::X => write!(f, "x"),
            GbarExpr::X2 => write!(f, "x2"),
            GbarExpr::Poly(c) => {
                write!(f, "poly:[")?;
                for (i, ck) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{ck}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// The scalar factor ḡ of an integrand ḡ·1_C: a named expression or an
/// arbitrary function handle.
#[derive(Clone)]
pub enum Gbar {
    Expr(GbarExpr),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Gbar {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Gbar::Expr(e) => e.eval(t),
            Gbar::Custom(f) => f(t),
        }
    }

    /// True when ḡ is literally the constant one; integration then has the
    /// digit-exact staircase closed form.
    pub fn is_unit(&self) -> bool {
        matches!(self, Gbar::Expr(GbarExpr::One))
    }
}

impl fmt::Debug for Gbar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gbar::Expr(e) => write!(f, "Gbar::Expr({e})"),
            Gbar::Custom(_) => write!(f, "Gbar::Custom(..)"),
        }
    }
}

/// One integrand term ḡ·1_C with an optional Lipschitz bound for ḡ used to
/// certify upper/lower sums.
#[derive(Debug, Clone)]
pub struct FractalTerm {
    set: SelfSimilarSet,
    gbar: Gbar,
    lipschitz: Option<f64>,
}

impl FractalTerm {
    /// Term from a named expression; a Lipschitz bound valid on the ambient
    /// interval is derived automatically, so brackets are certified.
    pub fn new(set: SelfSimilarSet, expr: GbarExpr) -> Result<Self> {
        let lipschitz = Some(expr.lipschitz_bound(set.ambient()));
        let term = Self {
            set,
            gbar: Gbar::Expr(expr),
            lipschitz,
        };
        term.spot_check()?;
        Ok(term)
    }

    /// Term from an arbitrary function handle. Brackets stay heuristic until
    /// a Lipschitz bound is supplied via [`FractalTerm::with_lipschitz`].
    pub fn with_custom<F>(set: SelfSimilarSet, gbar: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let term = Self {
            set,
            gbar: Gbar::Custom(Arc::new(gbar)),
            lipschitz: None,
        };
        term.spot_check()?;
        Ok(term)
    }

    pub fn with_lipschitz(mut self, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::NegativeLipschitz(bound));
        }
        self.lipschitz = Some(bound);
        Ok(self)
    }

    pub fn set(&self) -> &SelfSimilarSet {
        &self.set
    }

    pub fn gbar(&self) -> &Gbar {
        &self.gbar
    }

    pub fn dimension(&self) -> f64 {
        self.set.dimension()
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    // ḡ must be evaluable and finite on the ambient interval; probe the
    // depth-4 cover endpoints and midpoints.
    fn spot_check(&self) -> Result<()> {
        let mut bad = None;
        self.set.walk_cover(4.min(self.set.max_depth()), &mut |lo, hi, _| {
            for t in [lo, 0.5 * (lo + hi), hi] {
                if bad.is_none() && !self.gbar.eval(t).is_finite() {
                    bad = Some(t);
                }
            }
        });
        match bad {
            Some(t) => Err(Error::NonFiniteSample(t)),
            None => Ok(()),
        }
    }
}

/// Quadrature scheme used to produce an [`IntegralResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationMethod {
    RiemannCover,
    SelfSimilarRecursion,
}

/// Whether the reported bracket is a certified enclosure (Lipschitz bound
/// available) or a sample-based heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsQuality {
    Certified,
    Heuristic,
}

/// Tag rule used for the point sample inside each cover interval. Only left
/// endpoints are implemented; the choice is surfaced rather than hidden
/// because the limit's independence of the tag is not asserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagRule {
    LeftEndpoint,
}

/// Value of ∫ ḡ·1_C d^q x with lower/upper bounds and quadrature metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub depth: u32,
    pub method: IntegrationMethod,
    pub tag: TagRule,
    pub bounds: BoundsQuality,
}

impl IntegralResult {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn bracket_width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Levels after which one more digit moves the distribution function by less
/// than 1e-15: the default recursion cutoff for cdf evaluation.
pub(crate) fn default_cdf_levels(arity: usize) -> u32 {
    let mut n = 0u32;
    let mut w = 1.0f64;
    while w >= 1e-15 {
        w /= arity as f64;
        n += 1;
    }
    n
}

fn cdf_with_levels(set: &SelfSimilarSet, x: f64, levels: u32) -> f64 {
    let ambient = set.ambient();
    if x <= ambient.lo {
        return 0.0;
    }
    if x >= ambient.hi {
        return 1.0;
    }
    let m = set.arity() as f64;
    let mut scale = 1.0f64;
    let mut shift = 0.0f64;
    let mut acc = 0.0f64;
    let mut weight = 1.0f64;
    for level in 0..levels {
        weight /= m;
        match set.descend_step(scale, shift, x, set.drift_tolerance(level)) {
            DescendStep::Child { index } => {
                acc += index as f64 * weight;
                let map = &set.maps()[index];
                shift += scale * map.offset();
                scale *= map.ratio();
            }
            // endpoint snaps close the digit expansion exactly: a left
            // endpoint carries no further mass, a right endpoint carries all
            // of its child's
            DescendStep::LeftEndpoint { index } => return acc + index as f64 * weight,
            DescendStep::RightEndpoint { index } => return acc + (index + 1) as f64 * weight,
            DescendStep::Gap { left_children, .. } => {
                // all mass of the children left of the gap, nothing beyond
                return acc + left_children as f64 * weight;
            }
        }
    }
    // still inside a cover interval: close with half the remaining mass
    acc + 0.5 * weight
}

/// Distribution function F_C(x) ∈ [0, 1] of the natural self-similar measure:
/// recursive digit descent accumulating 1/m per level, stopping at a gap or
/// once the remaining mass drops below 1e-15. Clamps to 0 below the ambient
/// interval and 1 above it.
pub fn cdf(set: &SelfSimilarSet, x: f64) -> f64 {
    cdf_with_levels(set, x, default_cdf_levels(set.arity()))
}

/// Evaluates the staircase solution P_C(x) = (b−a)^q·F_C(x)/Γ(q+1) of
/// D^q f = 1_C. Nondecreasing, constant on gaps, with
/// Γ(q+1)·P_C(b) = (b−a)^q.
#[derive(Debug, Clone)]
pub struct StaircaseEvaluator {
    set: SelfSimilarSet,
    gamma_factor: f64,
    amplitude: f64,
    max_recursion_depth: u32,
}

impl StaircaseEvaluator {
    pub fn new(set: SelfSimilarSet) -> Result<Self> {
        let gamma_factor = gamma_plus_one(set.dimension())?;
        let amplitude = set.ambient().width().powf(set.dimension()) / gamma_factor;
        let max_recursion_depth = default_cdf_levels(set.arity());
        Ok(Self {
            set,
            gamma_factor,
            amplitude,
            max_recursion_depth,
        })
    }

    pub fn with_max_recursion_depth(mut self, levels: u32) -> Self {
        self.max_recursion_depth = levels;
        self
    }

    pub fn set(&self) -> &SelfSimilarSet {
        &self.set
    }

    /// Γ(q+1) for the set's dimension.
    pub fn gamma_factor(&self) -> f64 {
        self.gamma_factor
    }

    pub fn max_recursion_depth(&self) -> u32 {
        self.max_recursion_depth
    }

    pub fn cdf(&self, x: f64) -> f64 {
        cdf_with_levels(&self.set, x, self.max_recursion_depth)
    }

    /// P_C(x).
    pub fn value(&self, x: f64) -> f64 {
        self.amplitude * self.cdf(x)
    }

    /// Bound on the digit-truncation error of [`StaircaseEvaluator::value`].
    pub fn truncation_bound(&self) -> f64 {
        let m = self.set.arity() as f64;
        self.amplitude * (m.powi(-(self.max_recursion_depth as i32)) + 4.0 * f64::EPSILON)
    }
}

struct BoundAccumulators {
    value: CompensatedSum,
    lower: CompensatedSum,
    upper: CompensatedSum,
    bad_sample: Option<f64>,
}

impl BoundAccumulators {
    fn new() -> Self {
        Self {
            value: CompensatedSum::new(),
            lower: CompensatedSum::new(),
            upper: CompensatedSum::new(),
            bad_sample: None,
        }
    }
}

/// Generalized Riemann sum for ∫ ḡ·1_C d^q x over `range` ⊆ ambient at the
/// given cover depth.
///
/// Fully covered intervals contribute tag value, inf and sup estimates of ḡ
/// (endpoints + midpoint samples, widened by L·|I| under a Lipschitz bound).
/// Intervals straddling a range endpoint keep the bracket an enclosure for
/// one-signed ḡ: their full weight goes to the outer bound, nothing to the
/// inner one, and half the tag weight to the value.
pub fn integrate_riemann(term: &FractalTerm, range: (f64, f64), depth: u32) -> Result<IntegralResult> {
    let set = term.set();
    set.check_depth(depth)?;
    let ambient = set.ambient();
    let (x0, x1) = range;
    if !(x0.is_finite() && x1.is_finite()) || x0 > x1 {
        return Err(Error::InvalidRange { x0, x1 });
    }
    let tol = set.boundary_tolerance();
    if x0 < ambient.lo - tol || x1 > ambient.hi + tol {
        return Err(Error::InvalidRange { x0, x1 });
    }
    let x0 = x0.max(ambient.lo);
    let x1 = x1.min(ambient.hi);
    if x0 >= x1 {
        // a single point carries no measure
        return Ok(IntegralResult {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            depth,
            method: IntegrationMethod::RiemannCover,
            tag: TagRule::LeftEndpoint,
            bounds: BoundsQuality::Certified,
        });
    }

    let q = set.dimension();
    let gamma = gamma_plus_one(q)?;
    let interval_width = ambient.width() * set.ratio().powi(depth as i32);
    let weight = interval_width.powf(q) / gamma;
    let lipschitz = term.lipschitz();
    // fold noise must not turn exactly-aligned intervals into straddlers
    let edge_tol = set.drift_tolerance(depth);

    let mut acc = BoundAccumulators::new();
    set.walk_cover(depth, &mut |lo, hi, _| {
        if hi <= x0 + edge_tol || lo >= x1 - edge_tol || acc.bad_sample.is_some() {
            return;
        }
        let mid = 0.5 * (lo + hi);
        let samples = [term.gbar().eval(lo), term.gbar().eval(mid), term.gbar().eval(hi)];
        for (s, t) in samples.iter().zip([lo, mid, hi]) {
            if !s.is_finite() {
                acc.bad_sample = Some(t);
                return;
            }
        }
        let mut inf_est = samples[0].min(samples[1]).min(samples[2]);
        let mut sup_est = samples[0].max(samples[1]).max(samples[2]);
        if let Some(l) = lipschitz {
            inf_est -= l * (hi - lo);
            sup_est += l * (hi - lo);
        }
        let tag_contribution = samples[0] * weight;
        let straddles = lo < x0 - edge_tol || hi > x1 + edge_tol;
        if straddles {
            acc.value.add(0.5 * tag_contribution);
            acc.lower.add((inf_est * weight).min(0.0));
            acc.upper.add((sup_est * weight).max(0.0));
        } else {
            acc.value.add(tag_contribution);
            acc.lower.add(inf_est * weight);
            acc.upper.add(sup_est * weight);
        }
    });
    if let Some(t) = acc.bad_sample {
        return Err(Error::NonFiniteSample(t));
    }

    Ok(IntegralResult {
        value: acc.value.total(),
        lower: acc.lower.total(),
        upper: acc.upper.total(),
        depth,
        method: IntegrationMethod::RiemannCover,
        tag: TagRule::LeftEndpoint,
        bounds: if lipschitz.is_some() {
            BoundsQuality::Certified
        } else {
            BoundsQuality::Heuristic
        },
    })
}

/// Full-ambient quadrature exploiting self-similarity: the natural-measure
/// mean E[ḡ] = (1/m)·Σ E[ḡ∘S_i] unrolled to `depth` with midpoint closure at
/// the leaves, scaled by (b−a)^q/Γ(q+1). A supplied Lipschitz bound turns
/// leaf oscillation into a certified bracket of half-width
/// L·(b−a)·r^depth/2 · (b−a)^q/Γ(q+1).
pub fn integrate_recursive(term: &FractalTerm, depth: u32) -> Result<IntegralResult> {
    let set = term.set();
    set.check_depth(depth)?;
    let q = set.dimension();
    let gamma = gamma_plus_one(q)?;
    let total_mass = set.ambient().width().powf(q) / gamma;

    let mut mean = CompensatedSum::new();
    let mut bad: Option<f64> = None;
    set.walk_cover(depth, &mut |lo, hi, _| {
        if bad.is_some() {
            return;
        }
        let mid = 0.5 * (lo + hi);
        let v = term.gbar().eval(mid);
        if !v.is_finite() {
            bad = Some(mid);
            return;
        }
        mean.add(v);
    });
    if let Some(t) = bad {
        return Err(Error::NonFiniteSample(t));
    }
    let leaves = (set.arity() as f64).powi(depth as i32);
    let value = total_mass * (mean.total() / leaves);

    let (lower, upper, bounds) = match term.lipschitz() {
        Some(l) => {
            let half_leaf = 0.5 * set.ambient().width() * set.ratio().powi(depth as i32);
            let delta = total_mass * l * half_leaf;
            (value - delta, value + delta, BoundsQuality::Certified)
        }
        None => (value, value, BoundsQuality::Heuristic),
    };

    Ok(IntegralResult {
        value,
        lower,
        upper,
        depth,
        method: IntegrationMethod::SelfSimilarRecursion,
        tag: TagRule::LeftEndpoint,
        bounds,
    })
}

/// Superposition Σ_j ∫ ḡ_j·1_{C_j} d^q x: componentwise Riemann results
/// summed. All sets must share one dimension q (within 1e-12) or the order of
/// the underlying equation would be ill-defined. `range` is in global
/// coordinates and is clipped to each term's ambient interval; `None`
/// integrates every term over its full ambient.
pub fn integrate_sum(
    terms: &[FractalTerm],
    range: Option<(f64, f64)>,
    depth: u32,
) -> Result<IntegralResult> {
    if terms.is_empty() {
        return Err(Error::NoTerms);
    }
    let q0 = terms[0].dimension();
    for t in &terms[1..] {
        if (t.dimension() - q0).abs() > 1e-12 {
            return Err(Error::DimensionMismatch(q0, t.dimension()));
        }
    }

    let mut value = 0.0;
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut bounds = BoundsQuality::Certified;
    for term in terms {
        let ambient = term.set().ambient();
        let term_range = match range {
            None => (ambient.lo, ambient.hi),
            Some((x0, x1)) => {
                let lo = x0.max(ambient.lo);
                let hi = x1.min(ambient.hi);
                if lo >= hi {
                    continue; // no overlap: exact zero contribution
                }
                (lo, hi)
            }
        };
        let part = integrate_riemann(term, term_range, depth)?;
        value += part.value;
        lower += part.lower;
        upper += part.upper;
        if part.bounds == BoundsQuality::Heuristic {
            bounds = BoundsQuality::Heuristic;
        }
    }

    Ok(IntegralResult {
        value,
        lower,
        upper,
        depth,
        method: IntegrationMethod::RiemannCover,
        tag: TagRule::LeftEndpoint,
        bounds,
    })
}

//! Separable equations dy/dx^q = ḡ(x)·1_C(x)·h(y).
//!
//! The solution splits into two auxiliary problems: du/dx^q = ḡ·1_C, whose
//! solution u is a fractal integral (the staircase itself when ḡ ≡ 1), and
//! dy/du = h(y), solved by inverting the antiderivative H of 1/h:
//! y(x) = H⁻¹(H(y0) + u(x)). The integration constant is anchored either by
//! an initial condition (x0, y0) or given explicitly, the latter exposing
//! branches like y = −1/P_C(x) that arise as the zero-constant reading.
//!
//! Validity is the maximal x-interval on which H(y0) + u(x) stays inside the
//! range of H on its monotone branch; the boundary abscissa, when the branch
//! is exited, is located by bisection on the (staircase-exact) u. Solutions
//! through h(y0) = 0 are the constant equilibrium, flagged as such. No
//! uniqueness claim is made: the solver returns the separable-branch
//! solution only.

use crate::error::{Error, Result};
use crate::measure::{integrate_riemann, FractalTerm, GbarExpr, StaircaseEvaluator};
use crate::sets::Interval;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied h with its antiderivative machinery.
#[derive(Clone)]
pub struct CustomH {
    /// h(y), nonzero on the branch between adjacent entries of `zeros`.
    pub h: ScalarFn,
    /// H(y), an antiderivative of 1/h on that branch.
    pub antiderivative: ScalarFn,
    /// H⁻¹; numeric monotone inversion is used when absent.
    pub inverse: Option<ScalarFn>,
    /// The singular set {y : h(y) = 0}, used to pick the branch.
    pub zeros: Vec<f64>,
}

/// The y-dependence of the right-hand side.
#[derive(Clone)]
pub enum HSpec {
    /// h ≡ 1: the simple equation, y = y0 + u.
    ConstantOne,
    /// h(y) = y: y = y0·exp(u).
    Linear,
    /// h(y) = y²: y = y0/(1 − y0·u), blow-up at u = 1/y0.
    Quadratic,
    /// h(y) = y^k, k ≠ 1: y = (y0^{1−k} + (1−k)·u)^{1/(1−k)} with
    /// branch/sign guards.
    Power { k: f64 },
    Custom(CustomH),
}

impl fmt::Debug for HSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HSpec::ConstantOne => write!(f, "HSpec::ConstantOne"),
            HSpec::Linear => write!(f, "HSpec::Linear"),
            HSpec::Quadratic => write!(f, "HSpec::Quadratic"),
            HSpec::Power { k } => write!(f, "HSpec::Power {{ k: {k} }}"),
            HSpec::Custom(c) => write!(f, "HSpec::Custom {{ zeros: {:?}, .. }}", c.zeros),
        }
    }
}

/// How the integration constant is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    /// Pass through (x0, y0).
    Initial { x0: f64, y0: f64 },
    /// H(y(x)) = c + ∫_a^x ḡ·1_C d^q t with the given constant; c = 0 gives
    /// the zero-constant branches such as y = −1/P_C(x).
    Constant { c: f64 },
}

fn is_integer(k: f64) -> bool {
    k.fract() == 0.0 && k.abs() < 9.0e15
}

/// x^e for integer e, respecting the sign of a negative base.
fn signed_pow(base: f64, e: f64) -> f64 {
    if base < 0.0 {
        let mag = (-base).powf(e);
        if (e as i64) % 2 == 0 {
            mag
        } else {
            -mag
        }
    } else {
        base.powf(e)
    }
}

/// A separable problem: ḡ·1_C (with the set fixing the order q), h, and the
/// anchoring of the integration constant.
#[derive(Debug, Clone)]
pub struct SeparableProblem {
    term: FractalTerm,
    h: HSpec,
    anchor: Anchor,
}

impl SeparableProblem {
    pub fn new(term: FractalTerm, h: HSpec, x0: f64, y0: f64) -> Result<Self> {
        let ambient = term.set().ambient();
        if !ambient.contains(x0) {
            return Err(Error::OutsideAmbient {
                x: x0,
                lo: ambient.lo,
                hi: ambient.hi,
            });
        }
        if !y0.is_finite() {
            return Err(Error::NonFiniteSample(y0));
        }
        if let HSpec::Power { k } = h {
            if !k.is_finite() {
                return Err(Error::InvalidPowerBranch { y0, k });
            }
            if y0 < 0.0 && !is_integer(k) {
                return Err(Error::InvalidPowerBranch { y0, k });
            }
            if y0 == 0.0 && k < 0.0 {
                return Err(Error::InvalidPowerBranch { y0, k });
            }
        }
        let problem = Self {
            term,
            h,
            anchor: Anchor::Initial { x0, y0 },
        };
        if let HSpec::Custom(c) = &problem.h {
            if !problem.is_equilibrium() && !(c.antiderivative)(y0).is_finite() {
                return Err(Error::NonFiniteSample(y0));
            }
        }
        Ok(problem)
    }

    /// Anchor by an explicit integration constant instead of an initial
    /// value. Custom h requires an inverse handle here: without a y0 there
    /// is no seed for numeric bracketing.
    pub fn with_constant(term: FractalTerm, h: HSpec, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NonFiniteSample(c));
        }
        if let HSpec::Custom(custom) = &h {
            if custom.inverse.is_none() {
                return Err(Error::MissingInverse);
            }
        }
        if let HSpec::Power { k } = h {
            if !k.is_finite() || k == 1.0 {
                return Err(Error::InvalidPowerBranch { y0: f64::NAN, k });
            }
        }
        Ok(Self {
            term,
            h,
            anchor: Anchor::Constant { c },
        })
    }

    pub fn term(&self) -> &FractalTerm {
        &self.term
    }

    pub fn h(&self) -> &HSpec {
        &self.h
    }

    pub fn anchor(&self) -> Anchor {
        self.anchor
    }

    /// Order of the equation: the dimension of the supporting set.
    pub fn dimension(&self) -> f64 {
        self.term.dimension()
    }

    /// h(y).
    pub fn h_value(&self, y: f64) -> f64 {
        match &self.h {
            HSpec::ConstantOne => 1.0,
            HSpec::Linear => y,
            HSpec::Quadratic => y * y,
            HSpec::Power { k } => {
                if y < 0.0 && is_integer(*k) {
                    signed_pow(y, *k)
                } else {
                    y.powf(*k)
                }
            }
            HSpec::Custom(c) => (c.h)(y),
        }
    }

    /// H(y) on the anchored branch.
    pub(crate) fn antiderivative_at(&self, y: f64) -> Result<f64> {
        let v = match &self.h {
            HSpec::ConstantOne => y,
            HSpec::Linear => y.abs().ln(),
            HSpec::Quadratic => -1.0 / y,
            HSpec::Power { k } => {
                if *k == 1.0 {
                    y.abs().ln()
                } else if *k == 0.0 {
                    y
                } else if y < 0.0 && is_integer(*k) {
                    signed_pow(y, 1.0 - k) / (1.0 - k)
                } else {
                    y.powf(1.0 - k) / (1.0 - k)
                }
            }
            HSpec::Custom(c) => (c.antiderivative)(y),
        };
        if !v.is_finite() {
            return Err(Error::NonFiniteSample(y));
        }
        Ok(v)
    }

    pub(crate) fn anchor_constant(&self) -> Result<f64> {
        match self.anchor {
            Anchor::Initial { y0, .. } => self.antiderivative_at(y0),
            Anchor::Constant { c } => Ok(c),
        }
    }

    pub(crate) fn anchor_y0(&self) -> Option<f64> {
        match self.anchor {
            Anchor::Initial { y0, .. } => Some(y0),
            Anchor::Constant { .. } => None,
        }
    }

    /// Abscissa from which u is measured: x0, or the ambient start for
    /// constant-anchored problems.
    pub(crate) fn anchor_x_ref(&self) -> f64 {
        match self.anchor {
            Anchor::Initial { x0, .. } => x0,
            Anchor::Constant { .. } => self.term.set().ambient().lo,
        }
    }

    /// True when h(y0) = 0: the separable branch through that datum is the
    /// constant solution.
    pub fn is_equilibrium(&self) -> bool {
        match self.anchor {
            Anchor::Initial { y0, .. } => {
                let direct = self.h_value(y0) == 0.0;
                let listed = matches!(&self.h, HSpec::Custom(c) if c.zeros.contains(&y0));
                direct || listed
            }
            Anchor::Constant { .. } => false,
        }
    }
}

// ---------------------------------------------------------------------------
// u(x) = ∫_{x_ref}^{x} ḡ·1_C d^q t

pub(crate) enum UFunction {
    /// ḡ ≡ 1: digit-exact staircase difference.
    Staircase {
        staircase: StaircaseEvaluator,
        v_ref: f64,
        eps: f64,
    },
    /// General ḡ: signed partial-range Riemann sums at the solve depth.
    Riemann {
        term: FractalTerm,
        x_ref: f64,
        depth: u32,
    },
    /// Superposition Σ_j u_j.
    Sum(Vec<UFunction>),
}

impl UFunction {
    pub(crate) fn for_term(term: &FractalTerm, x_ref: f64, depth: u32) -> Result<Self> {
        term.set().check_depth(depth)?;
        if term.gbar().is_unit() {
            let staircase = StaircaseEvaluator::new(term.set().clone())?;
            let v_ref = staircase.value(x_ref);
            let eps = 2.0 * staircase.truncation_bound();
            Ok(UFunction::Staircase {
                staircase,
                v_ref,
                eps,
            })
        } else {
            Ok(UFunction::Riemann {
                term: term.clone(),
                x_ref,
                depth,
            })
        }
    }

    pub(crate) fn value(&self, x: f64) -> Result<f64> {
        Ok(self.bracket(x)?.0)
    }

    /// (value, lower, upper) of u at x; x is clamped to each ambient, so u is
    /// constant beyond it.
    pub(crate) fn bracket(&self, x: f64) -> Result<(f64, f64, f64)> {
        match self {
            UFunction::Staircase { staircase, v_ref, eps } => {
                let v = staircase.value(x) - v_ref;
                Ok((v, v - eps, v + eps))
            }
            UFunction::Riemann { term, x_ref, depth } => {
                let ambient = term.set().ambient();
                let xc = x.clamp(ambient.lo, ambient.hi);
                let xr = x_ref.clamp(ambient.lo, ambient.hi);
                if xc == xr {
                    return Ok((0.0, 0.0, 0.0));
                }
                if xc > xr {
                    let r = integrate_riemann(term, (xr, xc), *depth)?;
                    Ok((r.value, r.lower, r.upper))
                } else {
                    let r = integrate_riemann(term, (xc, xr), *depth)?;
                    Ok((-r.value, -r.upper, -r.lower))
                }
            }
            UFunction::Sum(parts) => {
                let mut v = 0.0;
                let mut lo = 0.0;
                let mut hi = 0.0;
                for p in parts {
                    let (pv, plo, phi) = p.bracket(x)?;
                    v += pv;
                    lo += plo;
                    hi += phi;
                }
                Ok((v, lo, hi))
            }
        }
    }
}

pub(crate) fn u_function_for(problem: &SeparableProblem, depth: u32) -> Result<UFunction> {
    UFunction::for_term(problem.term(), problem.anchor_x_ref(), depth)
}

// ---------------------------------------------------------------------------
// Branch machinery: y as a function of u, and the validity predicate.

enum Branch {
    /// y = c0 + u
    Identity { c0: f64 },
    /// y = amp·e^u
    Exponential { amp: f64 },
    /// y = y0/(1 − y0·u), valid while 1 − y0·u > 0
    ReciprocalInitial { y0: f64 },
    /// y = −1/(c + u), valid while side·(c + u) > 0
    ReciprocalConstant { c: f64, side: f64 },
    /// y = sign·(base0 + (1−k)·u_sign·u)^{1/(1−k)}, valid while the base
    /// stays positive
    PowerLaw {
        k: f64,
        sign: f64,
        u_sign: f64,
        base0: f64,
        y0: Option<f64>,
    },
    /// y = H⁻¹(c + u) on the branch (zlo, zhi) around y0
    Custom {
        spec: CustomH,
        c: f64,
        zlo: f64,
        zhi: f64,
        increasing: bool,
        y0: Option<f64>,
        t_min: f64,
        t_max: f64,
    },
}

impl Branch {
    fn resolve(problem: &SeparableProblem) -> Result<Self> {
        match (&problem.h, problem.anchor) {
            (HSpec::ConstantOne, Anchor::Initial { y0, .. }) => Ok(Branch::Identity { c0: y0 }),
            (HSpec::ConstantOne, Anchor::Constant { c }) => Ok(Branch::Identity { c0: c }),
            (HSpec::Linear, Anchor::Initial { y0, .. }) => Ok(Branch::Exponential { amp: y0 }),
            (HSpec::Linear, Anchor::Constant { c }) => Ok(Branch::Exponential { amp: c.exp() }),
            (HSpec::Quadratic, Anchor::Initial { y0, .. }) => Ok(Branch::ReciprocalInitial { y0 }),
            (HSpec::Quadratic, Anchor::Constant { c }) => Ok(Branch::ReciprocalConstant {
                c,
                side: if c != 0.0 { c.signum() } else { 1.0 },
            }),
            (HSpec::Power { k }, anchor) => Self::resolve_power(*k, anchor),
            (HSpec::Custom(spec), anchor) => Self::resolve_custom(spec, anchor),
        }
    }

    fn resolve_power(k: f64, anchor: Anchor) -> Result<Self> {
        // degenerate exponents fold into the simpler kinds
        if k == 0.0 {
            return match anchor {
                Anchor::Initial { y0, .. } => Ok(Branch::Identity { c0: y0 }),
                Anchor::Constant { c } => Ok(Branch::Identity { c0: c }),
            };
        }
        if k == 1.0 {
            return match anchor {
                Anchor::Initial { y0, .. } => Ok(Branch::Exponential { amp: y0 }),
                Anchor::Constant { c } => Ok(Branch::Exponential { amp: c.exp() }),
            };
        }
        match anchor {
            Anchor::Initial { y0, .. } => {
                if y0 > 0.0 {
                    Ok(Branch::PowerLaw {
                        k,
                        sign: 1.0,
                        u_sign: 1.0,
                        base0: y0.powf(1.0 - k),
                        y0: Some(y0),
                    })
                } else if y0 < 0.0 && is_integer(k) {
                    // mirror branch: ŷ = −y obeys dŷ/du = (−1)^{k+1}·ŷ^k
                    let u_sign = if (k as i64) % 2 == 0 { -1.0 } else { 1.0 };
                    Ok(Branch::PowerLaw {
                        k,
                        sign: -1.0,
                        u_sign,
                        base0: (-y0).powf(1.0 - k),
                        y0: Some(y0),
                    })
                } else {
                    Err(Error::InvalidPowerBranch { y0, k })
                }
            }
            Anchor::Constant { c } => Ok(Branch::PowerLaw {
                k,
                sign: 1.0,
                u_sign: 1.0,
                base0: (1.0 - k) * c,
                y0: None,
            }),
        }
    }

    fn resolve_custom(spec: &CustomH, anchor: Anchor) -> Result<Self> {
        let (c, y0) = match anchor {
            Anchor::Initial { y0, .. } => {
                let c = (spec.antiderivative)(y0);
                if !c.is_finite() {
                    return Err(Error::NonFiniteSample(y0));
                }
                (c, Some(y0))
            }
            Anchor::Constant { c } => (c, None),
        };
        let mut zeros = spec.zeros.clone();
        zeros.sort_by(f64::total_cmp);
        let seed = y0.unwrap_or(0.0);
        let zlo = zeros
            .iter()
            .rev()
            .find(|&&z| z < seed)
            .copied()
            .unwrap_or(f64::NEG_INFINITY);
        let zhi = zeros
            .iter()
            .find(|&&z| z > seed)
            .copied()
            .unwrap_or(f64::INFINITY);
        let increasing = match y0 {
            Some(y0) => (spec.h)(y0) > 0.0,
            None => true,
        };
        // probe H toward the branch ends for an approximate range of t
        let (mut t_min, mut t_max) = (f64::NEG_INFINITY, f64::INFINITY);
        let approach = |end: f64, from: f64| -> Option<f64> {
            let mut last = None;
            for j in 1..=48 {
                let y = if end.is_finite() {
                    end + (from - end) * 0.5f64.powi(j)
                } else {
                    from + end.signum() * 2.0f64.powi(j)
                };
                let v = (spec.antiderivative)(y);
                if v.is_finite() {
                    last = Some(v);
                }
            }
            last
        };
        let lo_end = approach(zlo, seed);
        let hi_end = approach(zhi, seed);
        for v in [lo_end, hi_end].into_iter().flatten() {
            t_min = t_min.min(-v.abs() - 1.0);
            t_max = t_max.max(v.abs() + 1.0);
        }
        // orient: H increasing means t grows toward zhi
        if let (Some(a), Some(b)) = (lo_end, hi_end) {
            t_min = a.min(b);
            t_max = a.max(b);
        }
        Ok(Branch::Custom {
            spec: spec.clone(),
            c,
            zlo,
            zhi,
            increasing,
            y0,
            t_min,
            t_max,
        })
    }

    fn always_valid(&self) -> bool {
        matches!(self, Branch::Identity { .. } | Branch::Exponential { .. })
    }

    fn u_is_valid(&self, u: f64) -> bool {
        match self {
            Branch::Identity { .. } | Branch::Exponential { .. } => true,
            Branch::ReciprocalInitial { y0 } => 1.0 - y0 * u > 0.0,
            Branch::ReciprocalConstant { c, side } => side * (c + u) > 0.0,
            Branch::PowerLaw {
                k, u_sign, base0, ..
            } => base0 + (1.0 - k) * u_sign * u > 0.0,
            Branch::Custom { c, t_min, t_max, .. } => {
                let t = c + u;
                t > *t_min && t < *t_max
            }
        }
    }

    /// Sign of dy/du = h(y) on the branch: +1 when y grows with u.
    fn increasing_in_u(&self) -> bool {
        match self {
            Branch::Identity { .. } => true,
            Branch::Exponential { amp } => *amp >= 0.0,
            Branch::ReciprocalInitial { y0 } => y0 * y0 >= 0.0,
            Branch::ReciprocalConstant { .. } => true,
            Branch::PowerLaw { sign, u_sign, .. } => sign * u_sign > 0.0,
            Branch::Custom { increasing, .. } => *increasing,
        }
    }

    fn y_of_u(&self, u: f64) -> Result<f64> {
        match self {
            Branch::Identity { c0 } => Ok(c0 + u),
            Branch::Exponential { amp } => Ok(amp * u.exp()),
            Branch::ReciprocalInitial { y0 } => {
                if u == 0.0 {
                    return Ok(*y0);
                }
                Ok(y0 / (1.0 - y0 * u))
            }
            Branch::ReciprocalConstant { c, .. } => Ok(-1.0 / (c + u)),
            Branch::PowerLaw {
                k,
                sign,
                u_sign,
                base0,
                y0,
            } => {
                if u == 0.0 {
                    if let Some(y0) = y0 {
                        return Ok(*y0);
                    }
                }
                let base = base0 + (1.0 - k) * u_sign * u;
                Ok(sign * base.powf(1.0 / (1.0 - k)))
            }
            Branch::Custom {
                spec,
                c,
                zlo,
                zhi,
                increasing,
                y0,
                ..
            } => {
                if u == 0.0 {
                    if let Some(y0) = y0 {
                        return Ok(*y0);
                    }
                }
                let t = c + u;
                if let Some(inv) = &spec.inverse {
                    let y = inv(t);
                    if !y.is_finite() {
                        return Err(Error::BracketFailure(t));
                    }
                    return Ok(y);
                }
                invert_monotone(
                    &spec.antiderivative,
                    t,
                    y0.expect("constant anchor requires an inverse handle"),
                    *zlo,
                    *zhi,
                    *increasing,
                )
            }
        }
    }
}

/// Solve H(y) = t for y inside (zlo, zhi), H monotone there. The bracket is
/// grown from the seed by doubling (geometric approach when the boundary is
/// finite), then bisected to 1e-12 on y.
fn invert_monotone(
    antiderivative: &ScalarFn,
    t: f64,
    seed: f64,
    zlo: f64,
    zhi: f64,
    increasing: bool,
) -> Result<f64> {
    let eval = |y: f64| -> f64 {
        let v = antiderivative(y);
        if increasing {
            v
        } else {
            -v
        }
    };
    let target = if increasing { t } else { -t };

    let next_up = |y: f64, step: f64| -> f64 {
        if zhi.is_finite() {
            y + (zhi - y) * 0.5
        } else {
            y + step
        }
    };
    let next_down = |y: f64, step: f64| -> f64 {
        if zlo.is_finite() {
            y - (y - zlo) * 0.5
        } else {
            y - step
        }
    };

    let mut lo = seed;
    let mut hi = seed;
    let mut flo = eval(lo);
    let mut fhi = flo;
    let mut step = 1e-8 * (1.0 + seed.abs());
    let mut bracketed = false;
    for _ in 0..240 {
        // treat non-finite H near the ends of the branch as beyond the target
        let lo_covers = !flo.is_finite() || flo <= target;
        let hi_covers = !fhi.is_finite() || fhi >= target;
        if lo_covers && hi_covers && (lo < hi || flo <= target && target <= fhi) {
            bracketed = true;
            break;
        }
        if !hi_covers {
            let n = next_up(hi, step);
            if n == hi {
                break;
            }
            hi = n;
            fhi = eval(hi);
        } else {
            let n = next_down(lo, step);
            if n == lo {
                break;
            }
            lo = n;
            flo = eval(lo);
        }
        step *= 2.0;
    }
    if !bracketed {
        return Err(Error::BracketFailure(t));
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = eval(mid);
        // non-finite values occur toward the upper branch end where H blows up
        if !fm.is_finite() || fm >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One evaluated solution point with the quadrature bracket pushed through
/// H⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluatedPoint {
    pub y: f64,
    pub lower: f64,
    pub upper: f64,
}

/// The solved separable equation: u, the inverted branch, validity interval
/// and blow-up diagnostics. Immutable; evaluations are pure.
pub struct SolutionEvaluator {
    hull: Interval,
    u: UFunction,
    branch: Branch,
    depth: u32,
    equilibrium: Option<f64>,
    validity: (f64, f64),
    blowup: Option<f64>,
}

impl SolutionEvaluator {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// The constant equilibrium value when h(y0) = 0 anchored there.
    pub fn equilibrium(&self) -> Option<f64> {
        self.equilibrium
    }

    /// Maximal interval around the anchor on which the branch is not exited.
    pub fn validity(&self) -> (f64, f64) {
        self.validity
    }

    /// Abscissa at which the solution leaves its branch going forward, if it
    /// does within the ambient interval.
    pub fn blowup(&self) -> Option<f64> {
        self.blowup
    }

    /// u(x) = ∫ from the anchor abscissa.
    pub fn u(&self, x: f64) -> Result<f64> {
        self.u.value(x)
    }

    pub fn u_bracket(&self, x: f64) -> Result<(f64, f64, f64)> {
        self.u.bracket(x)
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.evaluate(x)?.y)
    }

    /// y(x) with the u-bracket propagated through the monotone branch; ends
    /// of the bracket that leave the branch map to ±∞.
    pub fn evaluate(&self, x: f64) -> Result<EvaluatedPoint> {
        if !self.hull.contains(x) {
            return Err(Error::OutsideAmbient {
                x,
                lo: self.hull.lo,
                hi: self.hull.hi,
            });
        }
        if let Some(y0) = self.equilibrium {
            return Ok(EvaluatedPoint {
                y: y0,
                lower: y0,
                upper: y0,
            });
        }
        let (u, ulo, uhi) = self.u.bracket(x)?;
        if !self.branch.u_is_valid(u) {
            let boundary = if x >= self.validity.1 {
                self.validity.1
            } else {
                self.validity.0
            };
            return Err(Error::OutsideValidity { x, boundary });
        }
        let y = self.branch.y_of_u(u)?;
        let increasing = self.branch.increasing_in_u();
        let end = |ue: f64, upper_side: bool| -> Result<f64> {
            if self.branch.u_is_valid(ue) {
                self.branch.y_of_u(ue)
            } else if upper_side == increasing {
                Ok(f64::INFINITY)
            } else {
                Ok(f64::NEG_INFINITY)
            }
        };
        let y_at_ulo = end(ulo, false)?;
        let y_at_uhi = end(uhi, true)?;
        Ok(EvaluatedPoint {
            y,
            lower: y_at_ulo.min(y_at_uhi),
            upper: y_at_ulo.max(y_at_uhi),
        })
    }
}

fn bisect_edge<F: Fn(f64) -> Result<bool>>(valid_at: &F, mut good: f64, mut bad: f64) -> Result<f64> {
    for _ in 0..100 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if valid_at(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
        if (bad - good).abs() <= 1e-13 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (good + bad))
}

/// Scan resolution for validity detection; transitions are then sharpened by
/// bisection. For one-signed ḡ the predicate flips at most twice and the
/// edges are exact to ~1e-13; for sign-changing ḡ the scan is a (documented)
/// approximation at this resolution.
const VALIDITY_SCAN_POINTS: u32 = 512;

fn scan_validity(
    u: &UFunction,
    branch: &Branch,
    hull: Interval,
    x_start: f64,
) -> Result<((f64, f64), Option<f64>)> {
    if branch.always_valid() {
        return Ok(((hull.lo, hull.hi), None));
    }
    let valid_at = |x: f64| -> Result<bool> { Ok(branch.u_is_valid(u.value(x)?)) };

    // forward sweep: find the entry edge (when invalid at the anchor) and
    // the exit edge
    let n = VALIDITY_SCAN_POINTS;
    let mut entered = valid_at(x_start)?;
    let mut v_lo = if entered { hull.lo } else { hull.hi };
    let mut v_hi = hull.hi;
    let mut blowup = None;
    let mut prev = x_start;
    let mut prev_ok = entered;
    for i in 1..=n {
        let x = x_start + (hull.hi - x_start) * i as f64 / n as f64;
        let ok = valid_at(x)?;
        if !entered && ok {
            v_lo = bisect_edge(&valid_at, x, prev)?;
            entered = true;
        } else if entered && prev_ok && !ok {
            let edge = bisect_edge(&valid_at, prev, x)?;
            v_hi = edge;
            blowup = Some(edge);
            break;
        }
        prev = x;
        prev_ok = ok;
        if x == hull.hi {
            break;
        }
    }

    // backward sweep from the anchor when it starts valid
    if valid_at(x_start)? && x_start > hull.lo {
        let mut prev = x_start;
        let mut prev_ok = true;
        for i in 1..=n {
            let x = x_start + (hull.lo - x_start) * i as f64 / n as f64;
            let ok = valid_at(x)?;
            if prev_ok && !ok {
                v_lo = bisect_edge(&valid_at, prev, x)?;
                break;
            }
            prev = x;
            prev_ok = ok;
        }
        if prev_ok && v_lo == hull.hi {
            v_lo = hull.lo;
        }
    }

    Ok(((v_lo, v_hi), blowup))
}

/// Solve the separable problem at the given quadrature depth.
pub fn solve(problem: SeparableProblem, depth: u32) -> Result<SolutionEvaluator> {
    let hull = problem.term().set().ambient();
    let u = u_function_for(&problem, depth)?;
    if problem.is_equilibrium() {
        let y0 = problem.anchor_y0().expect("equilibrium implies initial anchor");
        return Ok(SolutionEvaluator {
            hull,
            u,
            branch: Branch::Identity { c0: y0 },
            depth,
            equilibrium: Some(y0),
            validity: (hull.lo, hull.hi),
            blowup: None,
        });
    }
    let branch = Branch::resolve(&problem)?;
    let x_start = problem.anchor_x_ref();
    let (validity, blowup) = scan_validity(&u, &branch, hull, x_start)?;
    Ok(SolutionEvaluator {
        hull,
        u,
        branch,
        depth,
        equilibrium: None,
        validity,
        blowup,
    })
}

/// Solve dy/dx^q = Σ_j ḡ_j·1_{C_j} (y-independent right-hand side):
/// y = y0 + Σ_j u_j(x). All sets must share one dimension.
pub fn solve_sum_rhs(terms: Vec<FractalTerm>, x0: f64, y0: f64, depth: u32) -> Result<SolutionEvaluator> {
    if terms.is_empty() {
        return Err(Error::NoTerms);
    }
    let q0 = terms[0].dimension();
    for t in &terms[1..] {
        if (t.dimension() - q0).abs() > 1e-12 {
            return Err(Error::DimensionMismatch(q0, t.dimension()));
        }
    }
    let lo = terms.iter().map(|t| t.set().ambient().lo).fold(f64::INFINITY, f64::min);
    let hi = terms.iter().map(|t| t.set().ambient().hi).fold(f64::NEG_INFINITY, f64::max);
    let hull = Interval::new(lo, hi)?;
    if !hull.contains(x0) {
        return Err(Error::OutsideAmbient { x: x0, lo, hi });
    }
    if !y0.is_finite() {
        return Err(Error::NonFiniteSample(y0));
    }
    let parts = terms
        .iter()
        .map(|t| UFunction::for_term(t, x0, depth))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionEvaluator {
        hull,
        u: UFunction::Sum(parts),
        branch: Branch::Identity { c0: y0 },
        depth,
        equilibrium: None,
        validity: (hull.lo, hull.hi),
        blowup: None,
    })
}

// ---------------------------------------------------------------------------
// Problem files

/// h as it appears in problem files: {"kind": "...", "k": ...}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

/// Problem file: {set, gbar, h, x0, y0, depth}, with ḡ as a named
/// expression.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDoc {
    pub set: crate::sets::SelfSimilarSet,
    pub gbar: String,
    pub h: HDoc,
    pub x0: f64,
    pub y0: f64,
    pub depth: u32,
}

impl ProblemDoc {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::from)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn h_spec(&self) -> Result<HSpec> {
        match self.h.kind.as_str() {
            "constant_one" => Ok(HSpec::ConstantOne),
            "linear" => Ok(HSpec::Linear),
            "quadratic" => Ok(HSpec::Quadratic),
            "power" => match self.h.k {
                Some(k) => Ok(HSpec::Power { k }),
                None => Err(Error::MissingPowerExponent),
            },
            other => Err(Error::UnknownHKind(other.to_string())),
        }
    }

    /// Build the problem and return it with the file's quadrature depth.
    pub fn to_problem(&self) -> Result<(SeparableProblem, u32)> {
        let expr = GbarExpr::parse(&self.gbar)?;
        let term = FractalTerm::new(self.set.clone(), expr)?;
        let problem = SeparableProblem::new(term, self.h_spec()?, self.x0, self.y0)?;
        Ok((problem, self.depth))
    }
}

//! Self-similar Cantor-type subsets of a real interval.
//!
//! A set is generated by m ≥ 2 affine contractions with one common ratio r
//! acting on an ambient interval, images pairwise interior-disjoint (open
//! set condition). The similarity dimension q = ln m / ln(1/r) is exact
//! under those restrictions and must stay below 1 here. Cover intervals are
//! addressed by digit strings; endpoints are recomputed from the address by
//! folding the maps, never by accumulating float increments.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Enumeration ceiling: m^depth intervals is only practical this far, and
/// point location never needs enumeration.
pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// Closed interval [lo, hi] on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Affine contraction t ↦ ratio·t + offset with ratio ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionMap {
    ratio: f64,
    offset: f64,
}

impl ContractionMap {
    pub fn new(ratio: f64, offset: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidRatio(ratio));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidInterval {
                lo: offset,
                hi: offset,
            });
        }
        Ok(Self { ratio, offset })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn apply(&self, t: f64) -> f64 {
        self.ratio * t + self.offset
    }
}

/// A self-similar Cantor-type set: ambient interval, m equal-ratio
/// contractions sorted by offset, similarity dimension q ∈ (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarSet {
    ambient: Interval,
    maps: Vec<ContractionMap>,
    dimension: f64,
    max_depth: u32,
}

impl SelfSimilarSet {
    pub fn new(ambient: Interval, mut maps: Vec<ContractionMap>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::TooFewMaps(maps.len()));
        }
        if maps.len() > 36 {
            return Err(Error::TooManyMaps(maps.len()));
        }
        let r = maps[0].ratio;
        if let Some(bad) = maps.iter().find(|m| m.ratio != r) {
            return Err(Error::UnequalRatios(r, bad.ratio));
        }

        maps.sort_by(|a, b| a.offset.total_cmp(&b.offset));

        // Images must sit inside the ambient interval and be pairwise
        // interior-disjoint (touching endpoints are fine).
        let slack = 1e-12 * ambient.width();
        let images: Vec<(f64, f64)> = maps
            .iter()
            .map(|m| (m.apply(ambient.lo), m.apply(ambient.hi)))
            .collect();
        for &(lo, hi) in &images {
            if lo < ambient.lo - slack || hi > ambient.hi + slack {
                return Err(Error::MapEscapesAmbient {
                    lo,
                    hi,
                    a: ambient.lo,
                    b: ambient.hi,
                });
            }
        }
        for i in 1..images.len() {
            if images[i].0 < images[i - 1].1 - slack {
                return Err(Error::OverlappingChildren { i: i - 1, j: i });
            }
        }

        let m = maps.len() as f64;
        if m * r >= 1.0 {
            return Err(Error::DimensionNotFractal(m * r));
        }
        let dimension = m.ln() / (1.0 / r).ln();

        Ok(Self {
            ambient,
            maps,
            dimension,
            max_depth: DEFAULT_MAX_DEPTH,
        })
    }

    /// Middle-1/p Cantor set: delete the open middle fraction 1/p of each
    /// interval, keeping two children of ratio r = (1 − 1/p)/2.
    pub fn middle_p(p: f64, ambient: Interval) -> Result<Self> {
        if !(p.is_finite() && p > 2.0) {
            return Err(Error::InvalidMiddleFraction(p));
        }
        let r = (p - 1.0) / (2.0 * p);
        let (a, b) = (ambient.lo, ambient.hi);
        // Offsets chosen so the fixed points are exactly a and b:
        // r·a + (a − r·a) = a and r·b + (b − r·b) = b.
        let left = ContractionMap::new(r, a - r * a)?;
        let right = ContractionMap::new(r, b - r * b)?;
        Self::new(ambient, vec![left, right])
    }

    pub fn ambient(&self) -> Interval {
        self.ambient
    }

    pub fn maps(&self) -> &[ContractionMap] {
        &self.maps
    }

    /// Number of contractions m.
    pub fn arity(&self) -> usize {
        self.maps.len()
    }

    /// Common contraction ratio r.
    pub fn ratio(&self) -> f64 {
        self.maps[0].ratio
    }

    /// Similarity dimension q = ln m / ln(1/r).
    pub fn dimension(&self) -> f64 {
        self.dimension
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn with_max_depth(mut self, max_depth: u32) -> Self {
        self.max_depth = max_depth;
        self
    }

    /// Points this close to a cover-interval endpoint count as set members;
    /// a gap verdict requires the strict interior. Left and right endpoints
    /// of cover intervals are genuine set points and round-off must not
    /// eject them.
    pub fn boundary_tolerance(&self) -> f64 {
        1e-15 * self.ambient.width()
    }

    /// Containment tolerance at descent level k: the boundary tolerance plus
    /// an allowance for the rounding the map fold accumulates, ~2ε·M per
    /// level with M the coordinate magnitude. Without it, points sitting on
    /// cover endpoints would drift out of their digit chain around level 30.
    pub(crate) fn drift_tolerance(&self, level: u32) -> f64 {
        let m = self
            .ambient
            .lo
            .abs()
            .max(self.ambient.hi.abs())
            .max(self.ambient.width());
        self.boundary_tolerance() + 4.0 * (level as f64 + 2.0) * f64::EPSILON * m
    }

    pub(crate) fn check_depth(&self, depth: u32) -> Result<()> {
        if depth > self.max_depth {
            return Err(Error::DepthExceedsMax {
                depth,
                max: self.max_depth,
            });
        }
        Ok(())
    }

    /// Visit the m^depth cover intervals in ascending order as
    /// (lo, hi, address digits). Endpoint pairs come from folding the map
    /// composition onto the ambient endpoints.
    pub(crate) fn walk_cover<F: FnMut(f64, f64, &[u8])>(&self, depth: u32, f: &mut F) {
        let mut digits = Vec::with_capacity(depth as usize);
        self.walk_rec(depth, 1.0, 0.0, &mut digits, f);
    }

    fn walk_rec<F: FnMut(f64, f64, &[u8])>(
        &self,
        remaining: u32,
        scale: f64,
        shift: f64,
        digits: &mut Vec<u8>,
        f: &mut F,
    ) {
        if remaining == 0 {
            f(
                scale * self.ambient.lo + shift,
                scale * self.ambient.hi + shift,
                digits,
            );
            return;
        }
        for (i, map) in self.maps.iter().enumerate() {
            digits.push(i as u8);
            self.walk_rec(
                remaining - 1,
                scale * map.ratio,
                scale * map.offset + shift,
                digits,
                f,
            );
            digits.pop();
        }
    }

    /// All m^depth images of the ambient interval under depth-fold map
    /// compositions, sorted by lo.
    pub fn refine(&self, depth: u32) -> Result<SetCover> {
        self.check_depth(depth)?;
        let count = (self.arity() as u64)
            .checked_pow(depth)
            .unwrap_or(u64::MAX)
            .min(1 << 26) as usize;
        let mut intervals = Vec::with_capacity(count);
        self.walk_cover(depth, &mut |lo, hi, digits| {
            intervals.push(CoverInterval {
                lo,
                hi,
                address: digits_to_string(digits),
            });
        });
        Ok(SetCover {
            set: self.clone(),
            depth,
            intervals,
        })
    }

    /// One descent step: which child of the current composition holds x.
    /// A point within the tolerance of a child endpoint is snapped to that
    /// endpoint — its remaining digit chain is then a constant run and needs
    /// no further drifting fold arithmetic. Otherwise the point either sits
    /// strictly inside one child or in the uncovered interval around it.
    pub(crate) fn descend_step(&self, scale: f64, shift: f64, x: f64, tol: f64) -> DescendStep {
        let mut left_children = 0usize;
        for (i, map) in self.maps.iter().enumerate() {
            let lo = scale * map.apply(self.ambient.lo) + shift;
            let hi = scale * map.apply(self.ambient.hi) + shift;
            if hi < x {
                left_children = i + 1;
            }
            let d_lo = (x - lo).abs();
            let d_hi = (x - hi).abs();
            if d_lo <= tol || d_hi <= tol {
                return if d_lo <= d_hi {
                    DescendStep::LeftEndpoint { index: i }
                } else {
                    DescendStep::RightEndpoint { index: i }
                };
            }
            if x > lo && x < hi {
                return DescendStep::Child { index: i };
            }
        }
        let gap_lo = if left_children == 0 {
            scale * self.ambient.lo + shift
        } else {
            let m = &self.maps[left_children - 1];
            scale * m.apply(self.ambient.hi) + shift
        };
        let gap_hi = if left_children == self.maps.len() {
            scale * self.ambient.hi + shift
        } else {
            let m = &self.maps[left_children];
            scale * m.apply(self.ambient.lo) + shift
        };
        DescendStep::Gap {
            left_children,
            lo: gap_lo,
            hi: gap_hi,
        }
    }

    /// Digit address of the depth-n cover interval containing x, or a report
    /// of the first generation at which x falls in a removed gap.
    pub fn locate(&self, x: f64, depth: u32) -> Result<Location> {
        if !self.ambient.contains(x) {
            return Err(Error::OutsideAmbient {
                x,
                lo: self.ambient.lo,
                hi: self.ambient.hi,
            });
        }
        let mut scale = 1.0;
        let mut shift = 0.0;
        let mut digits: Vec<u8> = Vec::with_capacity(depth as usize);
        let push = |digits: &mut Vec<u8>, scale: &mut f64, shift: &mut f64, index: usize| {
            let map = &self.maps[index];
            *shift += *scale * map.offset;
            *scale *= map.ratio;
            digits.push(index as u8);
        };
        while (digits.len() as u32) < depth {
            let generation = digits.len() as u32;
            match self.descend_step(scale, shift, x, self.drift_tolerance(generation)) {
                DescendStep::Child { index } => {
                    push(&mut digits, &mut scale, &mut shift, index);
                }
                DescendStep::LeftEndpoint { index } => {
                    push(&mut digits, &mut scale, &mut shift, index);
                    while (digits.len() as u32) < depth {
                        push(&mut digits, &mut scale, &mut shift, 0);
                    }
                }
                DescendStep::RightEndpoint { index } => {
                    push(&mut digits, &mut scale, &mut shift, index);
                    let last = self.maps.len() - 1;
                    while (digits.len() as u32) < depth {
                        push(&mut digits, &mut scale, &mut shift, last);
                    }
                }
                DescendStep::Gap { lo, hi, .. } => {
                    return Ok(Location::Gap(GapReport {
                        generation: generation + 1,
                        lo,
                        hi,
                    }));
                }
            }
        }
        Ok(Location::Inside(CoverInterval {
            lo: scale * self.ambient.lo + shift,
            hi: scale * self.ambient.hi + shift,
            address: digits_to_string(&digits),
        }))
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(doc: &str) -> Result<Self> {
        serde_json::from_str(doc).map_err(Error::from)
    }
}

fn digits_to_string(digits: &[u8]) -> String {
    digits
        .iter()
        .map(|&d| char::from_digit(d as u32, 36).expect("digit below 36"))
        .collect()
}

pub(crate) enum DescendStep {
    /// x strictly inside child `index`: keep descending by the fold.
    Child { index: usize },
    /// x is (up to tolerance) the left endpoint of child `index`: the rest
    /// of its address is a run of 0-digits.
    LeftEndpoint { index: usize },
    /// x is (up to tolerance) the right endpoint of child `index`: the rest
    /// of its address is a run of (m−1)-digits.
    RightEndpoint { index: usize },
    Gap { left_children: usize, lo: f64, hi: f64 },
}

/// One depth-n cover interval with its digit address.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverInterval {
    pub lo: f64,
    pub hi: f64,
    pub address: String,
}

/// The full depth-n cover: m^depth sorted, interior-disjoint intervals.
#[derive(Debug, Clone)]
pub struct SetCover {
    set: SelfSimilarSet,
    depth: u32,
    intervals: Vec<CoverInterval>,
}

impl SetCover {
    pub fn set(&self) -> &SelfSimilarSet {
        &self.set
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn intervals(&self) -> &[CoverInterval] {
        &self.intervals
    }
}

/// x fell into a removed gap: the first generation at which that happened
/// and the gap's endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub generation: u32,
    pub lo: f64,
    pub hi: f64,
}

/// Outcome of point location at a given depth.
#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Inside(CoverInterval),
    Gap(GapReport),
}

// Serialized form: {ambient: [a, b], maps: [{ratio, offset}, ...], dimension}.
// Deserialization funnels through `SelfSimilarSet::new` so every invariant is
// re-checked, and the stored dimension must match the recomputed one.
impl Serialize for SelfSimilarSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            ambient: [f64; 2],
            maps: &'a [ContractionMap],
            dimension: f64,
        }
        Doc {
            ambient: [self.ambient.lo, self.ambient.hi],
            maps: &self.maps,
            dimension: self.dimension,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SelfSimilarSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct RawMap {
            ratio: f64,
            offset: f64,
        }
        #[derive(Deserialize)]
        struct Doc {
            ambient: [f64; 2],
            maps: Vec<RawMap>,
            dimension: f64,
        }
        let doc = Doc::deserialize(deserializer)?;
        let ambient = Interval::new(doc.ambient[0], doc.ambient[1]).map_err(serde::de::Error::custom)?;
        let maps = doc
            .maps
            .into_iter()
            .map(|m| ContractionMap::new(m.ratio, m.offset))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let set = SelfSimilarSet::new(ambient, maps).map_err(serde::de::Error::custom)?;
        if (doc.dimension - set.dimension).abs() > 1e-14 * set.dimension {
            return Err(serde::de::Error::custom(format!(
                "stored dimension {} disagrees with ln(m)/ln(1/r) = {}",
                doc.dimension, set.dimension
            )));
        }
        Ok(set)
    }
}

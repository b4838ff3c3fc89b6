//! Closed intervals and boxes with outward-rounded arithmetic.
//!
//! Every operation returns an interval containing the exact image of its
//! operands. Add, subtract, multiply and divide are rounded with exact
//! directed rounding (see [`round`]); `sin`/`cos` come from the platform
//! libm and are widened by two ulps on each side.
//!
//! Emptiness is never encoded as a crossed interval: operations that can
//! produce the empty set return [`Range`].

pub(crate) mod round;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("division by an interval containing zero: {0}")]
    DivisionByZeroInterval(Interval),
    #[error("box index {index} out of range for a box of dimension {dims}")]
    DimensionOutOfRange { index: usize, dims: usize },
}

/// A closed interval `[lo, hi]` with `lo <= hi`.
///
/// Bounds may become infinite on overflow; they are never NaN.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::InvalidBounds { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN point interval");
        Interval { lo: x, hi: x }
    }

    /// Internal constructor for bounds that are ordered by construction.
    pub(crate) fn from_ordered(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "crossed interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> f64 {
        round::sub_up(self.hi, self.lo)
    }

    /// Enclosure of `hi - lo`.
    pub fn width_enclosure(&self) -> Interval {
        Interval::from_ordered(round::sub_down(self.hi, self.lo), round::sub_up(self.hi, self.lo))
    }

    /// Nearest midpoint (not an enclosure).
    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::from_ordered(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn intersect(&self, other: &Interval) -> Range {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            Range::Empty
        } else {
            Range::Bounded(Interval::from_ordered(lo, hi))
        }
    }

    /// Mignitude: the smallest `|x|` over the interval.
    pub fn mig(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Magnitude: the largest `|x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// `[mig, mag]`, the exact range of `|x|`.
    pub fn abs_bounds(&self) -> Interval {
        Interval::from_ordered(self.mig(), self.mag())
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZeroInterval(rhs));
        }
        let c = [(self.lo, rhs.lo), (self.lo, rhs.hi), (self.hi, rhs.lo), (self.hi, rhs.hi)];
        let lo = c.iter().map(|&(a, b)| round::div_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| round::div_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval::from_ordered(lo, hi))
    }

    /// Multiplication by a scalar, rounded outward.
    pub fn scale(self, k: f64) -> Interval {
        self * Interval::point(k)
    }

    /// Integer power with even-power tightening.
    pub fn powi(self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => self,
            _ => {
                let even = n % 2 == 0;
                if self.lo >= 0.0 {
                    Interval::from_ordered(pow_down(self.lo, n), pow_up(self.hi, n))
                } else if self.hi <= 0.0 {
                    let (a, b) = (-self.hi, -self.lo);
                    if even {
                        Interval::from_ordered(pow_down(a, n), pow_up(b, n))
                    } else {
                        Interval::from_ordered(-pow_up(b, n), -pow_down(a, n))
                    }
                } else if even {
                    Interval::from_ordered(0.0, pow_up(-self.lo, n).max(pow_up(self.hi, n)))
                } else {
                    Interval::from_ordered(-pow_up(-self.lo, n), pow_up(self.hi, n))
                }
            }
        }
    }

    pub fn sin(self) -> Interval {
        trig_range(self, f64::sin, FRAC_PI_2, -FRAC_PI_2)
    }

    pub fn cos(self) -> Interval {
        trig_range(self, f64::cos, 0.0, PI)
    }
}

/// `x^n` rounded down, for `x >= 0`.
fn pow_down(x: f64, n: u32) -> f64 {
    pow_directed(x, n, round::mul_down)
}

/// `x^n` rounded up, for `x >= 0`.
fn pow_up(x: f64, n: u32) -> f64 {
    pow_directed(x, n, round::mul_up)
}

/// Square-and-multiply; every factor is non-negative so rounding each
/// product in one direction rounds the whole power in that direction.
fn pow_directed(x: f64, mut n: u32, mul: fn(f64, f64) -> f64) -> f64 {
    let mut base = x;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc = mul(acc, base);
        }
        n >>= 1;
        if n > 0 {
            base = mul(base, base);
        }
    }
    acc
}

/// Range of a 2π-periodic function whose maxima sit at `max_phase + 2kπ`
/// and minima at `min_phase + 2kπ`, monotone in between.
fn trig_range(x: Interval, f: fn(f64) -> f64, max_phase: f64, min_phase: f64) -> Interval {
    let (a, b) = (x.lo, x.hi);
    if !a.is_finite() || !b.is_finite() || b - a >= TAU || a.abs().max(b.abs()) > 1e8 {
        return Interval::UNIT;
    }
    // libm is exact at zero (sin 0 = 0, cos 0 = 1); elsewhere allow two ulps
    let eval = |x: f64| {
        let y = f(x);
        if x == 0.0 {
            (y, y)
        } else {
            (round::widen_down(y, 2), round::widen_up(y, 2))
        }
    };
    let ((fa_lo, fa_hi), (fb_lo, fb_hi)) = (eval(a), eval(b));
    let mut lo = fa_lo.min(fb_lo);
    let mut hi = fa_hi.max(fb_hi);
    if hits_phase(a, b, max_phase) {
        hi = 1.0;
    }
    if hits_phase(a, b, min_phase) {
        lo = -1.0;
    }
    Interval::from_ordered(lo.max(-1.0), hi.min(1.0))
}

/// Whether some `phase + 2kπ` lies in `[a, b]`, erring on the side of yes.
fn hits_phase(a: f64, b: f64, phase: f64) -> bool {
    let margin = 1e-9 * (1.0 + a.abs().max(b.abs()));
    let k = ((a - margin - phase) / TAU).ceil();
    let point = phase + k * TAU;
    point <= b + margin
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.16e}, {:.16e}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::from_ordered(round::add_down(self.lo, rhs.lo), round::add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::from_ordered(round::sub_down(self.lo, rhs.hi), round::sub_up(self.hi, rhs.lo))
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [(self.lo, rhs.lo), (self.lo, rhs.hi), (self.hi, rhs.lo), (self.hi, rhs.hi)];
        let lo = c.iter().map(|&(a, b)| round::mul_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| round::mul_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Interval::from_ordered(lo, hi)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::from_ordered(-self.hi, -self.lo)
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |acc, x| acc + x)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(d)?;
        Interval::new(lo, hi).map_err(D::Error::custom)
    }
}

/// An interval or the empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Range {
    Empty,
    Bounded(Interval),
}

impl Range {
    pub fn is_empty(&self) -> bool {
        matches!(self, Range::Empty)
    }

    pub fn interval(&self) -> Option<Interval> {
        match self {
            Range::Empty => None,
            Range::Bounded(iv) => Some(*iv),
        }
    }

    /// Builds a range from possibly crossed bounds; crossed means empty.
    pub fn from_bounds(lo: f64, hi: f64) -> Range {
        if lo <= hi {
            Range::Bounded(Interval::from_ordered(lo, hi))
        } else {
            Range::Empty
        }
    }

    /// Width, with the empty set having width zero.
    pub fn width(&self) -> f64 {
        self.interval().map_or(0.0, |iv| iv.width())
    }

    pub fn hull(&self, other: &Range) -> Range {
        match (self, other) {
            (Range::Empty, r) | (r, Range::Empty) => *r,
            (Range::Bounded(a), Range::Bounded(b)) => Range::Bounded(a.hull(b)),
        }
    }

    pub fn intersect(&self, other: &Range) -> Range {
        match (self, other) {
            (Range::Bounded(a), Range::Bounded(b)) => a.intersect(b),
            _ => Range::Empty,
        }
    }

    /// Set inclusion; the empty set is a subset of everything.
    pub fn is_subset_of(&self, other: &Range) -> bool {
        match (self, other) {
            (Range::Empty, _) => true,
            (Range::Bounded(_), Range::Empty) => false,
            (Range::Bounded(a), Range::Bounded(b)) => a.is_subset_of(b),
        }
    }
}

impl From<Interval> for Range {
    fn from(iv: Interval) -> Self {
        Range::Bounded(iv)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Range::Empty => write!(f, "empty"),
            Range::Bounded(iv) => write!(f, "{iv}"),
        }
    }
}

impl Serialize for Range {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.interval().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Range {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match Option::<Interval>::deserialize(d)? {
            None => Range::Empty,
            Some(iv) => Range::Bounded(iv),
        })
    }
}

/// A Cartesian product of intervals with a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalBox(Vec<Interval>);

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> Self {
        IntervalBox(dims)
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, index: usize) -> Result<&Interval, IntervalError> {
        self.0
            .get(index)
            .ok_or(IntervalError::DimensionOutOfRange { index, dims: self.0.len() })
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval> {
        self.0.iter()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.0.len() && self.0.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    pub fn is_subset_of(&self, other: &IntervalBox) -> bool {
        self.dims() == other.dims() && self.0.iter().zip(&other.0).all(|(a, b)| a.is_subset_of(b))
    }
}

impl fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|iv| iv.to_string()).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

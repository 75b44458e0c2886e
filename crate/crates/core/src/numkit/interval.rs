use std::fmt;

use super::{Scalar, ToleranceContext};

/// Closed interval `[lo, hi]` with `lo <= hi`, or the empty set.
#[derive(Debug, Clone, PartialEq)]
pub enum Interval<S> {
    Empty,
    Closed { lo: S, hi: S },
}

impl<S: Scalar> Interval<S> {
    /// `[lo, hi]`, or `Empty` when `lo > hi`.
    pub fn new(lo: S, hi: S) -> Self {
        if lo <= hi {
            Interval::Closed { lo, hi }
        } else {
            Interval::Empty
        }
    }

    pub fn point(v: S) -> Self {
        Interval::Closed { lo: v.clone(), hi: v }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Interval::Empty)
    }

    pub fn lo(&self) -> Option<&S> {
        match self {
            Interval::Closed { lo, .. } => Some(lo),
            Interval::Empty => None,
        }
    }

    pub fn hi(&self) -> Option<&S> {
        match self {
            Interval::Closed { hi, .. } => Some(hi),
            Interval::Empty => None,
        }
    }

    pub fn contains(&self, t: &S) -> bool {
        match self {
            Interval::Closed { lo, hi } => lo <= t && t <= hi,
            Interval::Empty => false,
        }
    }

    pub fn width(&self) -> Option<S> {
        match self {
            Interval::Closed { lo, hi } => Some(hi.clone() - lo.clone()),
            Interval::Empty => None,
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        match (self, other) {
            (Interval::Closed { lo: a, hi: b }, Interval::Closed { lo: c, hi: d }) => {
                Interval::new(S::max_of(a.clone(), c.clone()), S::min_of(b.clone(), d.clone()))
            }
            _ => Interval::Empty,
        }
    }

    /// `self ⊆ other` with each endpoint allowed to overshoot by `slack`
    /// relative to its magnitude (at least 1).
    pub fn is_subset_within(&self, other: &Self, slack: f64) -> bool {
        match (self, other) {
            (Interval::Empty, _) => true,
            (_, Interval::Empty) => false,
            (Interval::Closed { lo: a, hi: b }, Interval::Closed { lo: c, hi: d }) => {
                let tol = |x: &S| slack * x.to_f64().abs().max(1.0);
                a.to_f64() >= c.to_f64() - tol(c) && b.to_f64() <= d.to_f64() + tol(d)
            }
        }
    }

    pub fn approx_eq(&self, other: &Self, ctx: &ToleranceContext) -> bool {
        match (self, other) {
            (Interval::Empty, Interval::Empty) => true,
            (Interval::Closed { lo: a, hi: b }, Interval::Closed { lo: c, hi: d }) => {
                ctx.approx_eq(a, c) && ctx.approx_eq(b, d)
            }
            _ => false,
        }
    }
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Closed { lo, hi } => write!(f, "[{lo}, {hi}]"),
            Interval::Empty => write!(f, "∅"),
        }
    }
}

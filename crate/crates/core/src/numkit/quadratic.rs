use std::fmt;

use super::{Scalar, ToleranceContext};
use crate::error::{Error, Result};

/// A real root: either a representable value or a certified enclosure
/// `lo < root < hi` (the polynomial changes sign between the ends).
#[derive(Debug, Clone, PartialEq)]
pub enum Root<S> {
    Point(S),
    Bracket { lo: S, hi: S },
}

impl<S: Scalar> Root<S> {
    /// Best representable estimate: the point itself or the bracket midpoint.
    pub fn value(&self) -> S {
        match self {
            Root::Point(v) => v.clone(),
            Root::Bracket { lo, hi } => (lo.clone() + hi.clone()) * S::half(),
        }
    }

    pub fn lower(&self) -> S {
        match self {
            Root::Point(v) => v.clone(),
            Root::Bracket { lo, .. } => lo.clone(),
        }
    }

    pub fn upper(&self) -> S {
        match self {
            Root::Point(v) => v.clone(),
            Root::Bracket { hi, .. } => hi.clone(),
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Root::Point(_))
    }
}

impl<S: Scalar> fmt::Display for Root<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Root::Point(v) => write!(f, "{v}"),
            Root::Bracket { lo, hi } => {
                write!(f, "~{:.17e} in ({:.6e}, {:.6e})", self.value().to_f64(), lo.to_f64(), hi.to_f64())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticRoots<S> {
    /// Real roots in ascending order; a double root appears once.
    pub roots: Vec<Root<S>>,
    pub discriminant: S,
    /// Zero discriminant (exactly, or within the band in float mode).
    pub double: bool,
}

/// `a t^2 + b t + c` at `t`.
pub fn eval_quadratic<S: Scalar>(a: &S, b: &S, c: &S, t: &S) -> S {
    (a.clone() * t.clone() + b.clone()) * t.clone() + c.clone()
}

/// Real roots of `a t^2 + b t + c`.
///
/// Exact mode returns exact roots when the discriminant is a rational square
/// and otherwise brackets each root between rationals at which the
/// polynomial has opposite exact signs, refined to roughly 1e-30 relative
/// width.
pub fn solve_quadratic<S: Scalar>(a: &S, b: &S, c: &S, ctx: &ToleranceContext) -> Result<QuadraticRoots<S>> {
    if a.is_zero() {
        return Err(Error::DegenerateQuadratic);
    }
    let four = S::from_i64(4);
    let two_a = S::from_i64(2) * a.clone();
    let disc = b.clone() * b.clone() - four * a.clone() * c.clone();
    let scale = (b.to_f64().powi(2)).max((4.0 * a.to_f64() * c.to_f64()).abs());
    let sign = ctx.sign(&disc, scale);
    let double = sign == super::Sign::Zero;
    if sign == super::Sign::Negative {
        return Ok(QuadraticRoots { roots: vec![], discriminant: disc, double });
    }
    if double {
        let r = -b.clone() / two_a;
        return Ok(QuadraticRoots { roots: vec![Root::Point(r)], discriminant: disc, double });
    }
    if let Some(s) = disc.exact_sqrt() {
        // Stable in float mode: avoid cancellation in -b +/- s.
        let (r1, r2) = if S::EXACT {
            ((-b.clone() - s.clone()) / two_a.clone(), (-b.clone() + s) / two_a)
        } else {
            let q = if *b >= S::zero() { -(b.clone() + s) * S::half() } else { (s - b.clone()) * S::half() };
            (q.clone() / a.clone(), c.clone() / q)
        };
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        return Ok(QuadraticRoots { roots: vec![Root::Point(lo), Root::Point(hi)], discriminant: disc, double });
    }
    // Exact backend, irrational roots.
    let (af, bf, df) = (a.to_f64(), b.to_f64(), disc.to_f64().max(0.0).sqrt());
    let qf = if bf >= 0.0 { -0.5 * (bf + df) } else { 0.5 * (df - bf) };
    let mut approx = [qf / af, c.to_f64() / qf];
    approx.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let mut roots = Vec::with_capacity(2);
    for r in approx {
        roots.push(certify(a, b, c, r)?);
    }
    Ok(QuadraticRoots { roots, discriminant: disc, double })
}

/// Brackets the simple root near `approx` and refines by exact bisection.
fn certify<S: Scalar>(a: &S, b: &S, c: &S, approx: f64) -> Result<Root<S>> {
    let f = |t: &S| eval_quadratic(a, b, c, t);
    let centre = S::from_f64(approx).ok_or_else(|| Error::Consistency("non-finite root estimate".into()))?;
    let mag = approx.abs().max(1.0);
    let mut delta = 1e-12 * mag;
    for _ in 0..40 {
        let d = S::from_f64(delta).unwrap_or_else(S::one);
        let (mut lo, mut hi) = (centre.clone() - d.clone(), centre.clone() + d);
        let (flo, fhi) = (f(&lo), f(&hi));
        if flo.is_zero() {
            return Ok(Root::Point(lo));
        }
        if fhi.is_zero() {
            return Ok(Root::Point(hi));
        }
        if (flo > S::zero()) != (fhi > S::zero()) {
            let lo_positive = flo > S::zero();
            let target = S::from_f64(1e-30 * mag).unwrap_or_else(S::zero);
            while hi.clone() - lo.clone() > target {
                let mid = (lo.clone() + hi.clone()) * S::half();
                let fm = f(&mid);
                if fm.is_zero() {
                    return Ok(Root::Point(mid));
                }
                if (fm > S::zero()) == lo_positive {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Root::Bracket { lo, hi });
        }
        delta *= 8.0;
    }
    Err(Error::Consistency(format!("could not bracket quadratic root near {approx}")))
}

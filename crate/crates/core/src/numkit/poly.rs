use super::{Root, Scalar};

/// Univariate polynomial, coefficients in ascending degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> S {
        self.coeffs.last().cloned().unwrap_or_else(S::zero)
    }

    pub fn eval(&self, x: &S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| S::from_i64(i as i64) * c.clone())
                .collect(),
        )
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lead = self.leading();
        Self::new(self.coeffs.iter().map(|c| c.clone() / lead.clone()).collect())
    }

    /// Remainder of exact long division. Panics on a zero divisor.
    pub fn rem(&self, divisor: &Self) -> Self {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading();
        let mut r = self.coeffs.clone();
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let f = r[r.len() - 1].clone() / lead.clone();
            for (i, c) in divisor.coeffs.iter().enumerate() {
                let v = r[shift + i].clone() - f.clone() * c.clone();
                r[shift + i] = v;
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Self::new(r)
    }

    /// Monic greatest common divisor (Euclid).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Cauchy bound: every root has modulus below `1 + max |a_i / a_n|`.
    pub fn cauchy_bound(&self) -> S {
        let lead = self.leading().abs();
        let n = self.coeffs.len().saturating_sub(1);
        self.coeffs[..n]
            .iter()
            .map(|c| c.abs() / lead.clone())
            .fold(S::zero(), S::max_of)
            + S::one()
    }
}

/// Sturm sequence of a polynomial: counts distinct real roots in `(a, b]`.
#[derive(Debug, Clone)]
pub struct SturmChain<S> {
    chain: Vec<Poly<S>>,
}

impl<S: Scalar> SturmChain<S> {
    pub fn new(p: &Poly<S>) -> Self {
        let mut chain = vec![p.clone(), p.derivative()];
        while !chain[chain.len() - 1].is_zero() {
            let n = chain.len();
            let r = chain[n - 2].rem(&chain[n - 1]);
            chain.push(r.scale(&-S::one()));
        }
        chain.pop();
        Self { chain }
    }

    pub fn sign_changes(&self, x: &S) -> usize {
        let mut changes = 0;
        let mut last: Option<bool> = None;
        for p in &self.chain {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let positive = v > S::zero();
            if last.is_some_and(|l| l != positive) {
                changes += 1;
            }
            last = Some(positive);
        }
        changes
    }

    /// Distinct real roots in `(a, b]`.
    pub fn count(&self, a: &S, b: &S) -> usize {
        self.sign_changes(a).saturating_sub(self.sign_changes(b))
    }
}

/// Isolates and refines the distinct real roots of `p` in `(lo, hi]`.
///
/// Every root is either found exactly (a rational candidate drawn from the
/// continued-fraction expansion of its float estimate that evaluates to
/// exactly zero) or returned as a bracket containing exactly one root, of
/// relative width at most `rel_width`. Meant for the exact backend.
pub fn real_roots_in<S: Scalar>(p: &Poly<S>, lo: &S, hi: &S, rel_width: f64) -> Vec<Root<S>> {
    let sturm = SturmChain::new(p);
    let mut isolated = Vec::new();
    let mut stack = vec![(lo.clone(), hi.clone())];
    while let Some((a, b)) = stack.pop() {
        let c = sturm.count(&a, &b);
        if c == 0 {
            continue;
        }
        if c == 1 {
            isolated.push((a, b));
            continue;
        }
        let mid = split_point(p, &a, &b);
        stack.push((a, mid.clone()));
        stack.push((mid, b));
    }
    isolated.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    isolated.into_iter().map(|(a, b)| refine(p, &sturm, a, b, rel_width)).collect()
}

/// A point strictly inside `(a, b)` where `p` does not vanish.
fn split_point<S: Scalar>(p: &Poly<S>, a: &S, b: &S) -> S {
    let width = b.clone() - a.clone();
    for (num, den) in [(1, 2), (1, 3), (2, 3), (1, 5), (4, 5), (3, 7)] {
        let m = a.clone() + width.clone() * S::from_ratio(num, den);
        if !p.eval(&m).is_zero() {
            return m;
        }
    }
    a.clone() + width * S::from_ratio(5, 11)
}

fn refine<S: Scalar>(p: &Poly<S>, sturm: &SturmChain<S>, mut a: S, mut b: S, rel_width: f64) -> Root<S> {
    if p.eval(&b).is_zero() {
        return Root::Point(b);
    }
    // Shrink to float resolution, then look for an exact rational root.
    let mut tried_rational = false;
    loop {
        let mag = b.to_f64().abs().max(a.to_f64().abs()).max(1.0);
        let w = (b.clone() - a.clone()).to_f64();
        if !tried_rational && w <= 1e-15 * mag {
            tried_rational = true;
            let est = ((a.clone() + b.clone()) * S::half()).to_f64();
            for cand in convergents::<S>(est) {
                if cand > a && cand <= b && p.eval(&cand).is_zero() {
                    return Root::Point(cand);
                }
            }
        }
        if w <= rel_width * mag {
            return Root::Bracket { lo: a, hi: b };
        }
        let mid = (a.clone() + b.clone()) * S::half();
        if p.eval(&mid).is_zero() {
            return Root::Point(mid);
        }
        if sturm.count(&a, &mid) == 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
}

/// Continued-fraction convergents of `x`, denominators up to about 1e12.
fn convergents<S: Scalar>(x: f64) -> Vec<S> {
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > 1_000_000_000_000 || h2.abs() > i64::MAX as i128 {
            break;
        }
        out.push(S::from_ratio(h2 as i64, k2 as i64));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-18 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

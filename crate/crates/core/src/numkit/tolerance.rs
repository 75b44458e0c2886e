use super::Scalar;

/// Float-mode comparison policy. Ignored by the exact backend.
///
/// A quantity `x` measured against a magnitude `scale` is treated as zero iff
/// `|x| <= zero_eps + rel_eps * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceContext {
    pub zero_eps: f64,
    pub rel_eps: f64,
    pub psd_floor: f64,
    /// Relative width at which endpoint bisection stops.
    pub bisect_eps: f64,
}

impl Default for ToleranceContext {
    fn default() -> Self {
        Self {
            zero_eps: 1e-12,
            rel_eps: 1e-10,
            psd_floor: 1e-10,
            bisect_eps: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl ToleranceContext {
    pub fn band(&self, scale: f64) -> f64 {
        self.zero_eps + self.rel_eps * scale.abs()
    }

    pub fn is_zero<S: Scalar>(&self, x: &S, scale: f64) -> bool {
        if S::EXACT {
            x.is_zero()
        } else {
            x.to_f64().abs() <= self.band(scale)
        }
    }

    pub fn sign<S: Scalar>(&self, x: &S, scale: f64) -> Sign {
        if self.is_zero(x, scale) {
            Sign::Zero
        } else if *x > S::zero() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    /// `a == b` exactly, or within the relative band of the larger magnitude.
    pub fn approx_eq<S: Scalar>(&self, a: &S, b: &S) -> bool {
        if S::EXACT {
            a == b
        } else {
            let (x, y) = (a.to_f64(), b.to_f64());
            (x - y).abs() <= self.band(x.abs().max(y.abs()))
        }
    }

    /// `a <= b` up to the comparison band.
    pub fn le<S: Scalar>(&self, a: &S, b: &S) -> bool {
        a <= b || self.approx_eq(a, b)
    }

    /// True when the quantity was decided by the tolerance band rather than by
    /// its value: nonzero but within the band, in float mode.
    pub fn is_borderline<S: Scalar>(&self, x: &S, scale: f64) -> bool {
        !S::EXACT && self.is_zero(x, scale)
    }

    pub fn validate(&self) -> crate::Result<()> {
        let fields = [self.zero_eps, self.rel_eps, self.psd_floor, self.bisect_eps];
        if fields.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(crate::Error::Precondition(format!(
                "tolerances must be positive and finite: {self:?}"
            )))
        }
    }
}

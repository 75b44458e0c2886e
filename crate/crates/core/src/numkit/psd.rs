use nalgebra::DMatrix;

use super::{char_poly, det_bareiss, Scalar, SymMatrix, ToleranceContext};
use crate::error::Result;

/// Outcome of a definiteness decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Definiteness {
    pub psd: bool,
    pub pd: bool,
    /// Float mode only: the smallest eigenvalue fell inside the tolerance band
    /// around zero, so the verdict depends on the tolerance policy.
    pub borderline: bool,
    /// Float mode only.
    pub min_eigenvalue: Option<f64>,
}

/// Decides positive (semi)definiteness.
///
/// Exact mode: PSD iff every coefficient of `det(lambda I + M)` is
/// nonnegative (the spectrum is real, so `prod (lambda + mu_i)` has
/// nonnegative coefficients iff every `mu_i >= 0`); PD iff every leading
/// principal minor is positive.
///
/// Float mode: smallest eigenvalue against `psd_floor * (1 + max|entry|)`.
pub fn definiteness<S: Scalar>(m: &SymMatrix<S>, ctx: &ToleranceContext) -> Result<Definiteness> {
    m.check_symmetric(ctx)?;
    if m.order() == 0 {
        return Ok(Definiteness { psd: true, pd: true, borderline: false, min_eigenvalue: None });
    }
    if S::EXACT {
        let psd = char_poly(m).iter().all(|c| *c >= S::zero());
        let pd = psd && (1..=m.order()).all(|r| det_bareiss(&m.leading(r)) > S::zero());
        return Ok(Definiteness { psd, pd, borderline: false, min_eigenvalue: None });
    }
    let lambda = min_eigenvalue(&m.to_f64());
    let floor = ctx.psd_floor * (1.0 + m.max_abs());
    Ok(Definiteness {
        psd: lambda >= -floor,
        pd: lambda > floor,
        borderline: lambda.abs() <= floor,
        min_eigenvalue: Some(lambda),
    })
}

pub fn is_psd<S: Scalar>(m: &SymMatrix<S>, ctx: &ToleranceContext) -> Result<bool> {
    Ok(definiteness(m, ctx)?.psd)
}

pub fn is_pd<S: Scalar>(m: &SymMatrix<S>, ctx: &ToleranceContext) -> Result<bool> {
    Ok(definiteness(m, ctx)?.pd)
}

pub fn min_eigenvalue(m: &SymMatrix<f64>) -> f64 {
    let n = m.order();
    let dm = DMatrix::from_fn(n, n, |i, j| *m.get(i, j));
    dm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

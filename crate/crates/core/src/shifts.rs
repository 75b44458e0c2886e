//! Unilateral weighted shifts `W_α e_n = α_n e_{n+1}`.
//!
//! Weights are stored squared: every formula downstream consumes ratios
//! `γ_{n+1}/γ_n = α_n^2`, so exact pipelines never leave the rationals.
//! Square roots appear only when rendering in float mode.

use crate::error::{Error, Result};
use crate::hankel::{self, is_k_positive, BlockIndex, MomentSequence, PropagationReport};
use crate::numkit::{Scalar, ToleranceContext};

/// Prefix `α_0..α_{N-1}` of a weight sequence, held as `α_n^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence<S> {
    squared: Vec<S>,
}

impl<S: Scalar> WeightSequence<S> {
    /// From squared weights `α_n^2`, all strictly positive.
    pub fn from_squared(squared: Vec<S>) -> Result<Self> {
        if let Some(n) = squared.iter().position(|a| *a <= S::zero()) {
            return Err(Error::Precondition(format!("weight α_{n} must be positive, got α² = {}", squared[n])));
        }
        Ok(Self { squared })
    }

    /// From the weights themselves; they are squared on entry.
    pub fn from_weights(weights: Vec<S>) -> Result<Self> {
        if let Some(n) = weights.iter().position(|a| *a <= S::zero()) {
            return Err(Error::Precondition(format!("weight α_{n} must be positive, got {}", weights[n])));
        }
        Ok(Self { squared: weights.into_iter().map(|a| a.clone() * a).collect() })
    }

    pub fn squared(&self) -> &[S] {
        &self.squared
    }

    pub fn len(&self) -> usize {
        self.squared.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squared.is_empty()
    }

    /// `α_n` as floats, for display.
    pub fn weights_f64(&self) -> Vec<f64> {
        self.squared.iter().map(|a| a.to_f64().sqrt()).collect()
    }

    /// `max α_n^2` over the prefix (the squared-norm surrogate on the horizon).
    pub fn max_squared(&self) -> Option<S> {
        self.squared.iter().cloned().reduce(S::max_of)
    }

    pub(crate) fn set_squared(&mut self, index: usize, value: S) {
        self.squared[index] = value;
    }
}

/// `γ_0 = 1`, `γ_{n+1} = α_n^2 γ_n`.
pub fn weights_to_moments<S: Scalar>(alpha: &WeightSequence<S>) -> MomentSequence<S> {
    let mut values = Vec::with_capacity(alpha.len() + 1);
    values.push(S::one());
    for a in alpha.squared() {
        let next = a.clone() * values.last().cloned().unwrap_or_else(S::one);
        values.push(next);
    }
    MomentSequence::new(values).expect("products of positive weights are positive")
}

/// `α_n^2 = γ_{n+1} / γ_n`. Needs every moment strictly positive.
pub fn moments_to_weights<S: Scalar>(gamma: &MomentSequence<S>) -> Result<WeightSequence<S>> {
    gamma.require_strictly_positive()?;
    let v = gamma.values();
    WeightSequence::from_squared(v.windows(2).map(|w| w[1].clone() / w[0].clone()).collect())
}

/// `α_n <= α_{n+1}` along the prefix.
pub fn is_hyponormal<S: Scalar>(alpha: &WeightSequence<S>, ctx: &ToleranceContext) -> bool {
    alpha.squared().windows(2).all(|w| ctx.le(&w[0], &w[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyponormalityVerdict {
    pub k: usize,
    pub holds: bool,
    pub horizon: usize,
    pub first_failure: Option<BlockIndex>,
    pub borderline: Vec<BlockIndex>,
}

/// `W_α` is k-hyponormal iff every `[M_γ]^n_k` is PSD (Curto's criterion),
/// decided on the horizon of the moment sequence.
pub fn is_k_hyponormal<S: Scalar>(
    alpha: &WeightSequence<S>,
    k: usize,
    ctx: &ToleranceContext,
) -> Result<HyponormalityVerdict> {
    if alpha.len() < 2 * k {
        return Err(Error::InsufficientMoments { required: 2 * k, horizon: alpha.len() });
    }
    let v = is_k_positive(&weights_to_moments(alpha), k, ctx)?;
    Ok(HyponormalityVerdict {
        k: v.k,
        holds: v.holds,
        horizon: v.horizon,
        first_failure: v.first_failure,
        borderline: v.borderline,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    pub k: usize,
    pub flat_pair_found: bool,
    /// First `n_0` with `α_{n_0} = α_{n_0+1}`.
    pub flat_index: Option<usize>,
    /// `α_n = α_{n_0}` for every `1 <= n < N`. Vacuously true without a flat pair.
    pub propagation_verified: bool,
    /// A flat pair exists and `α_0 != α_1`.
    pub alpha0_exception: bool,
}

/// For a 2-hyponormal shift, two equal adjacent weights force the whole tail
/// `α_1, α_2, ...` to be constant. Checks that on the prefix.
pub fn flatness_check<S: Scalar>(
    alpha: &WeightSequence<S>,
    k: usize,
    ctx: &ToleranceContext,
) -> Result<FlatnessReport> {
    if k < 2 {
        return Err(Error::Precondition("flatness propagation needs k >= 2".into()));
    }
    let verdict = is_k_hyponormal(alpha, k, ctx)?;
    if !verdict.holds {
        return Err(Error::Precondition(format!(
            "shift is not {k}-hyponormal on the horizon (block {} fails)",
            verdict.first_failure.map(|b| b.to_string()).unwrap_or_default()
        )));
    }
    let a = alpha.squared();
    let flat_index = a.windows(2).position(|w| ctx.approx_eq(&w[0], &w[1]));
    let Some(n0) = flat_index else {
        return Ok(FlatnessReport {
            k,
            flat_pair_found: false,
            flat_index: None,
            propagation_verified: true,
            alpha0_exception: false,
        });
    };
    let target = &a[n0.max(1)];
    let propagation_verified = a[1..].iter().all(|x| ctx.approx_eq(x, target));
    Ok(FlatnessReport {
        k,
        flat_pair_found: true,
        flat_index: Some(n0),
        propagation_verified,
        alpha0_exception: a.len() > 1 && !ctx.approx_eq(&a[0], &a[1]),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPropagationReport<S> {
    pub k: usize,
    pub p: usize,
    pub propagation: PropagationReport<S>,
    /// Highest block order for which every feasible block was checked PSD.
    pub psd_checked_up_to: usize,
    /// Every feasible block of every order `p..=psd_checked_up_to` is PSD:
    /// the finite-data shadow of subnormality. Never a subnormality claim.
    pub all_orders_psd: bool,
}

/// For a k-hyponormal shift with a vanishing `det [M_γ]^{n_0}_p`, `p < k`,
/// the order-`p` determinants vanish at every anchor `n >= 1` and the shift
/// is subnormal. Checks the determinant conclusion and reports PSD status of
/// every order from `p` up to the horizon.
pub fn propagation_for_shift<S: Scalar>(
    alpha: &WeightSequence<S>,
    k: usize,
    p: usize,
    ctx: &ToleranceContext,
) -> Result<ShiftPropagationReport<S>> {
    if p >= k {
        return Err(Error::Precondition(format!(
            "need p < k (got p = {p}, k = {k}); the determinant order must be below the positivity order"
        )));
    }
    let verdict = is_k_hyponormal(alpha, k, ctx)?;
    if !verdict.holds {
        return Err(Error::Precondition(format!("shift is not {k}-hyponormal on the horizon")));
    }
    let gamma = weights_to_moments(alpha);
    let propagation = hankel::propagation_report(&gamma, p + 1, ctx)?;
    let top = gamma.max_order();
    let mut all_orders_psd = true;
    for order in p..=top {
        if !is_k_positive(&gamma, order, ctx)?.holds {
            all_orders_psd = false;
            break;
        }
    }
    Ok(ShiftPropagationReport { k, p, propagation, psd_checked_up_to: top, all_orders_psd })
}

//! Hankel blocks `[M_γ]^n_k`, k-positivity and determinant tables.
//!
//! A moment sequence is only ever known up to a finite horizon `N`, so every
//! verdict here means "on all anchors `n` with `n + 2k <= N`" and carries the
//! horizon it was decided on.

use std::fmt;

use crate::error::{Error, Result};
use crate::numkit::{definiteness, det_bareiss, Scalar, SymMatrix, ToleranceContext};

/// Finite prefix `γ_0..γ_N` of a moment sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence<S> {
    values: Vec<S>,
}

impl<S: Scalar> MomentSequence<S> {
    /// Requires at least one value, `γ_0 > 0` and `γ_n >= 0`.
    pub fn new(values: Vec<S>) -> Result<Self> {
        let Some(first) = values.first() else {
            return Err(Error::InvalidMoments("empty sequence".into()));
        };
        if *first <= S::zero() {
            return Err(Error::InvalidMoments(format!("γ_0 must be positive, got {first}")));
        }
        if let Some(n) = values.iter().position(|v| *v < S::zero()) {
            return Err(Error::InvalidMoments(format!("γ_{n} = {} is negative", values[n])));
        }
        Ok(Self { values })
    }

    pub fn from_fn(horizon: usize, f: impl FnMut(usize) -> S) -> Result<Self> {
        Self::new((0..=horizon).map(f).collect())
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Result<&S> {
        self.values
            .get(n)
            .ok_or(Error::InsufficientMoments { required: n, horizon: self.horizon() })
    }

    /// `γ_n` for an index the caller has already range-checked.
    pub(crate) fn at(&self, n: usize) -> &S {
        &self.values[n]
    }

    pub fn require(&self, index: usize) -> Result<()> {
        if index > self.horizon() {
            Err(Error::InsufficientMoments { required: index, horizon: self.horizon() })
        } else {
            Ok(())
        }
    }

    /// First index whose moment is not strictly positive.
    pub fn first_nonpositive(&self) -> Option<usize> {
        self.values.iter().position(|v| *v <= S::zero())
    }

    pub fn require_strictly_positive(&self) -> Result<()> {
        match self.first_nonpositive() {
            Some(index) => Err(Error::NonPositiveMoment { index }),
            None => Ok(()),
        }
    }

    pub fn truncated(&self, horizon: usize) -> Self {
        Self { values: self.values[..=horizon.min(self.horizon())].to_vec() }
    }

    pub fn to_f64(&self) -> MomentSequence<f64> {
        MomentSequence { values: self.values.iter().map(Scalar::to_f64).collect() }
    }

    /// Largest block size parameter `k` with at least one feasible anchor.
    pub fn max_order(&self) -> usize {
        self.horizon() / 2
    }
}

/// Anchor `n` and size parameter `k` of the `(k+1)x(k+1)` block `[M_γ]^n_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockIndex {
    pub n: usize,
    pub k: usize,
}

impl BlockIndex {
    pub fn feasible(&self, horizon: usize) -> bool {
        self.n + 2 * self.k <= horizon
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, k={})", self.n, self.k)
    }
}

/// The Hankel block with entries `γ_{n+i+j}`, `0 <= i, j <= k`.
pub fn block<S: Scalar>(gamma: &MomentSequence<S>, n: usize, k: usize) -> Result<SymMatrix<S>> {
    gamma.require(n + 2 * k)?;
    Ok(SymMatrix::from_fn(k + 1, |i, j| gamma.at(n + i + j).clone()))
}

/// Number of feasible anchors for order `k` (zero when the horizon is short).
pub fn anchor_count<S: Scalar>(gamma: &MomentSequence<S>, k: usize) -> usize {
    (gamma.horizon() + 1).saturating_sub(2 * k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityVerdict<S> {
    pub k: usize,
    pub holds: bool,
    pub horizon: usize,
    pub first_failure: Option<BlockIndex>,
    /// The failing block, when there is one.
    pub witness: Option<SymMatrix<S>>,
    /// Float mode: anchors whose verdict was decided inside the tolerance band.
    pub borderline: Vec<BlockIndex>,
}

/// Scans every feasible anchor and reports the first block that is not PSD.
pub fn is_k_positive<S: Scalar>(
    gamma: &MomentSequence<S>,
    k: usize,
    ctx: &ToleranceContext,
) -> Result<PositivityVerdict<S>> {
    gamma.require(2 * k)?;
    let mut borderline = Vec::new();
    for n in 0..anchor_count(gamma, k) {
        let m = block(gamma, n, k)?;
        let d = definiteness(&m, ctx)?;
        if d.borderline {
            borderline.push(BlockIndex { n, k });
        }
        if !d.psd {
            return Ok(PositivityVerdict {
                k,
                holds: false,
                horizon: gamma.horizon(),
                first_failure: Some(BlockIndex { n, k }),
                witness: Some(m),
                borderline,
            });
        }
    }
    Ok(PositivityVerdict { k, holds: true, horizon: gamma.horizon(), first_failure: None, witness: None, borderline })
}

/// `γ >= 0` and `γ_n γ_{n+2} >= γ_{n+1}^2` for every `n <= N - 2`.
pub fn log_convexity<S: Scalar>(gamma: &MomentSequence<S>, ctx: &ToleranceContext) -> bool {
    let v = gamma.values();
    v.iter().all(|x| *x >= S::zero())
        && v.windows(3).all(|w| {
            let lhs = w[0].clone() * w[2].clone();
            let rhs = w[1].clone() * w[1].clone();
            ctx.le(&rhs, &lhs)
        })
}

/// Checks the implication "some `γ_{n_0}` vanishes ⟹ `γ_n = 0` for every
/// `n >= 1`", which every 1-positive sequence satisfies. Returns `false`
/// exactly when the data violates it.
pub fn zero_moment_collapse<S: Scalar>(gamma: &MomentSequence<S>, ctx: &ToleranceContext) -> bool {
    let scale = gamma.values().iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    let zero = |v: &S| ctx.is_zero(v, scale);
    let v = gamma.values();
    if !v.iter().any(zero) {
        return true;
    }
    v[1..].iter().all(zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetMethod {
    Condensation,
    Direct,
}

impl fmt::Display for DetMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetMethod::Condensation => "condensation",
            DetMethod::Direct => "direct",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetEntry<S> {
    pub n: usize,
    pub value: S,
    pub method: DetMethod,
}

/// `det [M_γ]^n_k` for every feasible anchor `n`, ordered by `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetTable<S> {
    pub k: usize,
    pub entries: Vec<DetEntry<S>>,
}

impl<S: Scalar> DetTable<S> {
    pub fn values(&self) -> Vec<S> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }

    pub fn value(&self, n: usize) -> Option<&S> {
        self.entries.get(n).map(|e| &e.value)
    }
}

/// Determinants of every feasible order-`k` block by Dodgson condensation.
///
/// Uses the Desnanot–Jacobi identity on Hankel blocks,
///
/// ```text
/// det[M]^i_m · det[M]^{i+2}_{m-2} = det[M]^i_{m-1} · det[M]^{i+2}_{m-1} - (det[M]^{i+1}_{m-1})^2,
/// ```
///
/// building orders `0..=k` in turn with the order-`-1` determinant taken
/// to be 1. Whenever the divisor vanishes (exactly, or below the Hadamard-scaled
/// band in float mode) that single entry is recomputed by Bareiss
/// elimination and tagged [`DetMethod::Direct`].
pub fn det_sequence<S: Scalar>(gamma: &MomentSequence<S>, k: usize, ctx: &ToleranceContext) -> Result<DetTable<S>> {
    Ok(det_tables(gamma, k, ctx)?.pop().expect("orders 0..=k are always built"))
}

/// Determinant tables of every order `0..=k`, built by the same condensation
/// sweep as [`det_sequence`].
pub fn det_tables<S: Scalar>(gamma: &MomentSequence<S>, k: usize, ctx: &ToleranceContext) -> Result<Vec<DetTable<S>>> {
    gamma.require(2 * k)?;
    let horizon = gamma.horizon();
    // order -1: empty determinants, one per anchor up to N + 2
    let mut before: Vec<S> = vec![S::one(); horizon + 3];
    let mut tables = vec![DetTable {
        k: 0,
        entries: gamma
            .values()
            .iter()
            .enumerate()
            .map(|(n, v)| DetEntry { n, value: v.clone(), method: DetMethod::Direct })
            .collect(),
    }];
    for m in 1..=k {
        let current = &tables[m - 1].entries;
        let count = anchor_count(gamma, m);
        let mut next = Vec::with_capacity(count);
        for i in 0..count {
            let divisor = &before[i + 2];
            let divisor_scale = if m >= 2 { block(gamma, i + 2, m - 2)?.hadamard_bound() } else { 1.0 };
            if ctx.is_zero(divisor, divisor_scale) {
                let value = det_bareiss(&block(gamma, i, m)?);
                next.push(DetEntry { n: i, value, method: DetMethod::Direct });
                continue;
            }
            let a = current[i].value.clone();
            let b = current[i + 2].value.clone();
            let c = current[i + 1].value.clone();
            let value = (a * b - c.clone() * c) / divisor.clone();
            next.push(DetEntry { n: i, value, method: DetMethod::Condensation });
        }
        before = tables[m - 1].values();
        tables.push(DetTable { k: m, entries: next });
    }
    Ok(tables)
}

/// Outcome of checking determinant propagation for a k-positive sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationReport<S> {
    /// Positivity order assumed of the sequence.
    pub k: usize,
    /// The determinant order inspected, `k - 1`.
    pub order: usize,
    pub horizon: usize,
    pub dets: DetTable<S>,
    pub vanishing_found: bool,
    pub first_vanishing: Option<usize>,
    /// Every anchor `n >= 1` has a vanishing determinant. Vacuously true when
    /// no vanishing determinant was found.
    pub conclusion_verified: bool,
    /// Anchors `n >= 1` with a nonzero determinant despite a vanishing one
    /// elsewhere (counterexamples to propagation; expected empty).
    pub violations: Vec<usize>,
    /// Vanishing found, yet the `n = 0` determinant is nonzero. Allowed: the
    /// conclusion only concerns `n >= 1`.
    pub anchor_zero_nonzero: bool,
    /// Float mode: anchors whose zero test was decided inside the band.
    pub borderline: Vec<usize>,
}

/// For a k-positive sequence, a single vanishing `det [M_γ]^{n_0}_{k-1}`
/// forces `det [M_γ]^n_{k-1} = 0` for every `n >= 1`. This computes the
/// order-`(k-1)` table and checks that conclusion on the data.
pub fn propagation_report<S: Scalar>(
    gamma: &MomentSequence<S>,
    k: usize,
    ctx: &ToleranceContext,
) -> Result<PropagationReport<S>> {
    if k == 0 {
        return Err(Error::Precondition("propagation needs k >= 1".into()));
    }
    let verdict = is_k_positive(gamma, k, ctx)?;
    if !verdict.holds {
        let at = verdict.first_failure.map(|b| b.to_string()).unwrap_or_default();
        return Err(Error::Precondition(format!("sequence is not {k}-positive on the horizon: block {at} is not PSD")));
    }
    let order = k - 1;
    let dets = det_sequence(gamma, order, ctx)?;
    let mut zero = Vec::with_capacity(dets.entries.len());
    let mut borderline = Vec::new();
    for e in &dets.entries {
        let scale = block(gamma, e.n, order)?.hadamard_bound();
        let z = ctx.is_zero(&e.value, scale);
        if ctx.is_borderline(&e.value, scale) {
            borderline.push(e.n);
        }
        zero.push(z);
    }
    let first_vanishing = zero.iter().position(|z| *z);
    let vanishing_found = first_vanishing.is_some();
    let violations: Vec<usize> = if vanishing_found {
        (1..zero.len()).filter(|&n| !zero[n]).collect()
    } else {
        Vec::new()
    };
    Ok(PropagationReport {
        k,
        order,
        horizon: gamma.horizon(),
        conclusion_verified: violations.is_empty(),
        anchor_zero_nonzero: vanishing_found && !zero[0],
        dets,
        vanishing_found,
        first_vanishing,
        violations,
        borderline,
    })
}

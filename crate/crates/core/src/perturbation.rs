//! Rank-one perturbations of a weighted shift.
//!
//! Scaling the weight `α_l` by `√t` multiplies every moment beyond `l` by
//! `t`. For an anchor `n <= l` the perturbed Hankel block is
//! `t·B + (1 - t)·H`, where `B = [M_γ]^n_k` and `H = H_k^n(l)` keeps only
//! the entries `γ_{n+i+j}` with `n + i + j <= l`. The set `I^k_n` of `t >= 0`
//! keeping that block PSD is a closed interval containing 1 (PSD matrices
//! form a convex cone and the block is affine in `t`), and `I^k` is the
//! intersection over `n <= l`.
//!
//! Anchors with `n + 2k <= l` have `H = B`, so they constrain nothing; they
//! are reported with `t_invariant` set and left out of the interiority test.

use std::fmt;

use crate::error::{Error, Result};
use crate::hankel::{block, is_k_positive, MomentSequence};
use crate::numkit::{
    definiteness, det_bareiss, eval_quadratic, solve_quadratic, Interval, Scalar, SymMatrix, ToleranceContext,
};
use crate::shifts::WeightSequence;

/// `(l, t)`: scale `α_l` by `√t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec<S> {
    pub l: usize,
    pub t: S,
}

impl<S: Scalar> PerturbationSpec<S> {
    pub fn new(l: usize, t: S) -> Result<Self> {
        if l == 0 {
            return Err(Error::Precondition("the perturbed index l must be at least 1".into()));
        }
        if t < S::zero() {
            return Err(Error::Precondition(format!("t = {t} is negative")));
        }
        Ok(Self { l, t })
    }
}

/// `γ'_n = γ_n` for `n <= l`, `t·γ_n` beyond.
pub fn perturb_moments<S: Scalar>(gamma: &MomentSequence<S>, spec: &PerturbationSpec<S>) -> Result<MomentSequence<S>> {
    gamma.require(spec.l)?;
    let values = gamma
        .values()
        .iter()
        .enumerate()
        .map(|(n, g)| if n <= spec.l { g.clone() } else { spec.t.clone() * g.clone() })
        .collect();
    MomentSequence::new(values)
}

/// `α'^2_l = t·α^2_l`. Rejects `t = 0`, which would make `α_l` vanish.
pub fn perturb_weights<S: Scalar>(alpha: &WeightSequence<S>, spec: &PerturbationSpec<S>) -> Result<WeightSequence<S>> {
    if spec.l >= alpha.len() {
        return Err(Error::InsufficientMoments { required: spec.l, horizon: alpha.len().saturating_sub(1) });
    }
    if spec.t.is_zero() {
        return Err(Error::Precondition("t = 0 annihilates the weight α_l; the perturbed shift is not injective".into()));
    }
    let mut out = alpha.clone();
    out.set_squared(spec.l, spec.t.clone() * alpha.squared()[spec.l].clone());
    Ok(out)
}

/// `H_k^n(l)`: entry `(i, j)` is `γ_{n+i+j}` when `n + i + j <= l`, else 0.
pub fn truncated_block<S: Scalar>(gamma: &MomentSequence<S>, n: usize, k: usize, l: usize) -> Result<SymMatrix<S>> {
    if n > l {
        return Err(Error::Precondition(format!(
            "anchor n = {n} lies beyond l = {l}; there the perturbed block is t times the original"
        )));
    }
    let b = block(gamma, n, k)?;
    Ok(SymMatrix::from_fn(k + 1, |i, j| if n + i + j <= l { b.get(i, j).clone() } else { S::zero() }))
}

fn require_positive_horizon<S: Scalar>(gamma: &MomentSequence<S>, l: usize, needed: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::Precondition("the perturbed index l must be at least 1".into()));
    }
    gamma.require(needed)?;
    gamma.truncated(needed).require_strictly_positive()
}

/// `I^1 = [γ_l^2 / (γ_{l-1} γ_{l+1}), γ_l γ_{l+2} / γ_{l+1}^2]`.
pub fn interval_i1<S: Scalar>(gamma: &MomentSequence<S>, l: usize, _ctx: &ToleranceContext) -> Result<Interval<S>> {
    require_positive_horizon(gamma, l, l + 2)?;
    let g = |i: usize| gamma.at(i).clone();
    Ok(Interval::new(
        g(l) * g(l) / (g(l - 1) * g(l + 1)),
        g(l) * g(l + 2) / (g(l + 1) * g(l + 1)),
    ))
}

/// `a t^2 + b t + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic<S> {
    pub a: S,
    pub b: S,
    pub c: S,
}

impl<S: Scalar> Quadratic<S> {
    pub fn eval(&self, t: &S) -> S {
        eval_quadratic(&self.a, &self.b, &self.c, t)
    }
}

impl<S: Scalar> fmt::Display for Quadratic<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) t^2 + ({}) t + ({})", self.a, self.b, self.c)
    }
}

/// `P(t) = det` of the perturbed order-2 block at anchor `l - 2`.
pub fn poly_p<S: Scalar>(gamma: &MomentSequence<S>, l: usize) -> Result<Quadratic<S>> {
    if l < 2 {
        return Err(Error::Precondition("P needs l >= 2".into()));
    }
    gamma.require(l + 2)?;
    let g = |i: usize| gamma.at(i).clone();
    Ok(Quadratic {
        a: -(g(l - 2) * g(l + 1) * g(l + 1)),
        b: g(l - 2) * g(l) * g(l + 2) + S::from_i64(2) * g(l - 1) * g(l) * g(l + 1) - g(l - 1) * g(l - 1) * g(l + 2),
        c: -(g(l) * g(l) * g(l)),
    })
}

/// `Q(t)`, with `t·Q(t) = det` of the perturbed order-2 block at anchor `l - 1`.
pub fn poly_q<S: Scalar>(gamma: &MomentSequence<S>, l: usize) -> Result<Quadratic<S>> {
    if l < 1 {
        return Err(Error::Precondition("Q needs l >= 1".into()));
    }
    gamma.require(l + 3)?;
    let g = |i: usize| gamma.at(i).clone();
    Ok(Quadratic {
        a: -(g(l + 1) * g(l + 1) * g(l + 1)),
        b: g(l - 1) * g(l + 1) * g(l + 3) + S::from_i64(2) * g(l) * g(l + 1) * g(l + 2)
            - g(l - 1) * g(l + 2) * g(l + 2),
        c: -(g(l) * g(l) * g(l + 3)),
    })
}

/// Upper end of the order-2 block at anchor `l`:
/// `-γ_l·det[[γ_{l+2}, γ_{l+3}], [γ_{l+3}, γ_{l+4}]] / det[[0, γ_{l+1}, γ_{l+2}], [γ_{l+1}, ...], ...]`.
/// `None` when the denominator vanishes (within the band in float mode).
pub fn matrix4_bound<S: Scalar>(gamma: &MomentSequence<S>, l: usize, ctx: &ToleranceContext) -> Result<Option<S>> {
    gamma.require(l + 4)?;
    let b = block(gamma, l, 2)?;
    let corner_free = SymMatrix::from_fn(3, |i, j| if i + j == 0 { S::zero() } else { b.get(i, j).clone() });
    let den = det_bareiss(&corner_free);
    if ctx.is_zero(&den, corner_free.hadamard_bound()) {
        return Ok(None);
    }
    let cof = det_bareiss(&b.principal(&[1, 2]));
    Ok(Some(-(gamma.at(l).clone() * cof) / den))
}

/// `det(t·B + (1 - t)·H)` at anchor `l` against
/// `t^{k+1} det B + (1 - t) t^k γ_l Cof`, `Cof` the determinant of `B`
/// without its first row and column. Exact equality in exact mode.
pub fn cofactor_identity_check<S: Scalar>(
    gamma: &MomentSequence<S>,
    l: usize,
    k: usize,
    t: &S,
    ctx: &ToleranceContext,
) -> Result<bool> {
    let b = block(gamma, l, k)?;
    let h = truncated_block(gamma, l, k, l)?;
    let one_minus = S::one() - t.clone();
    let lhs = det_bareiss(&b.combine(t, &h, &one_minus));
    let idx: Vec<usize> = (1..=k).collect();
    let cof = det_bareiss(&b.principal(&idx));
    let rhs = t.powi(k as u32 + 1) * det_bareiss(&b) + one_minus * t.powi(k as u32) * gamma.at(l).clone() * cof;
    if S::EXACT {
        return Ok(lhs == rhs);
    }
    let scale = b.combine(t, &h, &(S::one() - t.clone())).hadamard_bound().max(b.hadamard_bound());
    Ok((lhs.to_f64() - rhs.to_f64()).abs() <= ctx.band(scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointMethod {
    ClosedForm,
    QuadraticRoot,
    Bisection,
}

impl fmt::Display for EndpointMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EndpointMethod::ClosedForm => "closed_form",
            EndpointMethod::QuadraticRoot => "quadratic_root",
            EndpointMethod::Bisection => "bisection",
        })
    }
}

/// One end of an interval. `value` is exact, or for bisection the feasible
/// end of the final bracket, or for an irrational root the bracket midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Endpoint<S> {
    pub value: S,
    pub enclosure: Option<(S, S)>,
    pub method: EndpointMethod,
    /// Right end only: the search cap (the `I^1` right end) was itself feasible.
    pub at_cap: bool,
}

impl<S: Scalar> Endpoint<S> {
    fn exact(value: S, method: EndpointMethod) -> Self {
        Self { value, enclosure: None, method, at_cap: false }
    }
}

/// `I^k_n` for one anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInterval<S> {
    pub n: usize,
    pub lo: Endpoint<S>,
    pub hi: Endpoint<S>,
    /// `n + 2k <= l`: the block does not depend on `t`.
    pub t_invariant: bool,
    /// A closed form was unavailable (double root, zero denominator) and
    /// the block fell back to bisection.
    pub degenerate: bool,
}

impl<S: Scalar> BlockInterval<S> {
    pub fn interval(&self) -> Interval<S> {
        Interval::new(self.lo.value.clone(), self.hi.value.clone())
    }
}

/// Closed-form ingredients of `I^2`, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct I2Diagnostics<S> {
    pub p: Option<Quadratic<S>>,
    pub q: Quadratic<S>,
    pub matrix4_bound: Option<S>,
    /// Lower end forced by the determinant of the anchor `l - 3` block.
    pub anchor_l3_bound: Option<S>,
    /// `max{α(P), α(Q), γ_l^2/(γ_{l+1}γ_{l-1})}` and `min{β(P), β(Q), matrix4_bound}`,
    /// when every ingredient exists.
    pub four_block_formula: Option<Interval<S>>,
    pub p_at_0: Option<S>,
    pub p_at_1: Option<S>,
    pub q_at_0: S,
    pub q_at_1: S,
    /// `P(γ_l^2/(γ_{l-2}γ_{l+2}))` and `P(γ_lγ_{l+2}/γ_{l+1}^2)`.
    pub p_at_ratios: Option<(S, S)>,
    /// `min{γ_{l-1}^2γ_{l+1}γ_{l+3}, γ_{l-2}γ_lγ_{l+2}^2} >= (2γ_lγ_{l+1} - γ_{l-1}γ_{l+2})^2`.
    /// Reported only; its hypotheses are not established.
    pub discriminant_inequality: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport<S> {
    pub k: usize,
    pub l: usize,
    pub per_block: Vec<BlockInterval<S>>,
    /// `I^k`, the intersection of the per-anchor intervals.
    pub intersection: Interval<S>,
    pub lo: Endpoint<S>,
    pub hi: Endpoint<S>,
    /// Anchors attaining the two ends of the intersection.
    pub lo_block: usize,
    pub hi_block: usize,
    pub contains_one: bool,
    pub one_interior: bool,
    /// Float mode: the interior decision was within the tolerance margin.
    pub interior_borderline: bool,
    /// `0 ∈ I^k`: fine for the matrices, but `t = 0` kills the weight `α_l`.
    pub zero_admitted: bool,
    pub notes: Vec<String>,
    pub diagnostics: Option<I2Diagnostics<S>>,
}

fn perturbed<S: Scalar>(b: &SymMatrix<S>, h: &SymMatrix<S>, t: &S) -> SymMatrix<S> {
    b.combine(t, h, &(S::one() - t.clone()))
}

fn feasible<S: Scalar>(b: &SymMatrix<S>, h: &SymMatrix<S>, t: &S, ctx: &ToleranceContext) -> Result<bool> {
    Ok(definiteness(&perturbed(b, h, t), ctx)?.psd)
}

fn narrow_enough<S: Scalar>(lo: &S, hi: &S, ctx: &ToleranceContext) -> bool {
    let mag = hi.to_f64().abs().max(lo.to_f64().abs()).max(1.0);
    (hi.clone() - lo.clone()).to_f64() <= ctx.bisect_eps * mag
}

/// Left end of `{t : t·B + (1-t)·H PSD}` searched on `[0, 1]`.
fn bisect_left<S: Scalar>(b: &SymMatrix<S>, h: &SymMatrix<S>, ctx: &ToleranceContext) -> Result<Endpoint<S>> {
    if feasible(b, h, &S::zero(), ctx)? {
        return Ok(Endpoint::exact(S::zero(), EndpointMethod::Bisection));
    }
    let (mut bad, mut good) = (S::zero(), S::one());
    while !narrow_enough(&bad, &good, ctx) {
        let mid = (bad.clone() + good.clone()) * S::half();
        if feasible(b, h, &mid, ctx)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Endpoint { value: good.clone(), enclosure: Some((bad, good)), method: EndpointMethod::Bisection, at_cap: false })
}

/// Right end searched on `[1, cap]`.
fn bisect_right<S: Scalar>(b: &SymMatrix<S>, h: &SymMatrix<S>, cap: &S, ctx: &ToleranceContext) -> Result<Endpoint<S>> {
    if feasible(b, h, cap, ctx)? {
        return Ok(Endpoint { value: cap.clone(), enclosure: None, method: EndpointMethod::Bisection, at_cap: true });
    }
    let (mut good, mut bad) = (S::one(), cap.clone());
    while !narrow_enough(&good, &bad, ctx) {
        let mid = (bad.clone() + good.clone()) * S::half();
        if feasible(b, h, &mid, ctx)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Endpoint { value: good.clone(), enclosure: Some((good, bad)), method: EndpointMethod::Bisection, at_cap: false })
}

fn bisect_block<S: Scalar>(
    gamma: &MomentSequence<S>,
    n: usize,
    k: usize,
    l: usize,
    cap: &S,
    ctx: &ToleranceContext,
) -> Result<BlockInterval<S>> {
    let b = block(gamma, n, k)?;
    let h = truncated_block(gamma, n, k, l)?;
    if n + 2 * k <= l {
        return Ok(BlockInterval {
            n,
            lo: Endpoint::exact(S::zero(), EndpointMethod::ClosedForm),
            hi: Endpoint { value: cap.clone(), enclosure: None, method: EndpointMethod::ClosedForm, at_cap: true },
            t_invariant: true,
            degenerate: false,
        });
    }
    if !feasible(&b, &h, &S::one(), ctx)? {
        return Err(Error::Consistency(format!("anchor {n}: the unperturbed block is not PSD")));
    }
    Ok(BlockInterval {
        n,
        lo: bisect_left(&b, &h, ctx)?,
        hi: bisect_right(&b, &h, cap, ctx)?,
        t_invariant: false,
        degenerate: false,
    })
}

fn check_k_positive<S: Scalar>(gamma: &MomentSequence<S>, k: usize, ctx: &ToleranceContext) -> Result<()> {
    let verdict = is_k_positive(gamma, k, ctx)?;
    match verdict.first_failure {
        None => Ok(()),
        Some(b) => Err(Error::Precondition(format!("γ is not {k}-positive on the horizon: block {b} is not PSD"))),
    }
}

fn i1_cap<S: Scalar>(gamma: &MomentSequence<S>, l: usize, ctx: &ToleranceContext) -> Result<S> {
    let hi = interval_i1(gamma, l, ctx)?.hi().cloned();
    // 1-positivity makes the cap at least 1; guard against float rounding.
    Ok(hi.map_or_else(S::one, |h| S::max_of(h, S::one())))
}

fn assemble<S: Scalar>(
    k: usize,
    l: usize,
    per_block: Vec<BlockInterval<S>>,
    notes: Vec<String>,
    diagnostics: Option<I2Diagnostics<S>>,
    ctx: &ToleranceContext,
) -> IntervalReport<S> {
    let mut lo_block = 0;
    let mut hi_block = 0;
    for (i, b) in per_block.iter().enumerate() {
        if b.lo.value > per_block[lo_block].lo.value {
            lo_block = i;
        }
        if b.hi.value < per_block[hi_block].hi.value {
            hi_block = i;
        }
    }
    let lo = per_block[lo_block].lo.clone();
    let hi = per_block[hi_block].hi.clone();
    let intersection = Interval::new(lo.value.clone(), hi.value.clone());
    let one = S::one();
    let slack = if S::EXACT { 0.0 } else { ctx.bisect_eps };
    let (lo_f, hi_f) = (lo.value.to_f64(), hi.value.to_f64());
    let contains_one = intersection.contains(&one) || (lo_f <= 1.0 + slack && hi_f >= 1.0 - slack);
    let (one_interior, interior_borderline) = if S::EXACT {
        (lo.value < one && one < hi.value, false)
    } else {
        // Float probes accept slightly infeasible t (the PSD floor), which
        // pushes endpoints outward; demand a visible margin around 1.
        let margin = ctx.psd_floor.sqrt();
        let interior = lo_f < 1.0 - margin && hi_f > 1.0 + margin;
        let near = (1.0 - lo_f).abs() <= margin || (hi_f - 1.0).abs() <= margin;
        (interior, near && lo_f < 1.0 && hi_f > 1.0)
    };
    IntervalReport {
        k,
        l,
        zero_admitted: lo.value.is_zero(),
        lo_block: per_block[lo_block].n,
        hi_block: per_block[hi_block].n,
        per_block,
        intersection,
        lo,
        hi,
        contains_one,
        one_interior,
        interior_borderline,
        notes,
        diagnostics,
    }
}

/// `I^k` by bisection on the PSD predicate, anchor by anchor.
///
/// Each left end is searched on `[0, 1]` and each right end on `[1, cap]`
/// with `cap` the right end of `I^1`, to width `bisect_eps` (relative).
/// Probes are exact in exact mode. Needs `l + 2k <= N`, a strictly positive
/// prefix and `k`-positivity.
pub fn interval_ik<S: Scalar>(
    gamma: &MomentSequence<S>,
    l: usize,
    k: usize,
    ctx: &ToleranceContext,
) -> Result<IntervalReport<S>> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    require_positive_horizon(gamma, l, l + 2 * k)?;
    check_k_positive(gamma, k, ctx)?;
    let cap = i1_cap(gamma, l, ctx)?;
    let per_block = (0..=l).map(|n| bisect_block(gamma, n, k, l, &cap, ctx)).collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    if per_block.iter().any(|b| b.hi.at_cap && !b.t_invariant) {
        notes.push("right end at the I^1 bound (exact)".to_string());
    }
    let report = assemble(k, l, per_block, notes, None, ctx);
    Ok(with_zero_note(report))
}

fn with_zero_note<S: Scalar>(mut r: IntervalReport<S>) -> IntervalReport<S> {
    if r.zero_admitted {
        r.notes.push("t = 0 is admitted; it annihilates α_l, so the perturbed shift is not injective".into());
    }
    r
}

/// Quadratic block: `[α, β]` from the positive roots of `q`, or `None` when
/// the roots are unusable (double, missing).
fn root_interval<S: Scalar>(q: &Quadratic<S>, ctx: &ToleranceContext) -> Result<Option<(Endpoint<S>, Endpoint<S>)>> {
    if q.a.is_zero() {
        return Ok(None);
    }
    let roots = solve_quadratic(&q.a, &q.b, &q.c, ctx)?;
    if roots.double || roots.roots.len() != 2 {
        return Ok(None);
    }
    let end = |r: &crate::numkit::Root<S>| Endpoint {
        value: r.value(),
        enclosure: (!r.is_point()).then(|| (r.lower(), r.upper())),
        method: EndpointMethod::QuadraticRoot,
        at_cap: false,
    };
    Ok(Some((end(&roots.roots[0]), end(&roots.roots[1]))))
}

/// `I^2` from closed forms where they exist.
///
/// Anchor `l - 2` uses the roots of `P`, anchor `l - 1` those of `Q`,
/// anchor `l` the interval `[0, matrix4_bound]`. Anchor `l - 3` is
/// `t >= -det[[γ_{l-3}, γ_{l-2}, γ_{l-1}], [.., γ_l], [γ_{l-1}, γ_l, 0]] /
/// (γ_{l+1} det[[γ_{l-3}, γ_{l-2}], [γ_{l-2}, γ_{l-1}]])`, a Schur
/// complement bound that is never below `γ_l^2/(γ_{l-1}γ_{l+1})` and can
/// exceed every other lower constraint. Anchors below `l - 3` do not depend
/// on `t`. Degenerate closed forms fall back to bisection.
pub fn interval_i2<S: Scalar>(gamma: &MomentSequence<S>, l: usize, ctx: &ToleranceContext) -> Result<IntervalReport<S>> {
    require_positive_horizon(gamma, l, l + 4)?;
    check_k_positive(gamma, 2, ctx)?;
    let cap = i1_cap(gamma, l, ctx)?;
    let i1_lo = interval_i1(gamma, l, ctx)?.lo().cloned().unwrap_or_else(S::zero);
    let g = |i: usize| gamma.at(i).clone();
    let mut notes = Vec::new();
    let mut per_block = Vec::with_capacity(l + 1);

    let p = if l >= 2 { Some(poly_p(gamma, l)?) } else { None };
    let q = poly_q(gamma, l)?;
    let bound = matrix4_bound(gamma, l, ctx)?;

    let mut anchor_l3_bound = None;
    for n in 0..=l {
        let closed = if n + 4 <= l {
            None
        } else if n + 3 == l {
            let m = g(l - 3) * g(l - 1) - g(l - 2) * g(l - 2);
            let b = block(gamma, n, 2)?;
            let corner = SymMatrix::from_fn(3, |i, j| if i + j == 4 { S::zero() } else { b.get(i, j).clone() });
            if ctx.is_zero(&m, (g(l - 3) * g(l - 1)).to_f64()) {
                None
            } else {
                let t0 = -det_bareiss(&corner) / (g(l + 1) * m);
                let t0 = S::max_of(t0, i1_lo.clone());
                anchor_l3_bound = Some(t0.clone());
                Some((
                    Endpoint::exact(t0, EndpointMethod::ClosedForm),
                    Endpoint { value: cap.clone(), enclosure: None, method: EndpointMethod::ClosedForm, at_cap: true },
                ))
            }
        } else if n + 2 == l {
            root_interval(p.as_ref().expect("l >= 2 here"), ctx)?
        } else if n + 1 == l {
            root_interval(&q, ctx)?
        } else {
            bound.clone().map(|b| {
                let at_cap = b >= cap;
                (
                    Endpoint::exact(S::zero(), EndpointMethod::ClosedForm),
                    Endpoint { value: S::min_of(b, cap.clone()), enclosure: None, method: EndpointMethod::ClosedForm, at_cap },
                )
            })
        };
        let entry = match closed {
            Some((lo, hi)) => BlockInterval { n, lo, hi, t_invariant: false, degenerate: false },
            None => {
                let mut b = bisect_block(gamma, n, 2, l, &cap, ctx)?;
                if n + 4 > l {
                    b.degenerate = true;
                    notes.push(format!("anchor {n}: closed form degenerate, bisection used"));
                }
                b
            }
        };
        per_block.push(entry);
    }

    if let Some(t0) = &anchor_l3_bound {
        if *t0 > i1_lo {
            notes.push(format!("anchor {}: determinant bound {:.12} exceeds the I^1 left end", l - 3, t0.to_f64()));
        }
    }

    let diagnostics = diagnostics(gamma, l, p, q, bound, anchor_l3_bound, &i1_lo, ctx)?;
    let report = assemble(2, l, per_block, notes, Some(diagnostics), ctx);
    let mut report = with_zero_note(report);
    if let Some(formula) = report.diagnostics.as_ref().and_then(|d| d.four_block_formula.clone()) {
        if !formula.approx_eq(&report.intersection, ctx) {
            report.notes.push(format!("four-block max/min formula gives {formula}; the anchor-wise result differs"));
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn diagnostics<S: Scalar>(
    gamma: &MomentSequence<S>,
    l: usize,
    p: Option<Quadratic<S>>,
    q: Quadratic<S>,
    bound: Option<S>,
    anchor_l3_bound: Option<S>,
    i1_lo: &S,
    ctx: &ToleranceContext,
) -> Result<I2Diagnostics<S>> {
    let g = |i: usize| gamma.at(i).clone();
    let (zero, one) = (S::zero(), S::one());
    let p_at_ratios = p.as_ref().map(|p| {
        (
            p.eval(&(g(l) * g(l) / (g(l - 2) * g(l + 2)))),
            p.eval(&(g(l) * g(l + 2) / (g(l + 1) * g(l + 1)))),
        )
    });
    let four_block_formula = match (&p, &bound) {
        (Some(p), Some(b)) => match (root_interval(p, ctx)?, root_interval(&q, ctx)?) {
            (Some((pa, pb)), Some((qa, qb))) => Some(Interval::new(
                S::max_of(S::max_of(pa.value, qa.value), i1_lo.clone()),
                S::min_of(S::min_of(pb.value, qb.value), b.clone()),
            )),
            _ => None,
        },
        _ => None,
    };
    let discriminant_inequality = (l >= 2).then(|| {
        let lhs = S::min_of(
            g(l - 1) * g(l - 1) * g(l + 1) * g(l + 3),
            g(l - 2) * g(l) * g(l + 2) * g(l + 2),
        );
        let d = S::from_i64(2) * g(l) * g(l + 1) - g(l - 1) * g(l + 2);
        ctx.le(&(d.clone() * d), &lhs)
    });
    Ok(I2Diagnostics {
        discriminant_inequality,
        p_at_0: p.as_ref().map(|p| p.eval(&zero)),
        p_at_1: p.as_ref().map(|p| p.eval(&one)),
        q_at_0: q.eval(&zero),
        q_at_1: q.eval(&one),
        p_at_ratios,
        p,
        q,
        matrix4_bound: bound,
        anchor_l3_bound,
        four_block_formula,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorVerdict {
    /// `1` lies strictly inside `I^k` (from the bisection intervals).
    pub interior: bool,
    /// Every `t`-dependent anchor block (`l - 2k < n <= l`) is PD.
    pub pd_all: bool,
    /// First `t`-dependent anchor whose block is not PD.
    pub failing_block: Option<usize>,
    /// Same test over every anchor `n <= l`, including the `t`-invariant ones.
    pub pd_all_anchors: bool,
    pub t_invariant_anchors: Vec<usize>,
    /// `interior == pd_all`. A disagreement is a numerical incident.
    pub agree: bool,
    /// Float mode: a PD verdict or the interior margin fell within tolerance.
    pub borderline: bool,
    pub notes: Vec<String>,
}

/// Is `1` an interior point of `I^k`? Computed twice: from the positive
/// definiteness of the anchor blocks, and independently from the
/// bisection intervals.
///
/// Only anchors whose block depends on `t` take part in the definiteness
/// test; a singular block that `t` does not touch cannot pin `t = 1`.
pub fn is_interior<S: Scalar>(
    gamma: &MomentSequence<S>,
    l: usize,
    k: usize,
    ctx: &ToleranceContext,
) -> Result<InteriorVerdict> {
    let report = interval_ik(gamma, l, k, ctx)?;
    let mut failing_block = None;
    let mut pd_all_anchors = true;
    let mut borderline = report.interior_borderline;
    let mut t_invariant_anchors = Vec::new();
    for n in 0..=l {
        let d = definiteness(&block(gamma, n, k)?, ctx)?;
        borderline |= d.borderline;
        pd_all_anchors &= d.pd;
        if n + 2 * k <= l {
            t_invariant_anchors.push(n);
        } else if !d.pd && failing_block.is_none() {
            failing_block = Some(n);
        }
    }
    let pd_all = failing_block.is_none();
    let mut notes = Vec::new();
    if k != l {
        notes.push(format!(
            "the criterion is stated both over n <= k and over n <= l; anchors n <= l = {l} are used (k = {k})"
        ));
    }
    if !t_invariant_anchors.is_empty() {
        notes.push(format!("t-invariant anchors {t_invariant_anchors:?} excluded from the definiteness test"));
    }
    if pd_all != report.one_interior {
        notes.push("definiteness and interval verdicts disagree: numerical-tolerance incident".into());
    }
    Ok(InteriorVerdict {
        notes,
        interior: report.one_interior,
        pd_all,
        failing_block,
        pd_all_anchors,
        t_invariant_anchors,
        agree: pd_all == report.one_interior,
        borderline,
    })
}

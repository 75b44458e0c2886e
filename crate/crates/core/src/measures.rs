//! Finitely atomic representing measures.
//!
//! A moment sequence of a positive measure on `[0, ∞)` has a finitely atomic
//! representing measure exactly when it satisfies a linear recursion, and
//! then exactly when some Hankel determinant vanishes. This module detects
//! the recursion, recovers the atoms as roots of its characteristic
//! polynomial and the densities from a Vandermonde system, and checks the
//! result against the input moments.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hankel::{block, det_tables, BlockIndex, MomentSequence};
use crate::numkit::{definiteness, real_roots_in, solve_vandermonde, Poly, Root, Scalar, ToleranceContext};
use crate::shifts::{weights_to_moments, WeightSequence};

/// `μ = Σ_j ρ_j δ_{x_j}` with `0 <= x_0 < x_1 < ...` and every `ρ_j > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure<S> {
    atoms: Vec<S>,
    densities: Vec<S>,
    exact: bool,
}

impl<S: Scalar> AtomicMeasure<S> {
    pub fn new(atoms: Vec<S>, densities: Vec<S>) -> Result<Self> {
        Self::build(atoms, densities, true)
    }

    fn build(atoms: Vec<S>, densities: Vec<S>, exact: bool) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != densities.len() {
            return Err(Error::Dimension(format!("{} atoms and {} densities", atoms.len(), densities.len())));
        }
        if atoms[0] < S::zero() {
            return Err(Error::NotStieltjesAtomic(format!("atom {} is negative", atoms[0])));
        }
        if let Some(i) = atoms.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Precondition(format!("atoms must be strictly increasing (index {})", i + 1)));
        }
        if let Some(index) = densities.iter().position(|r| *r <= S::zero()) {
            return Err(Error::DensitiesNotPositive { index, value: densities[index].to_string() });
        }
        Ok(Self { atoms, densities, exact })
    }

    /// Unit mass at `x`.
    pub fn dirac(x: S) -> Result<Self> {
        Self::new(vec![x], vec![S::one()])
    }

    pub fn atoms(&self) -> &[S] {
        &self.atoms
    }

    pub fn densities(&self) -> &[S] {
        &self.densities
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// False when some atom is irrational and only a rational approximation
    /// (the midpoint of a certified bracket) is stored.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn total_mass(&self) -> S {
        self.densities.iter().cloned().fold(S::zero(), |a, b| a + b)
    }
}

/// `γ_n = Σ_j ρ_j x_j^n` for `0 <= n <= horizon`.
pub fn moments_of<S: Scalar>(mu: &AtomicMeasure<S>, horizon: usize) -> MomentSequence<S> {
    let mut powers: Vec<S> = mu.densities.clone();
    let mut values = Vec::with_capacity(horizon + 1);
    for _ in 0..=horizon {
        values.push(powers.iter().cloned().fold(S::zero(), |a, b| a + b));
        for (p, x) in powers.iter_mut().zip(&mu.atoms) {
            *p = p.clone() * x.clone();
        }
    }
    MomentSequence::new(values).expect("a positive measure has positive total mass")
}

/// `γ_{p+r} = a_{r-1} γ_{p+r-1} + ... + a_0 γ_p` for every `p >= valid_from`
/// on the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Recursion<S> {
    /// `a_0, ..., a_{r-1}`.
    pub coeffs: Vec<S>,
    pub valid_from: usize,
    /// Largest absolute residual over the fitted equations (0 in exact mode).
    pub residual: f64,
}

impl<S: Scalar> Recursion<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        Self { coeffs, valid_from: 0, residual: 0.0 }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `h(t) = t^r - a_{r-1} t^{r-1} - ... - a_0`.
    pub fn characteristic(&self) -> Poly<S> {
        let mut c: Vec<S> = self.coeffs.iter().map(|a| -a.clone()).collect();
        c.push(S::one());
        Poly::new(c)
    }

    /// Residuals `γ_{p+r} - Σ_j a_j γ_{p+j}` for `p = valid_from..=N-r`.
    pub fn residuals(&self, gamma: &MomentSequence<S>) -> Vec<S> {
        let r = self.order();
        let v = gamma.values();
        (self.valid_from..v.len().saturating_sub(r))
            .map(|p| {
                let fit = self.coeffs.iter().enumerate().fold(S::zero(), |acc, (j, a)| acc + a.clone() * v[p + j].clone());
                v[p + r].clone() - fit
            })
            .collect()
    }
}

/// Minimal-order linear recursion valid from index 0, searched up to
/// `max_order`. Needs `N >= 2 * max_order`.
///
/// Exact mode solves the overdetermined Hankel system by exact elimination
/// and accepts only a consistent one. Float mode takes a least-squares fit
/// and accepts it when every residual is within `rel_eps * max|γ|`.
pub fn detect_recursion<S: Scalar>(
    gamma: &MomentSequence<S>,
    max_order: usize,
    ctx: &ToleranceContext,
) -> Result<Option<Recursion<S>>> {
    gamma.require(2 * max_order)?;
    let v = gamma.values();
    let n = gamma.horizon();
    let gamma_max = v.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
    for r in 1..=max_order {
        let rows: Vec<Vec<S>> = (0..=n - r).map(|p| v[p..p + r].to_vec()).collect();
        let rhs: Vec<S> = (0..=n - r).map(|p| v[p + r].clone()).collect();
        let found = if S::EXACT {
            solve_consistent(rows, rhs).map(Recursion::new)
        } else {
            least_squares(&rows, &rhs).and_then(|coeffs| {
                let mut rec = Recursion::new(coeffs);
                rec.residual = rec.residuals(gamma).iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
                (rec.residual <= ctx.band(gamma_max)).then_some(rec)
            })
        };
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Exact elimination on an overdetermined system; a particular solution
/// (free variables zero) when consistent.
fn solve_consistent<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(p, row);
        b.swap(p, row);
        let lead = a[row][col].clone();
        for j in col..cols {
            a[row][j] = a[row][j].clone() / lead.clone();
        }
        b[row] = b[row].clone() / lead;
        for i in 0..rows {
            if i == row || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in col..cols {
                let v = a[i][j].clone() - f.clone() * a[row][j].clone();
                a[i][j] = v;
            }
            let v = b[i].clone() - f * b[row].clone();
            b[i] = v;
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    if b[row..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![S::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i].clone();
    }
    Some(x)
}

fn least_squares<S: Scalar>(rows: &[Vec<S>], rhs: &[S]) -> Option<Vec<S>> {
    let m = rows.len();
    let r = rows.first().map_or(0, Vec::len);
    // row equilibration, so small early moments weigh as much as late ones
    let row_scale: Vec<f64> = (0..m)
        .map(|i| rows[i].iter().chain(std::iter::once(&rhs[i])).fold(0.0f64, |s, x| s.max(x.to_f64().abs())).max(f64::MIN_POSITIVE))
        .collect();
    let mut a = DMatrix::from_fn(m, r, |i, j| rows[i][j].to_f64() / row_scale[i]);
    // column equilibration
    let scales: Vec<f64> = (0..r)
        .map(|j| a.column(j).iter().fold(0.0f64, |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE))
        .collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).iter_mut().for_each(|x| *x /= s);
    }
    let b = nalgebra::DVector::from_iterator(m, rhs.iter().zip(&row_scale).map(|(x, s)| x.to_f64() / s));
    let x = a.svd(true, true).solve(&b, 1e-15).ok()?;
    x.iter().zip(&scales).map(|(v, s)| S::from_f64(v / s)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMassVerdict {
    pub finite: bool,
    /// First vanishing `det [M_γ]^p_k` in `(k, p)` lexicographic order; `n` is `p`.
    pub witness: Option<BlockIndex>,
    pub horizon: usize,
    /// Float mode: the witness was declared zero by the tolerance band.
    pub borderline: bool,
}

/// Stieltjes double-positivity screen: `(γ_{i+j})` and `(γ_{i+j+1})` PSD at
/// the largest feasible order (hence at every order, by interlacing of
/// leading principal submatrices).
pub fn double_positivity<S: Scalar>(gamma: &MomentSequence<S>, ctx: &ToleranceContext) -> Result<Option<BlockIndex>> {
    let n = gamma.horizon();
    let mut checks = vec![BlockIndex { n: 0, k: n / 2 }];
    if n >= 1 {
        checks.push(BlockIndex { n: 1, k: (n - 1) / 2 });
    }
    for b in checks {
        if !definiteness(&block(gamma, b.n, b.k)?, ctx)?.psd {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

/// Searches for a vanishing Hankel determinant, which on Stieltjes data
/// certifies a finitely atomic representing measure. Scans `k` upward, then
/// `p`, and returns the first witness.
pub fn is_finite_mass<S: Scalar>(gamma: &MomentSequence<S>, ctx: &ToleranceContext) -> Result<FiniteMassVerdict> {
    if let Some(b) = double_positivity(gamma, ctx)? {
        return Err(Error::Precondition(format!(
            "not a Stieltjes moment sequence on the horizon: block {b} fails the double positivity screen"
        )));
    }
    let tables = det_tables(gamma, gamma.max_order(), ctx)?;
    for table in &tables {
        for e in &table.entries {
            let scale = block(gamma, e.n, table.k)?.hadamard_bound();
            if ctx.is_zero(&e.value, scale) {
                return Ok(FiniteMassVerdict {
                    finite: true,
                    witness: Some(BlockIndex { n: e.n, k: table.k }),
                    horizon: gamma.horizon(),
                    borderline: ctx.is_borderline(&e.value, scale),
                });
            }
        }
    }
    Ok(FiniteMassVerdict { finite: false, witness: None, horizon: gamma.horizon(), borderline: false })
}

/// Atoms from the roots of the recursion's characteristic polynomial,
/// densities from `Σ_j ρ_j x_j^i = γ_i`, `i < r`. The result is checked
/// against every moment on the horizon before it is returned.
pub fn recover_atoms<S: Scalar>(
    rec: &Recursion<S>,
    gamma: &MomentSequence<S>,
    ctx: &ToleranceContext,
) -> Result<AtomicMeasure<S>> {
    if rec.valid_from != 0 {
        return Err(Error::Precondition("atom recovery needs a recursion valid from index 0".into()));
    }
    let r = rec.order();
    gamma.require(r.saturating_sub(1))?;
    let h = rec.characteristic();
    let (atoms, exact) = if S::EXACT { exact_roots(&h)? } else { (float_roots(&h, ctx)?, true) };
    let rhs: Vec<S> = gamma.values()[..r].to_vec();
    let densities = solve_vandermonde(&atoms, &rhs, ctx)?;
    let mass = densities.iter().map(|d| d.to_f64().abs()).sum::<f64>();
    if let Some(index) = densities.iter().position(|d| *d <= S::zero() || (!S::EXACT && ctx.is_zero(d, mass))) {
        return Err(Error::DensitiesNotPositive { index, value: densities[index].to_string() });
    }
    let mu = AtomicMeasure::build(atoms, densities, S::EXACT && exact)?;
    verify_moments(&mu, gamma, ctx)?;
    Ok(mu)
}

fn verify_moments<S: Scalar>(mu: &AtomicMeasure<S>, gamma: &MomentSequence<S>, ctx: &ToleranceContext) -> Result<()> {
    let fitted = moments_of(mu, gamma.horizon());
    for (n, (a, b)) in fitted.values().iter().zip(gamma.values()).enumerate() {
        let ok = if S::EXACT && mu.exact {
            a == b
        } else {
            let rel = if S::EXACT { 1e-20 } else { ctx.rel_eps.sqrt() };
            let (x, y) = (a.to_f64(), b.to_f64());
            (x - y).abs() <= ctx.zero_eps + rel * x.abs().max(y.abs())
        };
        if !ok {
            return Err(Error::Consistency(format!("recovered measure gives γ_{n} = {a}, input has {b}")));
        }
    }
    Ok(())
}

/// Distinct nonnegative real roots of `h`, exactly when rational and as
/// certified brackets otherwise. The flag is false when some root is irrational.
fn exact_roots<S: Scalar>(h: &Poly<S>) -> Result<(Vec<S>, bool)> {
    let r = h.degree().unwrap_or(0);
    let g = h.gcd(&h.derivative());
    if g.degree().unwrap_or(0) > 0 {
        let bound = g.cauchy_bound();
        let est = real_roots_in(&g, &-bound.clone(), &bound, 1e-15)
            .first()
            .map(|x| format!("{:.12}", x.value().to_f64()))
            .unwrap_or_else(|| "a complex pair".into());
        return Err(Error::NotStieltjesAtomic(format!("repeated root {est} of the characteristic polynomial")));
    }
    let bound = h.cauchy_bound();
    let negative = real_roots_in(h, &-bound.clone(), &S::zero(), 1e-15);
    if let Some(x) = negative.iter().find(|x| x.upper() < S::zero()) {
        return Err(Error::NotStieltjesAtomic(format!("negative root {:.12}", x.value().to_f64())));
    }
    let mut roots: Vec<Root<S>> = Vec::new();
    if h.eval(&S::zero()).is_zero() {
        roots.push(Root::Point(S::zero()));
    }
    roots.extend(real_roots_in(h, &S::zero(), &bound, 1e-40));
    if roots.len() < r {
        let est = complex_root_estimate(h).unwrap_or_default();
        return Err(Error::NotStieltjesAtomic(format!("non-real root {est}")));
    }
    let exact = roots.iter().all(Root::is_point);
    Ok((roots.iter().map(Root::value).collect(), exact))
}

fn companion_eigenvalues<S: Scalar>(h: &Poly<S>) -> Vec<nalgebra::Complex<f64>> {
    let monic: Vec<f64> = h.monic().coeffs().iter().map(Scalar::to_f64).collect();
    let r = monic.len().saturating_sub(1);
    if r == 0 {
        return Vec::new();
    }
    let companion = DMatrix::from_fn(r, r, |i, j| {
        if i == r - 1 {
            -monic[j]
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion.complex_eigenvalues().iter().copied().collect()
}

fn complex_root_estimate<S: Scalar>(h: &Poly<S>) -> Option<String> {
    companion_eigenvalues(h)
        .into_iter()
        .max_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap_or(std::cmp::Ordering::Equal))
        .map(|z| format!("{:.12} {:+.12}i", z.re, z.im))
}

fn float_roots<S: Scalar>(h: &Poly<S>, ctx: &ToleranceContext) -> Result<Vec<S>> {
    let eig = companion_eigenvalues(h);
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let loose = ctx.rel_eps.sqrt() * scale;
    let mut roots = Vec::with_capacity(eig.len());
    for z in &eig {
        if z.im.abs() > loose {
            return Err(Error::NotStieltjesAtomic(format!("non-real root {:.12} {:+.12}i", z.re, z.im)));
        }
        if z.re < -ctx.band(scale) {
            return Err(Error::NotStieltjesAtomic(format!("negative root {:.12}", z.re)));
        }
        roots.push(newton_polish(h, z.re.max(0.0)));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if let Some(w) = roots.windows(2).find(|w| (w[1] - w[0]).abs() <= loose) {
        return Err(Error::NotStieltjesAtomic(format!("repeated root {:.12}", w[0])));
    }
    roots.into_iter().map(|x| S::from_f64(x).ok_or_else(|| Error::Consistency("non-finite root".into()))).collect()
}

fn newton_polish<S: Scalar>(h: &Poly<S>, mut x: f64) -> f64 {
    let c: Vec<f64> = h.coeffs().iter().map(Scalar::to_f64).collect();
    let dc: Vec<f64> = h.derivative().coeffs().iter().map(Scalar::to_f64).collect();
    let eval = |c: &[f64], t: f64| c.iter().rev().fold(0.0, |acc, v| acc * t + v);
    for _ in 0..4 {
        let d = eval(&dc, x);
        if d == 0.0 {
            break;
        }
        let next = x - eval(&c, x) / d;
        if !next.is_finite() || next < 0.0 {
            break;
        }
        x = next;
    }
    x
}

/// Berger's theorem on the horizon: the measure's moments are the shift's
/// moments, and its support lies in `[0, max α_n^2]` (the squared-norm
/// surrogate available from a finite prefix).
pub fn verify_berger<S: Scalar>(alpha: &WeightSequence<S>, mu: &AtomicMeasure<S>, ctx: &ToleranceContext) -> bool {
    let gamma = weights_to_moments(alpha);
    let fitted = moments_of(mu, gamma.horizon());
    let moments_match = fitted.values().iter().zip(gamma.values()).all(|(a, b)| ctx.approx_eq(a, b));
    let support_ok = match (mu.atoms().last(), alpha.max_squared()) {
        (Some(top), Some(norm2)) => ctx.le(top, &norm2),
        (Some(top), None) => ctx.le(top, &S::zero()) || mu.len() == 1,
        _ => true,
    };
    moments_match && support_ok
}

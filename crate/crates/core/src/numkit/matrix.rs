use std::fmt;

use super::{Scalar, ToleranceContext};
use crate::error::{Error, Result};

/// Dense symmetric matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct SymMatrix<S> {
    order: usize,
    entries: Vec<S>,
}

impl<S: Scalar> SymMatrix<S> {
    /// Builds a matrix from `f(i, j)`. Only the upper triangle is evaluated and
    /// mirrored, so the result is symmetric by construction.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut entries = vec![S::zero(); order * order];
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                entries[j * order + i] = v.clone();
                entries[i * order + j] = v;
            }
        }
        Self { order, entries }
    }

    /// Checks squareness and symmetry (exactly, or within the tolerance band).
    pub fn from_rows(rows: Vec<Vec<S>>, ctx: &ToleranceContext) -> Result<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return Err(Error::NotSquare);
        }
        let entries: Vec<S> = rows.into_iter().flatten().collect();
        let m = Self { order, entries };
        m.check_symmetric(ctx)?;
        Ok(m)
    }

    pub fn identity(order: usize) -> Self {
        Self::from_fn(order, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn zeros(order: usize) -> Self {
        Self::from_fn(order, |_, _| S::zero())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.entries[i * self.order + j]
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.entries.chunks(self.order.max(1)).take(self.order).map(|r| r.to_vec()).collect()
    }

    pub fn check_symmetric(&self, ctx: &ToleranceContext) -> Result<()> {
        let scale = self.max_abs();
        for i in 0..self.order {
            for j in i + 1..self.order {
                let d = self.get(i, j).clone() - self.get(j, i).clone();
                if !ctx.is_zero(&d, scale) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Hadamard bound `prod_i ||row_i||_2`, an upper bound for `|det|`.
    pub fn hadamard_bound(&self) -> f64 {
        (0..self.order)
            .map(|i| {
                (0..self.order)
                    .map(|j| self.get(i, j).to_f64().powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .product()
    }

    /// Principal submatrix on the given (sorted) index set.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }

    /// Leading principal submatrix of the given order.
    pub fn leading(&self, order: usize) -> Self {
        Self::from_fn(order, |i, j| self.get(i, j).clone())
    }

    pub fn scaled(&self, t: &S) -> Self {
        self.map(|v| t.clone() * v.clone())
    }

    pub fn map(&self, mut f: impl FnMut(&S) -> S) -> Self {
        Self { order: self.order, entries: self.entries.iter().map(&mut f).collect() }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: &S, other: &Self, b: &S) -> Self {
        debug_assert_eq!(self.order, other.order);
        Self {
            order: self.order,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| a.clone() * x.clone() + b.clone() * y.clone())
                .collect(),
        }
    }

    pub fn to_f64(&self) -> SymMatrix<f64> {
        SymMatrix { order: self.order, entries: self.entries.iter().map(Scalar::to_f64).collect() }
    }
}

impl<S: fmt::Debug> fmt::Debug for SymMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.chunks(self.order.max(1)).take(self.order)).finish()
    }
}

impl<S: Scalar> fmt::Display for SymMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows().iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            write!(f, "{}", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Determinant by single-step fraction-free (Bareiss) elimination.
///
/// Every intermediate pivot is a minor of the input, so in exact mode each
/// division is exact. The float backend uses the same recurrence with
/// partial pivoting.
pub fn det_bareiss<S: Scalar>(m: &SymMatrix<S>) -> S {
    determinant(m.rows())
}

/// Bareiss determinant of an arbitrary square array.
pub fn determinant<S: Scalar>(mut a: Vec<Vec<S>>) -> S {
    let n = a.len();
    if n == 0 {
        return S::one();
    }
    let mut negate = false;
    let mut prev = S::one();
    for k in 0..n - 1 {
        let pivot = if S::EXACT {
            (k..n).find(|&r| !a[r][k].is_zero())
        } else {
            (k..n)
                .max_by(|&x, &y| {
                    a[x][k].abs().partial_cmp(&a[y][k].abs()).unwrap_or(std::cmp::Ordering::Equal)
                })
                .filter(|&r| !a[r][k].is_zero())
        };
        let Some(p) = pivot else {
            return S::zero();
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone())
                    / prev.clone();
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Coefficients `[1, c_1, ..., c_m]` of `det(lambda I + M)`, by Berkowitz's
/// division-free algorithm.
///
/// `c_i` is the sum of the order-`i` principal minors of `M`; `c_m == det(M)`.
pub fn char_poly<S: Scalar>(m: &SymMatrix<S>) -> Vec<S> {
    // Berkowitz computes det(lambda I - A); take A = -M.
    let n = m.order();
    let a = |i: usize, j: usize| -m.get(i, j).clone();
    let mut poly = vec![S::one()];
    for r in 0..n {
        // Leading (r+1)x(r+1) block: [[B, C], [R, a_rr]] with B of order r.
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(S::one());
        toeplitz.push(-a(r, r));
        // col = B^j C, starting from C.
        let mut col: Vec<S> = (0..r).map(|i| a(i, r)).collect();
        for _ in 0..r {
            let rc = (0..r).fold(S::zero(), |acc, i| acc + a(r, i) * col[i].clone());
            toeplitz.push(-rc);
            col = (0..r)
                .map(|i| (0..r).fold(S::zero(), |acc, j| acc + a(i, j) * col[j].clone()))
                .collect();
        }
        let next: Vec<S> = (0..r + 2)
            .map(|i| {
                (0..=i.min(r))
                    .filter(|&j| i - j < toeplitz.len())
                    .fold(S::zero(), |acc, j| acc + toeplitz[i - j].clone() * poly[j].clone())
            })
            .collect();
        poly = next;
    }
    poly
}

/// Solves a square system by Gaussian elimination with pivoting. Returns
/// `None` when the matrix is singular (exactly, or to working precision).
pub fn solve_square<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = a.len();
    for k in 0..n {
        let p = if S::EXACT {
            (k..n).find(|&r| !a[r][k].is_zero())?
        } else {
            let p = (k..n).max_by(|&x, &y| {
                a[x][k].abs().partial_cmp(&a[y][k].abs()).unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[p][k].is_zero() {
                return None;
            }
            p
        };
        a.swap(p, k);
        b.swap(p, k);
        for i in k + 1..n {
            let f = a[i][k].clone() / a[k][k].clone();
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let v = a[i][j].clone() - f.clone() * a[k][j].clone();
                a[i][j] = v;
            }
            let v = b[i].clone() - f * b[k].clone();
            b[i] = v;
        }
    }
    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let s = (i + 1..n).fold(b[i].clone(), |acc, j| acc - a[i][j].clone() * x[j].clone());
        x[i] = s / a[i][i].clone();
    }
    Some(x)
}

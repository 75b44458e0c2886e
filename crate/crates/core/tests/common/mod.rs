//! Seeded generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use hankelshift::hankel::MomentSequence;
use hankelshift::measures::{moments_of, AtomicMeasure};
use hankelshift::numkit::{Rational, Scalar};
use hankelshift::shifts::{weights_to_moments, WeightSequence};
use proptest::test_runner::{Config as ProptestConfig, RngSeed};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fixed-seed property runs, so a failure reproduces on every machine.
pub fn props(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x5EED_CAFE), failure_persistence: None, ..ProptestConfig::default() }
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

pub fn bergman(horizon: usize) -> MomentSequence<Rational> {
    MomentSequence::from_fn(horizon, |n| q(1, n as i64 + 1)).unwrap()
}

pub fn ones(horizon: usize) -> MomentSequence<Rational> {
    MomentSequence::from_fn(horizon, |_| q(1, 1)).unwrap()
}

/// `m` distinct rational atoms `p/d`, `d <= 6`, in `(0, 10]` (or `[0, 10]`
/// with `zero_allowed`), ascending.
pub fn random_atoms(rng: &mut ChaCha8Rng, m: usize, zero_allowed: bool) -> Vec<Rational> {
    let mut atoms: Vec<Rational> = Vec::with_capacity(m);
    while atoms.len() < m {
        let d = rng.gen_range(1..=6);
        let lo = if zero_allowed { 0 } else { 1 };
        let x = q(rng.gen_range(lo..=10 * d), d);
        if !atoms.contains(&x) {
            atoms.push(x);
        }
    }
    atoms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    atoms
}

pub fn random_densities(rng: &mut ChaCha8Rng, m: usize) -> Vec<Rational> {
    (0..m)
        .map(|_| {
            let d = rng.gen_range(1..=8);
            q(rng.gen_range(1..=2 * d), d)
        })
        .collect()
}

pub fn random_measure(rng: &mut ChaCha8Rng, m: usize, zero_allowed: bool) -> AtomicMeasure<Rational> {
    let atoms = random_atoms(rng, m, zero_allowed);
    let densities = random_densities(rng, m);
    AtomicMeasure::new(atoms, densities).unwrap()
}

/// An atom at 0 is allowed only alongside others, so the moments stay positive.
pub fn random_measure_moments(rng: &mut ChaCha8Rng, m: usize, horizon: usize) -> MomentSequence<Rational> {
    let zero_allowed = m >= 2 && rng.gen_bool(0.3);
    moments_of(&random_measure(rng, m, zero_allowed), horizon)
}

/// Squared weights that never decrease: a hyponormal shift, so its moments
/// are 1-positive. About one step in five is flat.
pub fn random_hyponormal(rng: &mut ChaCha8Rng, len: usize) -> WeightSequence<Rational> {
    let mut squared = Vec::with_capacity(len);
    let mut current = q(rng.gen_range(2..=8), 4);
    for _ in 0..len {
        squared.push(current.clone());
        if !rng.gen_bool(0.2) {
            let d = rng.gen_range(2..=12);
            current *= q(1, 1) + q(rng.gen_range(1..=d), 4 * d);
        }
    }
    WeightSequence::from_squared(squared).unwrap()
}

pub fn random_one_positive(rng: &mut ChaCha8Rng, horizon: usize) -> MomentSequence<Rational> {
    weights_to_moments(&random_hyponormal(rng, horizon))
}

/// Flat tail `α_0^2 = u a`, `α_n^2 = a` beyond: subnormal, with
/// `α_0 != α_1` when `u < 1`.
pub fn flat_tail(rng: &mut ChaCha8Rng, len: usize, force_exception: bool) -> WeightSequence<Rational> {
    let a = q(rng.gen_range(1..=12), rng.gen_range(1..=4));
    let u = if force_exception || rng.gen_bool(0.7) { q(rng.gen_range(1..=5), 6) } else { q(1, 1) };
    let mut squared = vec![a.clone(); len];
    squared[0] = u * a;
    WeightSequence::from_squared(squared).unwrap()
}

pub fn random_positive_sequence(rng: &mut ChaCha8Rng, horizon: usize) -> MomentSequence<Rational> {
    MomentSequence::from_fn(horizon, |_| q(rng.gen_range(1..=40), rng.gen_range(1..=9))).unwrap()
}

pub fn pick<T: Clone>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items.choose(rng).unwrap().clone()
}

/// Determinant by Laplace expansion along the first row; an oracle that
/// shares no code with the library's elimination.
pub fn laplace_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return q(1, 1);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = q(0, 1);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rational>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect()).collect();
        let term = m[0][j].clone() * laplace_det(&minor);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Brute-force `I^1` in double precision from the definition: every 2×2
/// perturbed block with anchor `n <= l` must be PSD. Walks from `t = 1` in
/// steps of `step` each way, then refines the crossing by bisection.
pub fn brute_force_i1(gamma: &[f64], l: usize, step: f64) -> (f64, f64) {
    let g = |n: usize, t: f64| if n <= l { gamma[n] } else { t * gamma[n] };
    let ok = |t: f64| {
        (0..=l).all(|n| {
            let (a, b, c) = (g(n, t), g(n + 1, t), g(n + 2, t));
            let scale = (a * c).abs().max(b * b).max(1e-300);
            a >= 0.0 && c >= -1e-14 * c.abs().max(a.abs()) && a * c - b * b >= -1e-13 * scale
        })
    };
    let refine = |mut good: f64, mut bad: f64| {
        for _ in 0..80 {
            let mid = 0.5 * (good + bad);
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let mut lo = 1.0;
    while lo - step >= 0.0 && ok(lo - step) {
        lo -= step;
    }
    let lo = if lo - step < 0.0 { if ok(0.0) { 0.0 } else { refine(lo, 0.0) } } else { refine(lo, lo - step) };
    let mut hi = 1.0;
    while ok(hi + step) && hi < 1e3 {
        hi += step;
    }
    (lo, refine(hi, hi + step))
}

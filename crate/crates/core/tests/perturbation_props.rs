mod common;

use common::*;
use hankelshift::hankel::{block, MomentSequence};
use hankelshift::measures::{moments_of, AtomicMeasure};
use hankelshift::numkit::{is_psd, Interval, Rational, Scalar, ToleranceContext};
use hankelshift::perturbation::{
    cofactor_identity_check, interval_i1, interval_i2, interval_ik, is_interior, perturb_moments, poly_p, poly_q,
    truncated_block, PerturbationSpec,
};
use proptest::prelude::*;
use rand::Rng;

fn ctx() -> ToleranceContext {
    ToleranceContext::default()
}

fn t_value() -> impl Strategy<Value = Rational> {
    (0i64..=40, 1i64..=9).prop_map(|(n, d)| q(n, d))
}

/// Moments of an atomic measure: k-positive for every k.
fn measure_moments(seed: u64, horizon: usize) -> MomentSequence<Rational> {
    let mut r = rng(seed);
    let m = r.gen_range(1..=5);
    random_measure_moments(&mut r, m, horizon)
}

fn lo(i: &Interval<Rational>) -> Rational {
    i.lo().unwrap().clone()
}

fn hi(i: &Interval<Rational>) -> Rational {
    i.hi().unwrap().clone()
}

proptest! {
    #![proptest_config(props(48))]

    #[test]
    fn blocks_beyond_the_cut_scale_by_t(seed in any::<u64>(), l in 1usize..=5, k in 1usize..=3, t in t_value()) {
        let mut r = rng(seed);
        let g = random_positive_sequence(&mut r, l + 1 + 2 * k + 2);
        let p = perturb_moments(&g, &PerturbationSpec::new(l, t.clone()).unwrap()).unwrap();
        for n in l + 1..=p.horizon() - 2 * k {
            prop_assert_eq!(block(&p, n, k).unwrap(), block(&g, n, k).unwrap().scaled(&t));
        }
    }

    #[test]
    fn blocks_up_to_the_cut_are_convex_combinations(seed in any::<u64>(), l in 1usize..=5, k in 1usize..=3, t in t_value()) {
        let mut r = rng(seed);
        let g = random_positive_sequence(&mut r, l + 2 * k + 1);
        let p = perturb_moments(&g, &PerturbationSpec::new(l, t.clone()).unwrap()).unwrap();
        let one_minus = q(1, 1) - t.clone();
        for n in 0..=l {
            let expected = block(&g, n, k).unwrap().combine(&t, &truncated_block(&g, n, k, l).unwrap(), &one_minus);
            prop_assert_eq!(block(&p, n, k).unwrap(), expected);
        }
    }

    #[test]
    fn one_belongs_and_intervals_nest(seed in any::<u64>(), l in 1usize..=4) {
        let g = measure_moments(seed, l + 6);
        let i1 = interval_i1(&g, l, &ctx()).unwrap();
        prop_assert!(i1.contains(&q(1, 1)));
        let mut outer = i1.clone();
        for k in 1..=3 {
            let report = interval_ik(&g, l, k, &ctx()).unwrap();
            prop_assert!(report.contains_one);
            prop_assert!(report.intersection.contains(&q(1, 1)));
            prop_assert!(report.intersection.is_subset_within(&outer, ctx().bisect_eps));
            prop_assert!(report.intersection.is_subset_within(&i1, ctx().bisect_eps));
            outer = report.intersection;
        }
    }

    #[test]
    fn intervals_collapse_at_the_recursion_order(seed in any::<u64>(), l in 1usize..=3) {
        let mut r = rng(seed);
        let m = r.gen_range(1..=3);
        let g = random_measure_moments(&mut r, m, l + 2 * m + 2);
        let mut previous: Option<Rational> = None;
        for k in 1..=m {
            let report = interval_ik(&g, l, k, &ctx()).unwrap();
            let width = report.intersection.width().unwrap();
            if let Some(w) = previous {
                prop_assert!(width.to_f64() <= w.to_f64() + ctx().bisect_eps);
            }
            previous = Some(width);
        }
        prop_assert!(previous.unwrap().to_f64() <= ctx().bisect_eps);
    }

    #[test]
    fn closed_form_i2_matches_bisection(seed in any::<u64>(), l in 1usize..=5) {
        let g = measure_moments(seed, l + 5);
        let closed = interval_i2(&g, l, &ctx()).unwrap();
        let bisected = interval_ik(&g, l, 2, &ctx()).unwrap();
        for (a, b) in [(&closed.lo.value, &bisected.lo.value), (&closed.hi.value, &bisected.hi.value)] {
            prop_assert!((a.to_f64() - b.to_f64()).abs() <= 1e-9 * a.to_f64().abs().max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn interiority_matches_definiteness(seed in any::<u64>(), l in 1usize..=4, k in 1usize..=2) {
        let mut r = rng(seed);
        let g = if r.gen_bool(0.5) {
            let m = r.gen_range(1..=4);
            random_measure_moments(&mut r, m, l + 2 * k + 2)
        } else {
            random_one_positive(&mut r, l + 2 * k + 2)
        };
        if !hankelshift::hankel::is_k_positive(&g, k, &ctx()).unwrap().holds {
            return Ok(());
        }
        let v = is_interior(&g, l, k, &ctx()).unwrap();
        prop_assert!(v.agree);
        prop_assert_eq!(v.interior, v.pd_all);
    }

    #[test]
    fn p_and_q_sign_facts(seed in any::<u64>(), l in 2usize..=5) {
        let g = measure_moments(seed, l + 4);
        let c = |i: usize| g.values()[i].clone();
        let p = poly_p(&g, l).unwrap();
        let qq = poly_q(&g, l).unwrap();
        prop_assert_eq!(p.eval(&q(0, 1)), -c(l).powi(3));
        prop_assert_eq!(qq.eval(&q(0, 1)), -(c(l) * c(l) * c(l + 3)));
        prop_assert!(p.eval(&q(1, 1)) >= q(0, 1));
        prop_assert!(qq.eval(&q(1, 1)) >= q(0, 1));
        prop_assert!(p.eval(&(c(l) * c(l) / (c(l - 2) * c(l + 2)))) <= q(0, 1));
        prop_assert!(p.eval(&(c(l) * c(l + 2) / (c(l + 1) * c(l + 1)))) <= q(0, 1));
    }

    #[test]
    fn anchor_l_determinant_expands_by_cofactor(seed in any::<u64>(), l in 1usize..=4, k in 1usize..=3, t in t_value()) {
        let mut r = rng(seed);
        let g = random_positive_sequence(&mut r, l + 2 * k);
        prop_assert!(cofactor_identity_check(&g, l, k, &t, &ctx()).unwrap());
    }
}

/// A measure whose anchor l-3 constraint is strictly tighter than the
/// four-block formula: the closed form must follow the Schur bound.
#[test]
fn anchor_l3_bound_binds() {
    let atoms = [q(3, 2), q(7, 4), q(33, 5), q(38, 5), q(8, 1)].to_vec();
    let densities = [q(2, 1), q(3, 8), q(1, 7), q(1, 1), q(3, 2)].to_vec();
    let g = moments_of(&AtomicMeasure::new(atoms, densities).unwrap(), 8);
    let l = 3;
    let report = interval_i2(&g, l, &ctx()).unwrap();
    let diag = report.diagnostics.as_ref().unwrap();
    let bound = diag.anchor_l3_bound.clone().unwrap();
    let formula = diag.four_block_formula.clone().unwrap();
    assert!(bound > lo(&formula));
    assert_eq!(report.lo.value, bound);
    assert!(hi(&formula) >= report.hi.value);

    let bisected = interval_ik(&g, l, 2, &ctx()).unwrap();
    assert!((bisected.lo.value.to_f64() - bound.to_f64()).abs() <= 1e-9);

    // Between the formula's left end and the bound, anchor 0 is not PSD.
    let t = (lo(&formula) + bound.clone()) / q(2, 1);
    let perturbed = perturb_moments(&g, &PerturbationSpec::new(l, t).unwrap()).unwrap();
    assert!(!is_psd(&block(&perturbed, l - 3, 2).unwrap(), &ctx()).unwrap());
    assert!(is_psd(&block(&perturbed, l - 2, 2).unwrap(), &ctx()).unwrap());
}

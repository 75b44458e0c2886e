//! The four analyses. Each returns a JSON result, human-readable lines and
//! any warnings or consistency incidents.

use hankelshift::hankel::{
    block, det_sequence, is_k_positive, log_convexity, propagation_report, BlockIndex, MomentSequence,
    PropagationReport,
};
use hankelshift::measures::{detect_recursion, double_positivity, is_finite_mass, recover_atoms, AtomicMeasure};
use hankelshift::numkit::{Interval, Scalar, ToleranceContext};
use hankelshift::perturbation::{
    interval_i1, interval_i2, interval_ik, is_interior, BlockInterval, Endpoint, EndpointMethod, IntervalReport,
};
use hankelshift::shifts::flatness_check;
use hankelshift::Error;
use serde_json::{json, Value};

use crate::input::{Backend, Sequence};

#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
    pub incidents: Vec<String>,
}

impl Outcome {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

pub fn num<S: Scalar>(x: &S) -> Value {
    json!({ "value": x.to_string(), "approx": x.to_f64() })
}

fn block_index(b: Option<BlockIndex>) -> Value {
    b.map_or(Value::Null, |b| json!({ "n": b.n, "k": b.k }))
}

fn interval_json<S: Scalar>(i: &Interval<S>) -> Value {
    match i {
        Interval::Empty => Value::Null,
        Interval::Closed { lo, hi } => json!({ "lo": num(lo), "hi": num(hi) }),
    }
}

fn endpoint_json<S: Scalar>(e: &Endpoint<S>) -> Value {
    let mut v = num(&e.value);
    v["method"] = json!(e.method.to_string());
    if let Some((a, b)) = &e.enclosure {
        v["enclosure"] = json!([num(a), num(b)]);
    }
    if e.at_cap {
        v["at_cap"] = json!(true);
    }
    v
}

fn show<S: Scalar>(x: &S) -> String {
    if S::EXACT {
        let s = x.to_string();
        if s.contains('/') && s.len() > 24 {
            format!("{:.12}", x.to_f64())
        } else if s.contains('/') {
            format!("{s} ({:.12})", x.to_f64())
        } else {
            s
        }
    } else {
        format!("{:.12}", x.to_f64())
    }
}

fn show_endpoint<S: Scalar>(e: &Endpoint<S>) -> String {
    format!("{} [{}]", show(&e.value), e.method)
}

fn propagation_json<S: Scalar>(p: &PropagationReport<S>) -> Value {
    json!({
        "k": p.k,
        "order": p.order,
        "vanishing_found": p.vanishing_found,
        "first_vanishing": p.first_vanishing,
        "conclusion_verified": p.conclusion_verified,
        "violations": p.violations,
        "anchor_zero_nonzero": p.anchor_zero_nonzero,
        "borderline": p.borderline,
        "method": "condensation",
    })
}

fn check_propagation<S: Scalar>(p: &PropagationReport<S>, out: &mut Outcome) {
    if p.violations.is_empty() {
        return;
    }
    let msg = format!(
        "order-{} determinants vanish at anchor {:?} but not at anchors {:?} of a {}-positive sequence",
        p.order, p.first_vanishing, p.violations, p.k
    );
    if S::EXACT {
        out.incidents.push(msg);
    } else {
        out.warnings.push(format!("{msg} (float mode; inspect the tolerances)"));
    }
}

fn horizon_note(gamma_horizon: usize) -> String {
    format!("verdicts cover moments γ_0..γ_{gamma_horizon} only; no claim is made beyond the horizon")
}

pub fn analyze<S: Backend>(seq: &Sequence<S>, k_max: usize, is_shift: bool, ctx: &ToleranceContext) -> Result<Outcome, Error> {
    let g = &seq.gamma;
    let mut out = Outcome::default();
    let property = if is_shift { "hyponormal" } else { "positive" };
    out.line(format!("horizon: N = {}", g.horizon()));
    let mut ladder = Vec::new();
    let mut highest = 0;
    let mut first_fail = None;
    for k in 1..=k_max {
        if 2 * k > g.horizon() {
            out.warnings.push(format!("k = {k} needs moments up to γ_{}; the horizon is {}", 2 * k, g.horizon()));
            break;
        }
        let v = is_k_positive(g, k, ctx)?;
        ladder.push(json!({
            "k": k,
            "holds": v.holds,
            "first_failure": block_index(v.first_failure),
            "borderline": v.borderline.iter().map(|b| json!({ "n": b.n, "k": b.k })).collect::<Vec<_>>(),
            "method": "direct",
        }));
        match v.first_failure {
            None => {
                out.line(format!("{k}-{property}: holds"));
                highest = k;
            }
            Some(b) => {
                out.line(format!("{k}-{property}: fails at block {b}"));
                first_fail.get_or_insert(b);
            }
        }
        if !v.borderline.is_empty() {
            out.warnings.push(format!("k = {k}: {} block verdict(s) decided inside the tolerance band", v.borderline.len()));
        }
    }
    let summary = match first_fail {
        None if highest > 0 => format!("{highest}-{property} up to horizon {} for all tested k <= {highest}", g.horizon()),
        None => "no order could be tested on this horizon".to_string(),
        Some(b) => format!("not {}-{property}: block {b} is not positive semidefinite", b.k),
    };
    out.line(format!("summary: {summary}"));
    let log_convex = log_convexity(g, ctx);
    out.line(format!("log-convex: {log_convex}"));

    let flatness = match &seq.alpha {
        Some(alpha) if highest >= 2 => {
            let f = flatness_check(alpha, 2, ctx)?;
            if f.flat_pair_found {
                out.line(format!(
                    "flatness: α_{} = α_{}; tail constant from α_1: {}{}",
                    f.flat_index.unwrap_or(0),
                    f.flat_index.unwrap_or(0) + 1,
                    f.propagation_verified,
                    if f.alpha0_exception { " (α_0 differs: allowed)" } else { "" }
                ));
                if !f.propagation_verified {
                    let msg = "equal adjacent weights in a 2-hyponormal shift without a constant tail".to_string();
                    if S::EXACT {
                        out.incidents.push(msg);
                    } else {
                        out.warnings.push(msg);
                    }
                }
            } else {
                out.line("flatness: no equal adjacent weights");
            }
            json!({
                "flat_pair_found": f.flat_pair_found,
                "flat_index": f.flat_index,
                "propagation_verified": f.propagation_verified,
                "alpha0_exception": f.alpha0_exception,
            })
        }
        Some(_) => json!({ "skipped": "the shift is not 2-hyponormal on the horizon" }),
        None => json!({ "skipped": "no weights" }),
    };

    let mut propagation = Vec::new();
    for k in 2..=highest {
        let p = propagation_report(g, k, ctx)?;
        if p.vanishing_found {
            out.line(format!(
                "propagation (k = {k}): order-{} determinant vanishes at n = {}; all anchors n >= 1 vanish: {}{}",
                p.order,
                p.first_vanishing.unwrap_or(0),
                p.conclusion_verified,
                if p.anchor_zero_nonzero { " (n = 0 nonzero: allowed)" } else { "" }
            ));
        }
        check_propagation(&p, &mut out);
        propagation.push(propagation_json(&p));
    }
    out.warnings.push(horizon_note(g.horizon()));
    out.result = json!({
        "horizon": g.horizon(),
        "property": format!("k-{property}"),
        "ladder": ladder,
        "summary": summary,
        "log_convex": log_convex,
        "flatness": flatness,
        "propagation": propagation,
    });
    Ok(out)
}

pub fn dets<S: Backend>(seq: &Sequence<S>, k: usize, ctx: &ToleranceContext) -> Result<Outcome, Error> {
    let g = &seq.gamma;
    let mut out = Outcome::default();
    let table = det_sequence(g, k, ctx)?;
    out.line(format!("det [M]^n_{k}, n = 0..{}", table.entries.len().saturating_sub(1)));
    let mut entries = Vec::new();
    for e in &table.entries {
        let scale = block(g, e.n, k)?.hadamard_bound();
        let zero = ctx.is_zero(&e.value, scale);
        out.line(format!("  n = {:>2}: {} [{}]{}", e.n, show(&e.value), e.method, if zero && !S::EXACT { " (zero)" } else { "" }));
        let mut v = num(&e.value);
        v["n"] = json!(e.n);
        v["method"] = json!(e.method.to_string());
        v["zero"] = json!(zero);
        entries.push(v);
    }
    let propagation = if g.horizon() >= 2 * (k + 1) && is_k_positive(g, k + 1, ctx)?.holds {
        let p = propagation_report(g, k + 1, ctx)?;
        if p.vanishing_found {
            out.line(format!(
                "propagation: the sequence is {}-positive and a determinant vanishes, so every anchor n >= 1 must vanish: {}",
                k + 1,
                p.conclusion_verified
            ));
        }
        check_propagation(&p, &mut out);
        propagation_json(&p)
    } else {
        json!({ "skipped": format!("the sequence is not {}-positive on the horizon", k + 1) })
    };
    out.result = json!({ "horizon": g.horizon(), "k": k, "entries": entries, "propagation": propagation });
    Ok(out)
}

fn measure_json<S: Scalar>(mu: &AtomicMeasure<S>) -> Value {
    let method = if mu.is_exact() { "direct" } else { "bisection" };
    let atoms: Vec<Value> = mu
        .atoms()
        .iter()
        .map(|a| {
            let mut v = num(a);
            v["method"] = json!(method);
            v
        })
        .collect();
    let densities: Vec<Value> = mu
        .densities()
        .iter()
        .map(|d| {
            let mut v = num(d);
            v["method"] = json!("direct");
            v
        })
        .collect();
    json!({ "atoms": atoms, "densities": densities, "exact": mu.is_exact() })
}

pub fn recursion<S: Backend>(seq: &Sequence<S>, max_order: Option<usize>, ctx: &ToleranceContext) -> Result<Outcome, Error> {
    let g = &seq.gamma;
    let mut out = Outcome::default();
    let r_max = max_order.unwrap_or(g.horizon() / 2);
    let screen = double_positivity(g, ctx)?;
    let rec = detect_recursion(g, r_max, ctx)?;
    let mut measure = Value::Null;
    let recursion = match &rec {
        Some(rec) => {
            let coeffs: Vec<String> = rec.coeffs.iter().map(|a| show(a)).collect();
            out.line(format!("recursion of order {}: γ_(n+{}) = Σ a_j γ_(n+j), a = [{}]", rec.order(), rec.order(), coeffs.join(", ")));
            match recover_atoms(rec, g, ctx) {
                Ok(mu) => {
                    let atoms: Vec<String> = mu.atoms().iter().map(|a| show(a)).collect();
                    let dens: Vec<String> = mu.densities().iter().map(|d| show(d)).collect();
                    out.line(format!("atoms: {}", atoms.join(", ")));
                    out.line(format!("densities: {}", dens.join(", ")));
                    if S::EXACT && !mu.is_exact() {
                        out.warnings.push("some atoms are irrational; they are reported as certified enclosure midpoints".into());
                    }
                    measure = measure_json(&mu);
                    if let Some(input) = &seq.measure {
                        let same = input.atoms() == mu.atoms() && input.densities() == mu.densities();
                        measure["matches_input"] = json!(same);
                        if S::EXACT && mu.is_exact() && !same {
                            out.incidents.push("recovered measure differs from the input measure".into());
                        }
                    }
                }
                Err(e @ (Error::NotStieltjesAtomic(_) | Error::DensitiesNotPositive { .. })) => {
                    out.line(format!("no positive atomic measure on [0, ∞): {e}"));
                    measure = json!({ "rejected": e.to_string() });
                }
                Err(e) => return Err(e),
            }
            json!({
                "order": rec.order(),
                "coefficients": rec.coeffs.iter().map(num).collect::<Vec<_>>(),
                "valid_from": rec.valid_from,
                "residual": rec.residual,
                "method": "direct",
            })
        }
        None => {
            out.line(format!("no recursion of order <= {r_max} on horizon {}", g.horizon()));
            Value::Null
        }
    };
    let finite = match screen {
        Some(b) => {
            out.line(format!("not a Stieltjes moment sequence on the horizon: block {b} fails the double positivity screen"));
            json!({ "screen_failure": block_index(Some(b)) })
        }
        None => {
            let v = is_finite_mass(g, ctx)?;
            match v.witness {
                Some(b) => out.line(format!("finite mass: vanishing determinant at block {b}")),
                None => out.line(format!("not finite-mass on horizon {}", g.horizon())),
            }
            if v.borderline {
                out.warnings.push("the finite-mass witness was declared zero by the tolerance band".into());
            }
            json!({ "finite": v.finite, "witness": block_index(v.witness), "borderline": v.borderline, "method": "condensation" })
        }
    };
    out.warnings.push(horizon_note(g.horizon()));
    out.result = json!({
        "horizon": g.horizon(),
        "max_order": r_max,
        "recursion": recursion,
        "measure": measure,
        "finite_mass": finite,
    });
    Ok(out)
}

fn per_block_json<S: Scalar>(b: &BlockInterval<S>) -> Value {
    json!({
        "n": b.n,
        "lo": endpoint_json(&b.lo),
        "hi": endpoint_json(&b.hi),
        "t_invariant": b.t_invariant,
        "degenerate": b.degenerate,
    })
}

fn report_json<S: Scalar>(r: &IntervalReport<S>) -> Value {
    json!({
        "k": r.k,
        "l": r.l,
        "interval": interval_json(&r.intersection),
        "lo": endpoint_json(&r.lo),
        "hi": endpoint_json(&r.hi),
        "lo_block": r.lo_block,
        "hi_block": r.hi_block,
        "contains_one": r.contains_one,
        "one_interior": r.one_interior,
        "interior_borderline": r.interior_borderline,
        "zero_admitted": r.zero_admitted,
        "per_block": r.per_block.iter().map(per_block_json).collect::<Vec<_>>(),
    })
}

fn endpoint_gap<S: Scalar>(a: &Endpoint<S>, b: &Endpoint<S>) -> f64 {
    let (x, y) = (a.value.to_f64(), b.value.to_f64());
    (x - y).abs() / x.abs().max(1.0)
}

pub fn perturb<S: Backend>(
    seq: &Sequence<S>,
    l: usize,
    k: usize,
    closed_form: bool,
    ctx: &ToleranceContext,
) -> Result<Outcome, Error> {
    let g: &MomentSequence<S> = &seq.gamma;
    let mut out = Outcome::default();
    let bisected = interval_ik(g, l, k, ctx)?;
    let mut closed = None;
    if closed_form {
        match k {
            1 => {
                let i1 = interval_i1(g, l, ctx)?;
                let (lo, hi) = (i1.lo().cloned(), i1.hi().cloned());
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    let mut r = bisected.clone();
                    r.lo = Endpoint { value: lo, enclosure: None, method: EndpointMethod::ClosedForm, at_cap: false };
                    r.hi = Endpoint { value: hi, enclosure: None, method: EndpointMethod::ClosedForm, at_cap: false };
                    r.intersection = i1;
                    r.per_block.clear();
                    closed = Some(r);
                }
            }
            2 => closed = Some(interval_i2(g, l, ctx)?),
            _ => out.warnings.push(format!("no closed form for k = {k}; endpoints come from bisection")),
        }
    }
    let primary = closed.as_ref().unwrap_or(&bisected);
    out.line(format!("I^{k} for l = {l}: [{}, {}]", show_endpoint(&primary.lo), show_endpoint(&primary.hi)));
    let mut cross = Value::Null;
    if let Some(c) = &closed {
        let tol = if S::EXACT { 1e-9 } else { 1e-6 };
        let gap = endpoint_gap(&c.lo, &bisected.lo).max(endpoint_gap(&c.hi, &bisected.hi));
        out.line(format!(
            "bisection cross-check: [{}, {}], max relative gap {gap:.2e}",
            show(&bisected.lo.value),
            show(&bisected.hi.value)
        ));
        if gap > tol {
            out.incidents.push(format!("closed-form and bisection endpoints differ by {gap:.3e} (> {tol:.0e})"));
        }
        cross = json!({ "lo": endpoint_json(&bisected.lo), "hi": endpoint_json(&bisected.hi), "max_gap": gap, "tolerance": tol });
    }
    let verdict = is_interior(g, l, k, ctx)?;
    out.line(format!(
        "1 in I^{k}: {}; interior: {}; t-dependent blocks positive definite: {}",
        primary.contains_one, verdict.interior, verdict.pd_all
    ));
    if !verdict.agree {
        out.incidents.push(format!(
            "interiority disagreement: interval says {}, definiteness says {}",
            verdict.interior, verdict.pd_all
        ));
    }
    if verdict.borderline {
        out.warnings.push("interiority was decided inside the tolerance margin".into());
    }
    for note in primary.notes.iter().chain(&verdict.notes) {
        if !out.warnings.contains(note) {
            out.warnings.push(note.clone());
        }
    }
    let mut result = report_json(primary);
    result["route"] = json!(if closed.is_some() { "closed_form" } else { "bisection" });
    result["cross_check"] = cross;
    result["interior"] = json!({
        "interior": verdict.interior,
        "pd_all": verdict.pd_all,
        "failing_block": verdict.failing_block,
        "pd_all_anchors": verdict.pd_all_anchors,
        "t_invariant_anchors": verdict.t_invariant_anchors,
        "agree": verdict.agree,
        "borderline": verdict.borderline,
    });
    if let Some(d) = closed.as_ref().and_then(|c| c.diagnostics.as_ref()) {
        result["diagnostics"] = json!({
            "p": d.p.as_ref().map(|p| p.to_string()),
            "q": d.q.to_string(),
            "matrix4_bound": d.matrix4_bound.as_ref().map(num),
            "anchor_l3_bound": d.anchor_l3_bound.as_ref().map(num),
            "four_block_formula": d.four_block_formula.as_ref().map(interval_json),
            "p_at_0": d.p_at_0.as_ref().map(num),
            "p_at_1": d.p_at_1.as_ref().map(num),
            "q_at_0": num(&d.q_at_0),
            "q_at_1": num(&d.q_at_1),
            "p_at_ratios": d.p_at_ratios.as_ref().map(|(a, b)| json!([num(a), num(b)])),
            "discriminant_inequality": d.discriminant_inequality,
        });
        if let Some(p) = &d.p {
            out.line(format!("P(t) = {p}"));
        }
        out.line(format!("Q(t) = {}", d.q));
    }
    out.result = result;
    Ok(out)
}

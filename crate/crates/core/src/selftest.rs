//! The invariant suite behind `ss-skeleton selftest`: every property is
//! re-checked on seeded random inputs and failures are collected, not raised.

use std::cmp::Ordering;

use rand::Rng;
use serde::Serialize;

use crate::covering_engine::{build_covering, certify, verify_covering, NodeKind};
use crate::monomial_algebra::{
    dominates_criterion, divides_witness, factor_generic_unit, is_unit_r, is_unit_r_eta,
    SpecialPoly,
};
use crate::pl_engine::{check_product_power_property, pl_geq, PlComparison, PlFunction, PlTerm, Skeleton};
use crate::random;
use crate::rational::q;
use crate::value_group::{in_r_power_class, Value};

const MAX_DEN: i64 = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestItem {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// The first failing input, rendered.
    pub example: Option<String>,
}

impl SelftestItem {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub items: Vec<SelftestItem>,
    pub passed: bool,
}

struct Tally {
    item: SelftestItem,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            item: SelftestItem {
                name,
                trials: 0,
                failures: 0,
                example: None,
            },
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.item.trials += 1;
        if !ok {
            self.item.failures += 1;
            if self.item.example.is_none() {
                self.item.example = Some(describe());
            }
        }
    }
}

/// Runs every invariant `trials` times (the grid sweep runs in full).
pub fn run(seed: u64, trials: usize) -> SelftestReport {
    let mut g = random::rng(seed);
    let items = vec![
        value_order(&mut g, trials),
        power_class_grid(),
        domination_equivalence(&mut g, trials),
        unit_coherence(&mut g, trials),
        multiplicativity(&mut g, trials),
        power_products(&mut g, trials),
        covering_soundness(&mut g, trials),
    ];
    let passed = items.iter().all(SelftestItem::passed);
    SelftestReport { seed, items, passed }
}

fn value_order<R: Rng>(g: &mut R, trials: usize) -> SelftestItem {
    let mut t = Tally::new("value order agrees with float estimates");
    for _ in 0..trials {
        let (v, w) = (random::value(g, MAX_DEN), random::value(g, MAX_DEN));
        let (x, y) = (v.ln_f64(), w.ln_f64());
        let exact = v.cmp(&w);
        // generous bound on the float error of a short sum of logs
        let tolerance = 1e-9 * (1.0 + x.abs() + y.abs());
        if (x - y).abs() > tolerance {
            let float = x.partial_cmp(&y).unwrap_or(Ordering::Equal);
            t.record(exact == float, || format!("{v} vs {w}"));
        }
        let x3 = random::value(g, MAX_DEN);
        t.record((&v * &x3).cmp(&(&w * &x3)) == exact, || format!("{v} * {x3}"));
    }
    t.item
}

fn power_class_grid() -> SelftestItem {
    let mut t = Tally::new("in_r_power_class on r^q grids");
    let radii = ["1/2", "2/3", "2^(1/2)*3^(-1)", "1/5"];
    for r in radii {
        let r: Value = r.parse().expect("grid radius");
        for d in 1..=12 {
            for k in -2 * d..=2 * d {
                let e = q(k, d);
                let v = r.log().expect("nonzero").scale(&e).exp();
                let got = in_r_power_class(&v, &r);
                t.record(got == Ok(Some(e.clone())), || format!("r = {r}, q = {k}/{d}"));
            }
        }
    }
    t.item
}

fn domination_equivalence<R: Rng>(g: &mut R, trials: usize) -> SelftestItem {
    let mut t = Tally::new("domination: witness, criterion and vertex comparison agree");
    for _ in 0..trials {
        let model = random::model(g, 3, 3, MAX_DEN);
        let sk = Skeleton::new(&model);
        let a = random::special_monomial(g, &model, MAX_DEN);
        let b = random::special_monomial(g, &model, MAX_DEN);
        let witness = divides_witness(&model, &a, &b).is_some();
        let criterion = dominates_criterion(&model, &a, &b);
        let pl = |m: &crate::monomial_algebra::SpecialMonomial| {
            PlFunction::new(
                &sk,
                [PlTerm {
                    c: m.valuation(),
                    n: m.n().to_vec(),
                }],
            )
            .expect("single term")
        };
        let vertex = pl_geq(&pl(&a), &pl(&b), &sk) == PlComparison::Holds;
        t.record(witness == criterion && criterion == vertex, || {
            format!("{a} vs {b} over {model:?}")
        });
    }
    t.item
}

fn unit_coherence<R: Rng>(g: &mut R, trials: usize) -> SelftestItem {
    let mut t = Tally::new("unit predicates, evaluation and factorization agree");
    for _ in 0..trials {
        let model = random::model(g, 3, 3, MAX_DEN);
        let sk = Skeleton::new(&model);
        let a = random::special_poly(g, &model, 6, MAX_DEN);
        let unit = is_unit_r(&a);
        let constant_one = a.constant_term().is_some_and(|c| c.valuation().is_one());
        let mut points = sk.vertices();
        points.extend((0..20).map(|_| sk.interior_point(g, 12)));
        let eval_one = points
            .iter()
            .all(|p| a.eval(p).map(|v| v.is_one()).unwrap_or(false));
        t.record(unit == constant_one && unit == eval_one, || format!("units of {a}"));
        let factored = factor_generic_unit(&a)
            .and_then(|f| Ok((f.recompose()? == a, is_unit_r(&f.u))))
            .is_ok_and(|(same, u_unit)| same && u_unit);
        t.record(is_unit_r_eta(&a) == factored, || format!("factor {a}"));
    }
    t.item
}

fn multiplicativity<R: Rng>(g: &mut R, trials: usize) -> SelftestItem {
    let mut t = Tally::new("|ab|_r = |a|_r |b|_r");
    for _ in 0..trials {
        let model = random::model(g, 3, 3, MAX_DEN);
        let sk = Skeleton::new(&model);
        let a = random::special_poly(g, &model, 4, MAX_DEN);
        let b = random::special_poly(g, &model, 4, MAX_DEN);
        let ab: SpecialPoly = &a * &b;
        for _ in 0..3 {
            let p = sk.interior_point(g, 12);
            let ok = match (ab.eval(&p), a.eval(&p), b.eval(&p)) {
                (Ok(x), Ok(y), Ok(z)) => x == &y * &z,
                _ => false,
            };
            t.record(ok, || format!("({a}) * ({b})"));
        }
    }
    t.item
}

fn power_products<R: Rng>(g: &mut R, trials: usize) -> SelftestItem {
    let mut t = Tally::new("power(fg) iff power(f) and power(g)");
    for _ in 0..trials {
        let model = random::model(g, 3, 2, MAX_DEN);
        let sk = Skeleton::new(&model);
        let a = random::special_poly(g, &model, 4, MAX_DEN);
        let b = random::special_poly(g, &model, 4, MAX_DEN);
        let ok = match (PlFunction::from_poly(&a), PlFunction::from_poly(&b)) {
            (Ok(f), Ok(h)) => check_product_power_property(&f, &h, &sk),
            _ => false,
        };
        t.record(ok, || format!("{a} and {b}"));
    }
    t.item
}

fn covering_soundness<R: Rng>(g: &mut R, trials: usize) -> SelftestItem {
    let mut t = Tally::new("random coverings verify, with strict split inequalities");
    for _ in 0..trials.div_ceil(4) {
        let model = random::annuli_model(g, MAX_DEN);
        let outcome = build_covering(&model).and_then(|tree| {
            let strict = tree.splits().iter().all(|node| {
                let info = node.split.as_ref().expect("split");
                let k = if node.kind == NodeKind::BaseSplit {
                    model.m() as i64 + 1
                } else {
                    2
                };
                info.lambda.s.powi(k).is_ok_and(|p| p > info.target)
            });
            let cert = certify(&tree)?;
            Ok(strict && verify_covering(&cert)?.valid)
        });
        t.record(outcome == Ok(true), || format!("{model:?}: {outcome:?}"));
    }
    t.item
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let report = run(1, 40);
        for item in &report.items {
            assert!(item.passed(), "{item:?}");
            assert!(item.trials > 0);
        }
        assert!(report.passed);
    }
}

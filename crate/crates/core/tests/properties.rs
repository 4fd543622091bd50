use proptest::prelude::*;

use ss_skeleton::covering_engine::{
    build_covering, certify, triangulate_leaf, verify_covering, NodeKind,
};
use ss_skeleton::monomial_algebra::{
    divides_witness, dominates_criterion, factor_generic_unit, is_unit_r, is_unit_r_eta,
    to_special, Coefficient, RawPoly, SpecialPoly,
};
use ss_skeleton::pl_engine::{check_product_power_property, pl_geq, PlComparison, PlFunction, PlTerm, Skeleton};
use ss_skeleton::random;
use ss_skeleton::rational::{q, Rational};
use ss_skeleton::{in_r_power_class, Value};

const DEN: i64 = 6;

fn pl_of(sk: &Skeleton, m: &ss_skeleton::monomial_algebra::SpecialMonomial) -> PlFunction {
    PlFunction::new(sk, [PlTerm { c: m.valuation(), n: m.n().to_vec() }]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn order_is_total_and_translation_invariant(seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let (a, b, c) = (random::value(&mut g, DEN), random::value(&mut g, DEN), random::value(&mut g, DEN));
        prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
        if a <= b && b <= c {
            prop_assert!(a <= c);
        }
        prop_assert_eq!((&a * &c).cmp(&(&b * &c)), a.cmp(&b));
        let (x, y) = (a.ln_f64(), b.ln_f64());
        if (x - y).abs() > 1e-9 * (1.0 + x.abs() + y.abs()) {
            prop_assert_eq!(a.cmp(&b), x.partial_cmp(&y).unwrap());
        }
    }

    #[test]
    fn log_is_a_homomorphism(seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let (a, b) = (random::value(&mut g, DEN), random::value(&mut g, DEN));
        let lhs = (&a * &b).log().unwrap();
        let rhs = &a.log().unwrap() + &b.log().unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn power_class_recovers_exponents(k in -40i64..=40, d in 1i64..=12, seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let r = random::value_at_most_one(&mut g, DEN);
        prop_assume!(!r.is_one());
        let e = q(k, d);
        let v = r.log().unwrap().scale(&e).exp();
        prop_assert_eq!(in_r_power_class(&v, &r).unwrap(), Some(e));
    }

    #[test]
    fn domination_three_ways(seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let model = random::model(&mut g, 3, 3, DEN);
        let sk = Skeleton::new(&model);
        let a = random::special_monomial(&mut g, &model, DEN);
        let b = random::special_monomial(&mut g, &model, DEN);
        let criterion = dominates_criterion(&model, &a, &b);
        let witness = divides_witness(&model, &a, &b);
        let vertex = pl_geq(&pl_of(&sk, &a), &pl_of(&sk, &b), &sk);
        prop_assert_eq!(criterion, witness.is_some());
        prop_assert_eq!(criterion, vertex == PlComparison::Holds);
        if let Some(w) = witness {
            let product = &SpecialPoly::from_monomial(&model, a.clone()) * &SpecialPoly::from_monomial(&model, w);
            prop_assert_eq!(product, SpecialPoly::from_monomial(&model, b.clone()));
        }
        if let PlComparison::Refuted { point } = vertex {
            let lhs = SpecialPoly::from_monomial(&model, a).eval(&point).unwrap();
            let rhs = SpecialPoly::from_monomial(&model, b).eval(&point).unwrap();
            prop_assert!(lhs < rhs);
        }
    }

    #[test]
    fn unit_predicates_agree(seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let model = random::model(&mut g, 3, 3, DEN);
        let sk = Skeleton::new(&model);
        let a = random::special_poly(&mut g, &model, 6, DEN);
        let unit = is_unit_r(&a);
        let constant_one = a.constant_term().is_some_and(|c| c.valuation().is_one());
        prop_assert_eq!(unit, constant_one);
        let mut points = sk.vertices();
        points.extend((0..20).map(|_| sk.interior_point(&mut g, 12)));
        let eval_one = points.iter().all(|p| a.eval(p).unwrap().is_one());
        prop_assert_eq!(unit, eval_one);
        match factor_generic_unit(&a) {
            Ok(f) => {
                prop_assert!(is_unit_r_eta(&a));
                prop_assert!(is_unit_r(&f.u));
                prop_assert_eq!(f.recompose().unwrap(), a);
            }
            Err(e) => prop_assert!(!is_unit_r_eta(&a), "{a}: {e}"),
        }
    }

    #[test]
    fn generated_generic_units_factor(seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let model = random::model(&mut g, 3, 3, DEN);
        let a = random::generic_unit(&mut g, &model, 5, DEN);
        prop_assert!(is_unit_r_eta(&a));
        let f = factor_generic_unit(&a).unwrap();
        prop_assert_eq!(f.n.len(), model.m() + 1);
        prop_assert_eq!(f.recompose().unwrap(), a);
    }

    #[test]
    fn evaluation_is_multiplicative(seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let model = random::model(&mut g, 3, 3, DEN);
        let sk = Skeleton::new(&model);
        let a = random::special_poly(&mut g, &model, 4, DEN);
        let b = random::special_poly(&mut g, &model, 4, DEN);
        let ab = &a * &b;
        for _ in 0..5 {
            let p = sk.interior_point(&mut g, 12);
            prop_assert_eq!(ab.eval(&p).unwrap(), &a.eval(&p).unwrap() * &b.eval(&p).unwrap());
        }
        for p in sk.vertices() {
            prop_assert_eq!(ab.eval(&p).unwrap(), &a.eval(&p).unwrap() * &b.eval(&p).unwrap());
        }
    }

    #[test]
    fn power_functions_multiply(seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let model = random::model(&mut g, 3, 2, DEN);
        let sk = Skeleton::new(&model);
        let f = PlFunction::from_poly(&random::special_poly(&mut g, &model, 4, DEN)).unwrap();
        let h = PlFunction::from_poly(&random::special_poly(&mut g, &model, 4, DEN)).unwrap();
        prop_assert!(check_product_power_property(&f, &h, &sk));
    }

    #[test]
    fn to_special_respects_products(seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let model = random::model(&mut g, 3, 3, DEN);
        let raw = |g: &mut rand_chacha::ChaCha8Rng| {
            let count = rand::Rng::gen_range(g, 1..=3);
            RawPoly::from_terms((0..count).map(|_| {
                let n: Vec<i64> = (0..=model.l()).map(|_| rand::Rng::gen_range(g, 0..=2)).collect();
                (n, Coefficient::from_value(random::value_at_most_one(g, DEN)))
            }))
        };
        let (a, b) = (raw(&mut g), raw(&mut g));
        let sa = to_special(&a, &model).unwrap();
        let sb = to_special(&b, &model).unwrap();
        prop_assert_eq!(to_special(&a.mul(&b), &model).unwrap(), &sa * &sb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_coverings_certify(seed in any::<u64>()) {
        let mut g = random::rng(seed);
        let model = random::annuli_model(&mut g, DEN);
        let tree = build_covering(&model).unwrap();
        for node in tree.splits() {
            let info = node.split.as_ref().unwrap();
            let k = if node.kind == NodeKind::BaseSplit { model.m() as i64 + 1 } else { 2 };
            prop_assert!(info.lambda.s.powi(k).unwrap() > info.target);
            prop_assert!(info.lambda.s < Value::one());
        }
        prop_assert!(tree.root.depth() <= 2);
        for leaf in tree.leaves() {
            prop_assert_eq!(leaf.kind, NodeKind::ToricLeaf);
            prop_assert!(in_r_power_class(&leaf.constants.base, model.r()).unwrap().is_some());
            prop_assert!(in_r_power_class(&leaf.constants.fiber, model.r()).unwrap().is_some());
        }
        let cert = certify(&tree).unwrap();
        let report = verify_covering(&cert).unwrap();
        prop_assert!(report.valid, "{report}");
        let json = serde_json::to_string(&cert).unwrap();
        let back: ss_skeleton::covering_engine::CoveringCertificate = serde_json::from_str(&json).unwrap();
        prop_assert!(verify_covering(&back).unwrap().valid);
        prop_assert_eq!(back, cert);
    }

    #[test]
    fn rectangle_triangulations_are_unimodular(an in 1i64..=8, ad in 1i64..=4, bn in 1i64..=8, bd in 1i64..=4) {
        let (a, b) = (q(an, ad), q(bn, bd));
        let triangles = triangulate_leaf(&a, &b).unwrap();
        let area = triangles.iter().fold(Rational::from_integer(0.into()), |acc, t| acc + t.area());
        prop_assert_eq!(area, &a * &b);
        prop_assert!(triangles.iter().all(|t| t.is_unimodular()));
        let scale = triangles[0].scale as i64;
        let cells = (&a * &b * Rational::from_integer((2 * scale * scale).into())).to_integer();
        prop_assert_eq!(Rational::from_integer(triangles.len().into()), Rational::from_integer(cells));
    }
}

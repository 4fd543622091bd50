//! Seeded generators for property tests, the self-test and the acceptance suite.
//!
//! Values are supported on the primes 2, 3, 5 with exponent denominators up
//! to a chosen bound, so every generated object stays inside the exact model.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covering_engine::AnnuliModel;
use crate::monomial_algebra::{Coefficient, ModelAlgebra, SpecialMonomial, SpecialPoly};
use crate::rational::{q, Rational};
use crate::value_group::Value;

pub const PRIMES: [u64; 3] = [2, 3, 5];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k/d` with `1 ≤ d ≤ max_den` and `|k/d| ≤ bound`.
pub fn exponent<R: Rng>(rng: &mut R, max_den: i64, bound: i64) -> Rational {
    let d = rng.gen_range(1..=max_den.max(1));
    q(rng.gen_range(-bound * d..=bound * d), d)
}

/// A nonzero value `∏ p^{e_p}` over [`PRIMES`] with `|e_p| ≤ 3`.
pub fn value<R: Rng>(rng: &mut R, max_den: i64) -> Value {
    let mut factors: Vec<(u64, Rational)> = Vec::new();
    for p in PRIMES {
        if rng.gen_bool(0.7) {
            factors.push((p, exponent(rng, max_den, 3)));
        }
    }
    Value::from_factors(factors).expect("small primes, bounded denominators")
}

/// A value in `(0, 1]`.
pub fn value_at_most_one<R: Rng>(rng: &mut R, max_den: i64) -> Value {
    let v = value(rng, max_den);
    if v > Value::one() {
        v.inv().expect("nonzero")
    } else {
        v
    }
}

/// A value in the closed range `[lo, hi]`, by rejection, falling back to `hi`.
pub fn value_in<R: Rng>(rng: &mut R, lo: &Value, hi: &Value, max_den: i64) -> Value {
    for _ in 0..256 {
        let v = value(rng, max_den);
        if v >= *lo && v <= *hi {
            return v;
        }
    }
    hi.clone()
}

/// A model algebra with `m ≤ l ≤ max_l`, `m ≤ max_m`, and `π < 1` when `m ≥ 1`.
pub fn model<R: Rng>(rng: &mut R, max_l: usize, max_m: usize, max_den: i64) -> ModelAlgebra {
    let m = rng.gen_range(0..=max_m.min(max_l));
    let l = rng.gen_range(m.max(1)..=max_l.max(1));
    let lo = Value::from_ratio(1, 30).expect("1/30");
    let hi = Value::from_ratio(9, 10).expect("9/10");
    let pi = if m == 0 && rng.gen_bool(0.2) {
        Value::one()
    } else {
        value_in(rng, &lo, &hi, max_den)
    };
    ModelAlgebra::new(l, m, pi).expect("valid model")
}

fn exponent_vector<R: Rng>(rng: &mut R, model: &ModelAlgebra, spread: i64) -> Vec<i64> {
    let m = model.m();
    (0..model.l())
        .map(|i| {
            if i < m {
                rng.gen_range(-spread..=spread)
            } else {
                rng.gen_range(0..=spread)
            }
        })
        .collect()
}

/// A valuation `≤ bound`: often exactly the bound or a power of `π` below it,
/// so that comparisons regularly land on equality.
fn valuation_below<R: Rng>(rng: &mut R, model: &ModelAlgebra, bound: &Value, max_den: i64) -> Value {
    let scale = match rng.gen_range(0..4) {
        0 => Value::one(),
        1 if !model.pi().is_one() => model.pi().powi(rng.gen_range(1..=2)).expect("nonzero"),
        _ => value_at_most_one(rng, max_den),
    };
    bound * &scale
}

/// A special monomial with a single-term coefficient.
pub fn special_monomial<R: Rng>(rng: &mut R, model: &ModelAlgebra, max_den: i64) -> SpecialMonomial {
    let n = exponent_vector(rng, model, 2);
    let bound = model.special_bound(&n);
    let gamma = valuation_below(rng, model, &bound, max_den);
    SpecialMonomial::new(model, n, Coefficient::from_value(gamma)).expect("special by construction")
}

/// A nonzero special polynomial with up to `max_terms` single-term coefficients.
///
/// A third of the draws get a unit constant term and a third are of the form
/// `a_d t^d · u` with `d ∈ Z^m × {0}` and `u` an `R`-unit.
pub fn special_poly<R: Rng>(rng: &mut R, model: &ModelAlgebra, max_terms: usize, max_den: i64) -> SpecialPoly {
    match rng.gen_range(0..3) {
        0 => generic_unit(rng, model, max_terms, max_den),
        kind => {
            let count = rng.gen_range(1..=max_terms.max(1));
            let mut monomials: Vec<SpecialMonomial> =
                (0..count).map(|_| special_monomial(rng, model, max_den)).collect();
            if kind == 1 {
                monomials[0] = SpecialMonomial::new(model, vec![0; model.l()], Coefficient::one())
                    .expect("constant");
            }
            poly_from(model, monomials)
        }
    }
}

fn poly_from(model: &ModelAlgebra, monomials: Vec<SpecialMonomial>) -> SpecialPoly {
    // repeated exponents are dropped so every coefficient stays single-term
    let mut out = SpecialPoly::zero(model);
    for mono in monomials {
        if out.coefficient(mono.n()).is_none() {
            out = &out + &SpecialPoly::from_monomial(model, mono);
        }
    }
    out
}

/// An `R`-unit with up to `max_terms` terms.
pub fn r_unit<R: Rng>(rng: &mut R, model: &ModelAlgebra, max_terms: usize, max_den: i64) -> SpecialPoly {
    let count = rng.gen_range(0..max_terms.max(1));
    let mut monomials = vec![SpecialMonomial::new(model, vec![0; model.l()], Coefficient::one())
        .expect("constant")];
    for _ in 0..count {
        let mono = special_monomial(rng, model, max_den);
        if mono.n().iter().any(|&e| e != 0) {
            monomials.push(mono);
        }
    }
    poly_from(model, monomials)
}

/// `a_d t^d · u` with `d ∈ Z^m × {0}`, `a_d` special at `d` and `u ∈ R^×`.
pub fn generic_unit<R: Rng>(rng: &mut R, model: &ModelAlgebra, max_terms: usize, max_den: i64) -> SpecialPoly {
    let m = model.m();
    let mut d = exponent_vector(rng, model, 2);
    for e in &mut d[m..] {
        *e = 0;
    }
    let bound = model.special_bound(&d);
    let gamma = valuation_below(rng, model, &bound, max_den);
    let lead = SpecialMonomial::new(model, d, Coefficient::from_value(gamma)).expect("special");
    let u = r_unit(rng, model, max_terms.saturating_sub(1).max(1), max_den);
    &SpecialPoly::from_monomial(model, lead) * &u
}

/// A random annuli model with `m ≤ 1`, radii bounded away from 1 so that the
/// λ intervals stay comfortably wide.
pub fn annuli_model<R: Rng>(rng: &mut R, max_den: i64) -> AnnuliModel {
    let r_lo = Value::from_ratio(1, 8).expect("1/8");
    let r_hi = Value::from_ratio(1, 2).expect("1/2");
    let lo = Value::from_ratio(1, 40).expect("1/40");
    let hi = Value::from_ratio(4, 5).expect("4/5");
    let r = if rng.gen_bool(0.3) {
        [(1, 2), (1, 3), (1, 5)]
            .choose(rng)
            .map(|&(n, d)| Value::from_ratio(n, d).expect("ratio"))
            .expect("nonempty")
    } else {
        value_in(rng, &r_lo, &r_hi, max_den)
    };
    let radius = |rng: &mut R| {
        if rng.gen_bool(0.25) {
            // inside r^Q, so the corresponding split is skipped
            let k = rng.gen_range(1..=6);
            let e = q(rng.gen_range(k..=3 * k), k);
            let v = r.log().expect("nonzero").scale(&e).exp();
            if v >= lo && v <= hi {
                return v;
            }
        }
        value_in(rng, &lo, &hi, max_den)
    };
    let m = rng.gen_range(0..=1);
    let pi_0 = radius(rng);
    let pi_1 = radius(rng);
    let n = (0..=m).map(|_| rng.gen_range(0..=2)).collect();
    let base = ModelAlgebra::new(1, m, pi_0).expect("valid base");
    AnnuliModel::new(base, n, pi_1, r).expect("valid annuli model")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial_algebra::{is_unit_r, is_unit_r_eta};

    #[test]
    fn generators_respect_their_contracts() {
        let mut g = rng(7);
        for _ in 0..200 {
            let v = value_at_most_one(&mut g, 6);
            assert!(v <= Value::one() && !v.is_zero());
            let mdl = model(&mut g, 3, 3, 6);
            assert!(mdl.m() <= mdl.l() && mdl.l() <= 3);
            if mdl.m() > 0 {
                assert!(*mdl.pi() < Value::one());
            }
            let a = special_poly(&mut g, &mdl, 6, 6);
            assert!(!a.is_zero() && a.len() <= 6 * 6);
            assert!(is_unit_r(&r_unit(&mut g, &mdl, 4, 6)));
            assert!(is_unit_r_eta(&generic_unit(&mut g, &mdl, 4, 6)));
            let am = annuli_model(&mut g, 6);
            assert!(am.m() <= 1);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a: Vec<Value> = (0..5).map({
            let mut g = rng(11);
            move |_| value(&mut g, 6)
        }).collect();
        let b: Vec<Value> = (0..5).map({
            let mut g = rng(11);
            move |_| value(&mut g, 6)
        }).collect();
        assert_eq!(a, b);
    }
}

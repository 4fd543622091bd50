use serde::{Deserialize, Serialize};

use super::special::RawTerm;
use super::{to_special, Coefficient, ModelAlgebra, RawPoly, SpecialMonomial, SpecialPoly};
use crate::error::{Error, Result};
use crate::value_group::Value;

/// The exponent/value inequalities of the domination criterion on bare
/// power functions `c r^n` and `c' r^{n'}`:
/// `c ≥ c'`, `c π^{n_i} ≥ c' π^{n'_i}` for `i ≤ m`, and `n_i ≤ n'_i` for `i > m`.
pub fn term_dominates(model: &ModelAlgebra, c: &Value, n: &[i64], c2: &Value, n2: &[i64]) -> bool {
    let m = model.m();
    if n[m..].iter().zip(&n2[m..]).any(|(a, b)| a > b) {
        return false;
    }
    if c < c2 {
        return false;
    }
    let pi = model.pi();
    (0..m).all(|i| {
        let lhs = c * &pi.powi(n[i]).expect("pi is nonzero");
        let rhs = c2 * &pi.powi(n2[i]).expect("pi is nonzero");
        lhs >= rhs
    })
}

pub fn dominates_criterion(model: &ModelAlgebra, a: &SpecialMonomial, b: &SpecialMonomial) -> bool {
    term_dominates(model, &a.valuation(), a.n(), &b.valuation(), b.n())
}

/// `c` with `b = a·c` in `A`, if it exists: `c = (b_{n'}/a_n) t^{n'-n}` must be
/// a special monomial. An inexact coefficient quotient is an error.
pub fn try_divides_witness(
    model: &ModelAlgebra,
    a: &SpecialMonomial,
    b: &SpecialMonomial,
) -> Result<Option<SpecialMonomial>> {
    let m = model.m();
    let u: Vec<i64> = b.n().iter().zip(a.n()).map(|(x, y)| x - y).collect();
    if u[m..].iter().any(|&e| e < 0) {
        return Ok(None);
    }
    let bound = model.special_bound(&u);
    let quotient_valuation = b.valuation().checked_div(&a.valuation())?;
    if quotient_valuation > bound {
        return Ok(None);
    }
    let coeff = b.coeff().checked_div(a.coeff())?;
    debug_assert_eq!(coeff.valuation(), quotient_valuation);
    Ok(Some(SpecialMonomial::new(model, u, coeff)?))
}

pub fn divides_witness(
    model: &ModelAlgebra,
    a: &SpecialMonomial,
    b: &SpecialMonomial,
) -> Option<SpecialMonomial> {
    try_divides_witness(model, a, b).ok().flatten()
}

/// Exponent of the term dominating every other term, if any.
pub fn dominating_monomial(a: &SpecialPoly) -> Option<Vec<i64>> {
    let model = a.model();
    let terms: Vec<(&Vec<i64>, Value)> = a.terms().map(|(n, c)| (n, c.valuation())).collect();
    terms
        .iter()
        .find(|(d, cd)| {
            terms
                .iter()
                .all(|(n, cn)| n == d || term_dominates(model, cd, d, cn, n))
        })
        .map(|(d, _)| (*d).clone())
}

/// `a ∈ R^×`: the constant term has absolute value 1.
pub fn is_unit_r(a: &SpecialPoly) -> bool {
    a.has_unit_constant()
}

/// `a ∈ R_η^×`: a dominating monomial exists and its tail exponents vanish.
pub fn is_unit_r_eta(a: &SpecialPoly) -> bool {
    let m = a.model().m();
    dominating_monomial(a).is_some_and(|d| d[m..].iter().all(|&e| e == 0))
}

/// `a = u · π' · ∏_{i=0}^m t_i^{n_i}` with `u ∈ R^×`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericUnitFactorization {
    pub u: SpecialPoly,
    pub pi_prime: Coefficient,
    /// Exponents of `t_0..t_m`.
    pub n: Vec<u64>,
}

impl GenericUnitFactorization {
    pub fn recompose(&self) -> Result<SpecialPoly> {
        let model = self.u.model();
        let mut exps = vec![0i64; model.l() + 1];
        for (slot, e) in exps.iter_mut().zip(&self.n) {
            *slot = *e as i64;
        }
        let monomial = to_special(
            &RawPoly {
                terms: vec![RawTerm {
                    n: exps,
                    coeff: Coefficient::one(),
                }],
            },
            model,
        )?;
        let scalar = SpecialPoly::constant(model, self.pi_prime.clone())?;
        Ok(&(&self.u * &scalar) * &monomial)
    }
}

/// Splits a generic unit into an `R`-unit, a scalar and a monomial in `t_0..t_m`.
///
/// The dominating term is located by divisibility: a candidate `a_d t^d` with
/// `d ∈ Z^m × {0}` must divide every term of `a` in `A`. Then with
/// `c = -min(0, d_1..d_m)` we have `t^d = π^{-c} t_0^c ∏ t_i^{d_i + c}`.
pub fn factor_generic_unit(a: &SpecialPoly) -> Result<GenericUnitFactorization> {
    let model = a.model();
    if a.is_zero() {
        return Err(Error::Precondition("cannot factor zero".into()));
    }
    let m = model.m();
    let monomials = a.monomials();
    let mut inexact = None;
    'candidates: for cand in monomials.iter().filter(|t| t.n()[m..].iter().all(|&e| e == 0)) {
        let mut witnesses = Vec::with_capacity(monomials.len());
        for mono in &monomials {
            match try_divides_witness(model, cand, mono) {
                Ok(Some(w)) => witnesses.push(w),
                Ok(None) => continue 'candidates,
                Err(e) => {
                    inexact = Some(e);
                    continue 'candidates;
                }
            }
        }
        let u = SpecialPoly::from_terms(
            model,
            witnesses.into_iter().map(|w| (w.n().to_vec(), w.coeff().clone())),
        )?;
        if !is_unit_r(&u) {
            return Err(Error::invariant(
                "cofactor is an R-unit",
                format!("u = {u} has no unit constant term"),
            ));
        }
        let d = cand.n();
        let c = model.pi_debt(d);
        let mut n = Vec::with_capacity(m + 1);
        n.push(c as u64);
        n.extend(d[..m].iter().map(|&di| (di + c) as u64));
        let pi_prime = cand.coeff().scale(&model.pi().powi(-c)?);
        return Ok(GenericUnitFactorization { u, pi_prime, n });
    }
    Err(inexact.unwrap_or_else(|| {
        Error::Precondition(format!(
            "{a} is not a generic unit: no term with exponent in Z^m x {{0}} divides all others"
        ))
    }))
}

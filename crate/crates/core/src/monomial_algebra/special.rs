use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{Coefficient, Exponent, ModelAlgebra};
use crate::error::{Error, Result};
use crate::value_group::Value;

/// `a_n t^n` with `|a_n| ≤ π^{-min(0, n_1..n_m)}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpecialMonomial {
    n: Exponent,
    coeff: Coefficient,
}

impl SpecialMonomial {
    pub fn new(model: &ModelAlgebra, n: Exponent, coeff: Coefficient) -> Result<Self> {
        model.check_exponent(&n)?;
        if coeff.is_zero() {
            return Err(Error::invariant("special monomial coefficient != 0", "zero coefficient"));
        }
        let bound = model.special_bound(&n);
        if coeff.valuation() > bound {
            return Err(Error::invariant(
                "specialness |a_n| <= pi^(-min(0, n_1..n_m))",
                format!("|a_n| = {} exceeds {bound} at n = {n:?}", coeff.valuation()),
            ));
        }
        Ok(SpecialMonomial { n, coeff })
    }

    pub(crate) fn new_unchecked(n: Exponent, coeff: Coefficient) -> Self {
        SpecialMonomial { n, coeff }
    }

    pub fn n(&self) -> &[i64] {
        &self.n
    }

    pub fn coeff(&self) -> &Coefficient {
        &self.coeff
    }

    pub fn valuation(&self) -> Value {
        self.coeff.valuation()
    }
}

impl fmt::Display for SpecialMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_monomial(f, &self.coeff, &self.n)
    }
}

fn fmt_monomial(f: &mut fmt::Formatter<'_>, coeff: &Coefficient, n: &[i64]) -> fmt::Result {
    let vars: Vec<String> = n
        .iter()
        .enumerate()
        .filter(|(_, e)| **e != 0)
        .map(|(i, e)| match e {
            1 => format!("t_{}", i + 1),
            e => format!("t_{}^{e}", i + 1),
        })
        .collect();
    if vars.is_empty() {
        write!(f, "{coeff}")
    } else if *coeff == Coefficient::one() {
        f.write_str(&vars.join("*"))
    } else {
        write!(f, "{coeff}*{}", vars.join("*"))
    }
}

/// `c · r^n` on a point `r = (r_1..r_l)`, with `0^0 = 1` and `0^k = 0` for `k > 0`.
pub fn monomial_value(c: &Value, n: &[i64], point: &[Value]) -> Result<Value> {
    let mut acc = c.clone();
    for (i, (e, r)) in n.iter().zip(point).enumerate() {
        if *e == 0 {
            continue;
        }
        if r.is_zero() {
            if *e < 0 {
                return Err(Error::OutsideSkeleton(format!(
                    "r_{} = 0 with negative exponent {e}",
                    i + 1
                )));
            }
            return Ok(Value::zero());
        }
        acc = &acc * &r.powi(*e)?;
    }
    Ok(acc)
}

/// The special representation `Σ a_n t^n` of an element of `A`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct SpecialPoly {
    model: ModelAlgebra,
    terms: BTreeMap<Exponent, Coefficient>,
}

#[derive(Clone, Serialize, Deserialize)]
struct TermRepr {
    n: Exponent,
    coeff: Coefficient,
}

#[derive(Clone, Serialize, Deserialize)]
struct PolyRepr {
    model: ModelAlgebra,
    terms: Vec<TermRepr>,
}

impl TryFrom<PolyRepr> for SpecialPoly {
    type Error = Error;

    fn try_from(r: PolyRepr) -> Result<Self> {
        SpecialPoly::from_terms(&r.model, r.terms.into_iter().map(|t| (t.n, t.coeff)))
    }
}

impl From<SpecialPoly> for PolyRepr {
    fn from(p: SpecialPoly) -> Self {
        PolyRepr {
            terms: p
                .terms
                .into_iter()
                .map(|(n, coeff)| TermRepr { n, coeff })
                .collect(),
            model: p.model,
        }
    }
}

impl SpecialPoly {
    pub fn zero(model: &ModelAlgebra) -> Self {
        SpecialPoly {
            model: model.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(model: &ModelAlgebra) -> Self {
        SpecialPoly::from_monomial(
            model,
            SpecialMonomial::new_unchecked(vec![0; model.l()], Coefficient::one()),
        )
    }

    pub fn from_monomial(model: &ModelAlgebra, mono: SpecialMonomial) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(mono.n, mono.coeff);
        SpecialPoly {
            model: model.clone(),
            terms,
        }
    }

    /// Sums the given terms, rejecting any that is not a special monomial.
    pub fn from_terms(
        model: &ModelAlgebra,
        terms: impl IntoIterator<Item = (Exponent, Coefficient)>,
    ) -> Result<Self> {
        let mut out = BTreeMap::<Exponent, Coefficient>::new();
        for (n, coeff) in terms {
            if coeff.is_zero() {
                model.check_exponent(&n)?;
                continue;
            }
            let mono = SpecialMonomial::new(model, n, coeff)?;
            accumulate(&mut out, mono.n, &mono.coeff);
        }
        Ok(SpecialPoly {
            model: model.clone(),
            terms: out,
        })
    }

    pub fn model(&self) -> &ModelAlgebra {
        &self.model
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, n: &[i64]) -> Option<&Coefficient> {
        self.terms.get(n)
    }

    pub fn monomials(&self) -> Vec<SpecialMonomial> {
        self.terms
            .iter()
            .map(|(n, c)| SpecialMonomial::new_unchecked(n.clone(), c.clone()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Option<&Coefficient> {
        self.terms.get(&vec![0; self.model.l()])
    }

    fn same_model(&self, other: &SpecialPoly) -> Result<()> {
        if self.model != other.model {
            return Err(Error::Precondition(
                "operands live in different model algebras".into(),
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &SpecialPoly) -> Result<SpecialPoly> {
        self.same_model(other)?;
        let mut terms = self.terms.clone();
        for (n, c) in &other.terms {
            accumulate(&mut terms, n.clone(), c);
        }
        Ok(SpecialPoly {
            model: self.model.clone(),
            terms,
        })
    }

    /// Laurent product; products of special monomials are again special.
    pub fn try_mul(&self, other: &SpecialPoly) -> Result<SpecialPoly> {
        self.same_model(other)?;
        let mut terms = BTreeMap::new();
        for (n1, c1) in &self.terms {
            for (n2, c2) in &other.terms {
                let n: Exponent = n1.iter().zip(n2).map(|(a, b)| a + b).collect();
                accumulate(&mut terms, n, &(c1 * c2));
            }
        }
        Ok(SpecialPoly {
            model: self.model.clone(),
            terms,
        })
    }

    /// `|a|_r = max_n |a_n| r^n` at `r = (r_1..r_l) ∈ Δ`.
    pub fn eval(&self, point: &[Value]) -> Result<Value> {
        self.model.check_point(point)?;
        let mut best = Value::zero();
        for (n, c) in &self.terms {
            let v = monomial_value(&c.valuation(), n, point)?;
            if v > best {
                best = v;
            }
        }
        Ok(best)
    }
}

fn accumulate(terms: &mut BTreeMap<Exponent, Coefficient>, n: Exponent, c: &Coefficient) {
    let sum = match terms.get(&n) {
        Some(old) => old + c,
        None => c.clone(),
    };
    if sum.is_zero() {
        terms.remove(&n);
    } else {
        terms.insert(n, sum);
    }
}

impl Add for &SpecialPoly {
    type Output = SpecialPoly;

    fn add(self, rhs: &SpecialPoly) -> SpecialPoly {
        self.try_add(rhs).expect("model mismatch")
    }
}

impl Neg for &SpecialPoly {
    type Output = SpecialPoly;

    fn neg(self) -> SpecialPoly {
        SpecialPoly {
            model: self.model.clone(),
            terms: self.terms.iter().map(|(n, c)| (n.clone(), -c)).collect(),
        }
    }
}

impl Sub for &SpecialPoly {
    type Output = SpecialPoly;

    fn sub(self, rhs: &SpecialPoly) -> SpecialPoly {
        self + &(-rhs)
    }
}

impl Mul for &SpecialPoly {
    type Output = SpecialPoly;

    fn mul(self, rhs: &SpecialPoly) -> SpecialPoly {
        self.try_mul(rhs).expect("model mismatch")
    }
}

impl fmt::Display for SpecialPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (n, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            fmt_monomial(f, c, n)?;
        }
        Ok(())
    }
}

/// A genuine polynomial in `t_0..t_l` with coefficients in `k°`.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct RawPoly {
    pub terms: Vec<RawTerm>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RawTerm {
    /// Exponents of `t_0..t_l`.
    pub n: Vec<i64>,
    pub coeff: Coefficient,
}

impl RawPoly {
    pub fn from_terms(terms: impl IntoIterator<Item = (Vec<i64>, Coefficient)>) -> Self {
        RawPoly {
            terms: terms
                .into_iter()
                .map(|(n, coeff)| RawTerm { n, coeff })
                .collect(),
        }
    }

    /// Product in `k°[t_0..t_l]`, without applying the defining relation.
    pub fn mul(&self, other: &RawPoly) -> RawPoly {
        RawPoly::from_terms(self.terms.iter().flat_map(|a| {
            other.terms.iter().map(move |b| {
                (
                    a.n.iter().zip(&b.n).map(|(x, y)| x + y).collect(),
                    &a.coeff * &b.coeff,
                )
            })
        }))
    }
}

/// Eliminates `t_0` through `t_0 = π t_1^{-1}⋯t_m^{-1}` (or `t_0 = π` when `m = 0`).
pub fn to_special(raw: &RawPoly, model: &ModelAlgebra) -> Result<SpecialPoly> {
    let mut terms = BTreeMap::new();
    let one = Value::one();
    for term in &raw.terms {
        if term.n.len() != model.l() + 1 {
            return Err(Error::invariant(
                "raw exponent length = l + 1",
                format!("got {} entries, expected {}", term.n.len(), model.l() + 1),
            ));
        }
        if let Some(i) = term.n.iter().position(|&e| e < 0) {
            return Err(Error::invariant(
                "raw exponents in N",
                format!("t_{i} has exponent {}", term.n[i]),
            ));
        }
        if term.coeff.valuation() > one {
            return Err(Error::invariant(
                "raw coefficients in k°",
                format!("|c| = {} exceeds 1", term.coeff.valuation()),
            ));
        }
        if term.coeff.is_zero() {
            continue;
        }
        let n0 = term.n[0];
        let mut n: Exponent = term.n[1..].to_vec();
        for e in &mut n[..model.m()] {
            *e -= n0;
        }
        let coeff = term.coeff.scale(&model.pi().powi(n0)?);
        accumulate(&mut terms, n, &coeff);
    }
    debug_assert!(terms.iter().all(|(n, c)| c.valuation() <= model.special_bound(n)));
    Ok(SpecialPoly {
        model: model.clone(),
        terms,
    })
}

impl SpecialPoly {
    /// A constant `c` viewed as an element of `A`.
    pub fn constant(model: &ModelAlgebra, c: Coefficient) -> Result<Self> {
        SpecialPoly::from_terms(model, [(vec![0; model.l()], c)])
    }

    /// Whether the constant term has absolute value exactly one.
    pub(crate) fn has_unit_constant(&self) -> bool {
        self.constant_term()
            .is_some_and(|c| c.valuation().is_one() && !c.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    fn model(l: usize, m: usize) -> ModelAlgebra {
        ModelAlgebra::new(l, m, v("1/2")).unwrap()
    }

    fn raw(terms: &[(&[i64], &str)]) -> RawPoly {
        RawPoly::from_terms(
            terms
                .iter()
                .map(|(n, c)| (n.to_vec(), Coefficient::from_value(v(c)))),
        )
    }

    #[test]
    fn substitution_examples() {
        let m11 = model(1, 1);
        let t0 = to_special(&raw(&[(&[1, 0], "1")]), &m11).unwrap();
        assert_eq!(t0.len(), 1);
        assert_eq!(t0.coefficient(&[-1]), Some(&Coefficient::from_value(v("1/2"))));

        let t0t1 = to_special(&raw(&[(&[1, 1], "1")]), &m11).unwrap();
        assert_eq!(t0t1.coefficient(&[0]), Some(&Coefficient::from_value(v("1/2"))));

        let m21 = model(2, 1);
        let a = to_special(&raw(&[(&[1, 0, 0], "1"), (&[0, 2, 0], "1")]), &m21).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.coefficient(&[-1, 0]), Some(&Coefficient::from_value(v("1/2"))));
        assert_eq!(a.coefficient(&[2, 0]), Some(&Coefficient::one()));
    }

    #[test]
    fn m_zero_substitutes_scalar() {
        let m10 = model(1, 0);
        let a = to_special(&raw(&[(&[2, 1], "1")]), &m10).unwrap();
        assert_eq!(a.coefficient(&[1]), Some(&Coefficient::from_value(v("1/4"))));
    }

    #[test]
    fn to_special_rejects_bad_input() {
        let m11 = model(1, 1);
        assert!(to_special(&raw(&[(&[-1, 0], "1")]), &m11).is_err());
        assert!(to_special(&raw(&[(&[0, 0], "2")]), &m11).is_err());
        assert!(to_special(&raw(&[(&[0], "1")]), &m11).is_err());
    }

    #[test]
    fn specialness_enforced() {
        let m11 = model(1, 1);
        // |1| > π^1 at n = -1
        let err = SpecialPoly::from_terms(&m11, [(vec![-1], Coefficient::one())]).unwrap_err();
        assert!(matches!(err, Error::Invariant { .. }));
        assert!(
            SpecialPoly::from_terms(&m11, [(vec![-2], Coefficient::from_value(v("1/4")))]).is_ok()
        );
    }

    #[test]
    fn eval_examples() {
        let m11 = model(1, 1);
        let t0 = to_special(&raw(&[(&[1, 0], "1")]), &m11).unwrap();
        assert_eq!(t0.eval(&[Value::one()]).unwrap(), v("1/2"));
        assert_eq!(SpecialPoly::one(&m11).eval(&[v("2/3")]).unwrap(), Value::one());

        let m21 = model(2, 1);
        let a = to_special(&raw(&[(&[0, 1, 0], "1"), (&[0, 0, 1], "1")]), &m21).unwrap();
        assert_eq!(a.eval(&[v("1/2"), v("1/3")]).unwrap(), v("1/2"));
        // tail coordinate zero kills positive powers
        assert_eq!(a.eval(&[v("1/2"), Value::zero()]).unwrap(), v("1/2"));
        // below the simplex
        assert!(a.eval(&[v("1/3"), Value::one()]).is_err());
    }

    #[test]
    fn display() {
        let m11 = model(1, 1);
        let a = to_special(&raw(&[(&[1, 0], "1"), (&[0, 1], "1")]), &m11).unwrap();
        assert_eq!(a.to_string(), "1/2*t_1^-1 + t_1");
        let c = Coefficient::from_terms([(int(3), v("1/3")), (int(1), v("1/5"))]);
        let b = SpecialPoly::constant(&m11, c).unwrap();
        assert_eq!(b.to_string(), "(3*(1/3) + 1/5)");
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m21 = model(2, 1);
        let a = to_special(&raw(&[(&[1, 0, 0], "1"), (&[0, 2, 1], "1/3")]), &m21).unwrap();
        let j = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<SpecialPoly>(&j).unwrap(), a);
        let bad = r#"{"model":{"l":1,"m":1,"pi":"1/2"},"terms":[{"n":[-1],"coeff":"1"}]}"#;
        let err = serde_json::from_str::<SpecialPoly>(bad).unwrap_err();
        assert!(err.to_string().contains("specialness"), "{err}");
    }
}

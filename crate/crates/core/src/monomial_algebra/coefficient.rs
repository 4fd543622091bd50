use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, format_rational, Rational};
use crate::value_group::Value;

/// Upper bound on quotient terms produced by long division before giving up.
const DIVISION_STEP_LIMIT: usize = 512;

/// A finite formal sum `Σ c_j · γ_j` with nonzero rationals `c_j` and
/// distinct nonzero values `γ_j`; its absolute value is `max γ_j`.
///
/// Terms are kept sorted by decreasing `γ`, so the leading term carries the
/// valuation. Leading terms multiply to the leading term of a product, which
/// is why the absolute value is multiplicative.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Coefficient {
    terms: Vec<(Rational, Value)>,
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::default()
    }

    pub fn one() -> Self {
        Coefficient::from_value(Value::one())
    }

    pub fn from_value(gamma: Value) -> Self {
        Coefficient::from_terms([(Rational::one(), gamma)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, Value)>) -> Self {
        let mut merged: HashMap<Value, Rational> = HashMap::new();
        for (c, gamma) in terms {
            if c.is_zero() || gamma.is_zero() {
                continue;
            }
            *merged.entry(gamma).or_insert_with(Rational::zero) += c;
        }
        let mut terms: Vec<(Rational, Value)> = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| (c, g))
            .collect();
        terms.sort_by(|a, b| b.1.cmp(&a.1));
        Coefficient { terms }
    }

    pub fn terms(&self) -> &[(Rational, Value)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn valuation(&self) -> Value {
        self.terms
            .first()
            .map(|(_, g)| g.clone())
            .unwrap_or_else(Value::zero)
    }

    pub fn scale(&self, gamma: &Value) -> Coefficient {
        if gamma.is_zero() {
            return Coefficient::zero();
        }
        Coefficient {
            terms: self
                .terms
                .iter()
                .map(|(c, g)| (c.clone(), g * gamma))
                .collect(),
        }
    }

    /// Exact quotient `self / rhs` when it is again a finite sum.
    ///
    /// Long division by leading terms. Quotient terms appear in strictly
    /// decreasing order, and an exact quotient never has a term below
    /// `min γ(self) / min γ(rhs)`, which bounds the search.
    pub fn checked_div(&self, rhs: &Coefficient) -> Result<Coefficient> {
        let (lead_c, lead_g) = rhs.terms.first().ok_or(Error::DivisionByZero)?;
        if self.is_zero() {
            return Ok(Coefficient::zero());
        }
        if rhs.is_monomial() {
            return Ok(Coefficient {
                terms: self
                    .terms
                    .iter()
                    .map(|(c, g)| (c / lead_c, g / lead_g))
                    .collect(),
            });
        }
        let floor = &self.terms.last().expect("nonzero").1 / &rhs.terms.last().expect("nonzero").1;
        let mut remainder = self.clone();
        let mut quotient = Vec::new();
        for _ in 0..DIVISION_STEP_LIMIT {
            let Some((rc, rg)) = remainder.terms.first() else {
                return Ok(Coefficient::from_terms(quotient));
            };
            let qg = rg / lead_g;
            if qg < floor {
                return Err(Error::InexactDivision(format!("{self} / {rhs}")));
            }
            let qc = rc / lead_c;
            let step = Coefficient::from_terms([(qc.clone(), qg.clone())]);
            remainder = &remainder - &(&step * rhs);
            quotient.push((qc, qg));
        }
        Err(Error::InexactDivision(format!(
            "{self} / {rhs} (no finite quotient within {DIVISION_STEP_LIMIT} terms)"
        )))
    }
}

impl Add for &Coefficient {
    type Output = Coefficient;

    fn add(self, rhs: &Coefficient) -> Coefficient {
        Coefficient::from_terms(self.terms.iter().chain(&rhs.terms).cloned())
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;

    fn neg(self) -> Coefficient {
        Coefficient {
            terms: self.terms.iter().map(|(c, g)| (-c, g.clone())).collect(),
        }
    }
}

impl Sub for &Coefficient {
    type Output = Coefficient;

    fn sub(self, rhs: &Coefficient) -> Coefficient {
        self + &(-rhs)
    }
}

impl Mul for &Coefficient {
    type Output = Coefficient;

    fn mul(self, rhs: &Coefficient) -> Coefficient {
        Coefficient::from_terms(self.terms.iter().flat_map(|(c1, g1)| {
            rhs.terms.iter().map(move |(c2, g2)| (c1 * c2, g1 * g2))
        }))
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, g)| match (c.is_one(), g.is_one()) {
                (_, true) => format_rational(c),
                (true, false) => g.to_string(),
                (false, false) => format!("{}*({g})", format_rational(c)),
            })
            .collect();
        if parts.len() == 1 {
            f.write_str(&parts[0])
        } else {
            write!(f, "({})", parts.join(" + "))
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coefficient({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    #[serde(with = "rational")]
    c: Rational,
    gamma: Value,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoefficientRepr {
    Sum(Vec<TermRepr>),
    Single(Value),
}

impl Serialize for Coefficient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(c, gamma)| TermRepr {
                c: c.clone(),
                gamma: gamma.clone(),
            })
            .collect();
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match CoefficientRepr::deserialize(d)? {
            CoefficientRepr::Sum(terms) => {
                Coefficient::from_terms(terms.into_iter().map(|t| (t.c, t.gamma)))
            }
            CoefficientRepr::Single(v) => Coefficient::from_value(v),
        })
    }
}

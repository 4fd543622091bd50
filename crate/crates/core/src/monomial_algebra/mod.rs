//! Elements of `A = k°[t_0..t_l]/(t_0⋯t_m − π)` in special representation,
//! the monomial semivaluations `|·|_r`, domination of special monomials and
//! the unit / generic-unit predicates of the local ring at the origin.

mod coefficient;
mod domination;
mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value_group::Value;

pub use coefficient::Coefficient;
pub use domination::{
    dominates_criterion, dominating_monomial, divides_witness, factor_generic_unit, is_unit_r,
    is_unit_r_eta, term_dominates, try_divides_witness, GenericUnitFactorization,
};
pub use special::{monomial_value, to_special, RawPoly, SpecialMonomial, SpecialPoly};

/// Exponent vector over `t_1..t_l`: entries `0..m` range over `Z`, the tail over `N`.
pub type Exponent = Vec<i64>;

/// The model algebra `k°[t_0..t_l]/(t_0⋯t_m − π)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr")]
pub struct ModelAlgebra {
    l: usize,
    m: usize,
    pi: Value,
}

#[derive(Deserialize)]
struct ModelRepr {
    l: usize,
    m: usize,
    pi: Value,
}

impl TryFrom<ModelRepr> for ModelAlgebra {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        ModelAlgebra::new(r.l, r.m, r.pi)
    }
}

impl ModelAlgebra {
    pub fn new(l: usize, m: usize, pi: Value) -> Result<Self> {
        if m > l {
            return Err(Error::invariant("0 <= m <= l", format!("m = {m}, l = {l}")));
        }
        if pi.is_zero() {
            return Err(Error::invariant("pi != 0", "pi is zero"));
        }
        if pi > Value::one() {
            return Err(Error::invariant("|pi| <= 1", format!("pi = {pi}")));
        }
        Ok(ModelAlgebra { l, m, pi })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pi(&self) -> &Value {
        &self.pi
    }

    /// `-min(0, n_1..n_m)`: how many factors of π a special coefficient at `n` must carry.
    pub fn pi_debt(&self, n: &[i64]) -> i64 {
        -n[..self.m].iter().copied().fold(0, i64::min)
    }

    /// Largest admissible `|a_n|` for a special monomial at `n`.
    pub fn special_bound(&self, n: &[i64]) -> Value {
        self.pi.powi(self.pi_debt(n)).expect("pi is nonzero")
    }

    pub fn check_exponent(&self, n: &[i64]) -> Result<()> {
        if n.len() != self.l {
            return Err(Error::invariant(
                "exponent length = l",
                format!("got {} entries, expected {}", n.len(), self.l),
            ));
        }
        if let Some(i) = n[self.m..].iter().position(|&e| e < 0) {
            return Err(Error::invariant(
                "tail exponents in N",
                format!("t_{} has exponent {}", self.m + i + 1, n[self.m + i]),
            ));
        }
        Ok(())
    }

    /// Checks `r ∈ Δ`: every coordinate in `[0, 1]` and `r_1⋯r_m ≥ π`.
    pub fn check_point(&self, point: &[Value]) -> Result<()> {
        if point.len() != self.l {
            return Err(Error::OutsideSkeleton(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                self.l
            )));
        }
        let one = Value::one();
        if let Some(i) = point.iter().position(|r| *r > one) {
            return Err(Error::OutsideSkeleton(format!(
                "r_{} = {} exceeds 1",
                i + 1,
                point[i]
            )));
        }
        let base = point[..self.m]
            .iter()
            .fold(Value::one(), |acc, r| &acc * r);
        if base < self.pi {
            return Err(Error::OutsideSkeleton(format!(
                "r_1⋯r_m = {base} is below pi = {}",
                self.pi
            )));
        }
        Ok(())
    }

    /// The dependent coordinate `r_0 = π / (r_1⋯r_m)`.
    pub fn r0(&self, point: &[Value]) -> Value {
        let base = point[..self.m]
            .iter()
            .fold(Value::one(), |acc, r| &acc * r);
        &self.pi / &base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_validation() {
        let half: Value = "1/2".parse().unwrap();
        assert!(ModelAlgebra::new(1, 2, half.clone()).is_err());
        assert!(ModelAlgebra::new(1, 1, Value::zero()).is_err());
        assert!(ModelAlgebra::new(1, 1, "3/2".parse().unwrap()).is_err());
        let m = ModelAlgebra::new(2, 1, half.clone()).unwrap();
        assert_eq!(m.pi_debt(&[-3, 5]), 3);
        assert_eq!(m.special_bound(&[-2, 0]), "1/4".parse().unwrap());
        assert!(m.check_exponent(&[-1, -1]).is_err());
        let third: Value = "1/3".parse().unwrap();
        assert!(m.check_point(&[third, Value::one()]).is_err());
        assert_eq!(m.r0(&[half.clone(), Value::one()]), Value::one());
    }

    #[test]
    fn model_json_is_validated() {
        let ok = r#"{"l":2,"m":1,"pi":"1/2"}"#;
        assert!(serde_json::from_str::<ModelAlgebra>(ok).is_ok());
        let bad = r#"{"l":0,"m":1,"pi":"1/2"}"#;
        let err = serde_json::from_str::<ModelAlgebra>(bad).unwrap_err();
        assert!(err.to_string().contains("0 <= m <= l"), "{err}");
    }
}

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::value_group::Value;

/// Upper bound on Stern–Brocot steps, independent of the denominator cap.
const SEARCH_STEP_LIMIT: usize = 1 << 20;

/// Where a candidate lies relative to an open interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Below,
    Inside,
    Above,
}

impl Side {
    fn flip(self) -> Side {
        match self {
            Side::Below => Side::Above,
            Side::Inside => Side::Inside,
            Side::Above => Side::Below,
        }
    }
}

/// The simplest rational (least denominator, then least absolute numerator)
/// inside an open interval known only through `locate`.
///
/// Walks the Stern–Brocot tree; the first node that lands inside the
/// interval is the simplest one. Denominators along the walk never decrease,
/// so exceeding `max_denominator` means no admissible answer exists below it.
pub fn simplest_rational_in(
    mut locate: impl FnMut(&Rational) -> Result<Side>,
    max_denominator: u64,
) -> Result<Rational> {
    let zero = Rational::zero();
    let sign = match locate(&zero)? {
        Side::Inside => return Ok(zero),
        Side::Below => 1,
        Side::Above => -1,
    };
    let signed = |x: &Rational| if sign > 0 { x.clone() } else { -x };
    // (p, q) pairs; right starts at 1/0 = +inf
    let (mut lp, mut lq) = (BigInt::zero(), BigInt::one());
    let (mut rp, mut rq) = (BigInt::one(), BigInt::zero());
    for _ in 0..SEARCH_STEP_LIMIT {
        let mp = &lp + &rp;
        let mq = &lq + &rq;
        if mq > BigInt::from(max_denominator) {
            return Err(Error::DenominatorCap {
                denominator: rational::denominator_u64(&Rational::new(BigInt::one(), mq)),
                cap: max_denominator,
            });
        }
        let candidate = Rational::new(mp.clone(), mq.clone());
        let mut side = locate(&signed(&candidate))?;
        if sign < 0 {
            side = side.flip();
        }
        match side {
            Side::Inside => return Ok(signed(&candidate)),
            Side::Below => (lp, lq) = (mp, mq),
            Side::Above => (rp, rq) = (mp, mq),
        }
    }
    Err(Error::Precondition(
        "Stern-Brocot search did not terminate".into(),
    ))
}

/// `v^k` for nonzero `v`, without the global exponent cap.
pub(crate) fn power(v: &Value, k: &Rational) -> Value {
    v.log().expect("nonzero value").scale(k).exp()
}

/// A divisor `λ` recorded by its absolute value `s = target · r^q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaChoice {
    pub s: Value,
    #[serde(with = "rational")]
    pub q: Rational,
}

/// Picks `s ∈ target · r^Q ∩ (target^e, 1)` with the simplest exponent `q`.
///
/// In `q` the admissible set is the open interval `(-α, -(1-e)α)` with
/// `α = log_r target`, possibly irrational; membership is decided exactly by
/// comparing `s` with `target^e` and with 1.
pub fn choose_lambda(
    target: &Value,
    e: &Rational,
    r: &Value,
    max_denominator: u64,
) -> Result<LambdaChoice> {
    let one = Value::one();
    if target.is_zero() || *target >= one {
        return Err(Error::Precondition(format!(
            "lambda target {target} must lie in (0, 1)"
        )));
    }
    if !e.is_positive() || *e > Rational::one() {
        return Err(Error::Precondition(format!(
            "exponent bound {} must lie in (0, 1]",
            rational::format_rational(e)
        )));
    }
    if r.is_zero() || *r >= one {
        return Err(Error::Precondition(format!(
            "reference radius {r} must lie in (0, 1)"
        )));
    }
    // The cap is enforced by the search itself, so powers are taken uncapped.
    let floor = power(target, e);
    let s_of = |q: &Rational| -> Result<Value> { Ok(target * &power(r, q)) };
    // s decreases as q grows because r < 1.
    let q = simplest_rational_in(
        |q| {
            let s = s_of(q)?;
            Ok(if s >= one {
                Side::Below
            } else if s <= floor {
                Side::Above
            } else {
                Side::Inside
            })
        },
        max_denominator,
    )?;
    let s = s_of(&q)?;
    debug_assert!(s > floor && s < one);
    debug_assert_eq!(s.cmp(&floor), Ordering::Greater);
    Ok(LambdaChoice { s, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    #[test]
    fn simplest_in_plain_intervals() {
        let within = |lo: Rational, hi: Rational| {
            move |x: &Rational| {
                Ok(if *x <= lo {
                    Side::Below
                } else if *x >= hi {
                    Side::Above
                } else {
                    Side::Inside
                })
            }
        };
        assert_eq!(simplest_rational_in(within(q(1, 3), q(2, 3)), 64).unwrap(), q(1, 2));
        assert_eq!(simplest_rational_in(within(q(-7, 4), q(-3, 2)), 64).unwrap(), q(-5, 3));
        assert_eq!(simplest_rational_in(within(q(5, 2), int(7)), 64).unwrap(), int(3));
        assert_eq!(simplest_rational_in(within(int(-1), int(1)), 64).unwrap(), int(0));
        assert!(matches!(
            simplest_rational_in(within(q(1, 100), q(1, 99)), 64),
            Err(Error::DenominatorCap { .. })
        ));
    }

    #[test]
    fn lambda_examples() {
        let c = choose_lambda(&v("1/3"), &q(1, 2), &v("1/2"), 64).unwrap();
        assert_eq!((c.q.clone(), c.s.clone()), (int(-1), v("2/3")));

        let c = choose_lambda(&v("1/2"), &q(1, 2), &v("1/2"), 64).unwrap();
        assert_eq!(c.q, q(-2, 3));
        assert_eq!(c.s, v("2^(-1/3)"));

        let c = choose_lambda(&v("1/4"), &q(1, 2), &v("1/2"), 64).unwrap();
        assert_eq!(c.q, q(-3, 2));
        assert_eq!(c.s, v("2^(-1/2)"));

        let c = choose_lambda(&v("1/5"), &q(1, 2), &v("1/2"), 64).unwrap();
        assert_eq!((c.q, c.s), (int(-2), v("4/5")));
    }

    #[test]
    fn lambda_rejects_degenerate_input() {
        let half = v("1/2");
        assert!(choose_lambda(&half, &int(0), &half, 64).is_err());
        assert!(choose_lambda(&half, &q(3, 2), &half, 64).is_err());
        assert!(choose_lambda(&Value::one(), &q(1, 2), &half, 64).is_err());
        assert!(choose_lambda(&half, &q(1, 2), &Value::one(), 64).is_err());
        // e = 1 is the single-chart base split (m = 0)
        let c = choose_lambda(&v("1/3"), &int(1), &half, 64).unwrap();
        assert!(c.s > v("1/3") && c.s < Value::one());
    }
}

//! The multiplicative value group, restricted to rational powers of positive
//! rationals, together with its additive (logarithmic) mirror.
//!
//! A nonzero [`Value`] is stored as its prime factorisation `∏ p^{e_p}` with
//! rational exponents. Because distinct primes are multiplicatively
//! independent this form is unique, so equality is structural and every
//! comparison can be settled with integer arithmetic: raise both sides to a
//! common denominator `D` and compare the two resulting big integers.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::{BigInt, BigUint};
use num_prime::nt_funcs::{factorize64, is_prime64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, denominator_u64, format_rational, lcm_of_denominators, Rational};

static MAX_DENOMINATOR: AtomicU64 = AtomicU64::new(64);

/// Cap on denominators of rational exponents supplied to [`Value::pow`], to
/// parsed inputs, and to the λ search. Defaults to 64.
pub fn max_denominator() -> u64 {
    MAX_DENOMINATOR.load(AtomicOrdering::Relaxed)
}

pub fn set_max_denominator(cap: u64) {
    MAX_DENOMINATOR.store(cap.max(1), AtomicOrdering::Relaxed);
}

fn check_cap(x: &Rational) -> Result<()> {
    let cap = max_denominator();
    let denominator = denominator_u64(x);
    if denominator > cap {
        return Err(Error::DenominatorCap { denominator, cap });
    }
    Ok(())
}

type Factors = BTreeMap<u64, Rational>;

/// An element of `{0} ∪ Q_{>0}^{Q}`: zero, or `∏ p^{e_p}` with rational `e_p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Value {
    // None is the zero value; otherwise a canonical map with no zero exponents.
    factors: Option<Factors>,
}

impl Value {
    pub fn zero() -> Self {
        Value { factors: None }
    }

    pub fn one() -> Self {
        Value {
            factors: Some(Factors::new()),
        }
    }

    /// Builds `∏ p^{e}` from possibly repeated `(p, e)` pairs; every `p` must be prime.
    pub fn from_factors(pairs: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        let pairs: Vec<_> = pairs.into_iter().collect();
        for (_, e) in &pairs {
            check_cap(e)?;
        }
        Value::from_factors_uncapped(pairs)
    }

    /// The canonical serialized form is read back without the denominator
    /// cap, since computed values may legitimately exceed it.
    fn from_factors_uncapped(pairs: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        let mut factors = Factors::new();
        for (p, e) in pairs {
            if !is_prime64(p) {
                return Err(Error::NotPrime(p));
            }
            *factors.entry(p).or_insert_with(Rational::zero) += e;
        }
        Ok(Value::canonical(factors))
    }

    /// The positive rational `num/den`, or zero when `num == 0`.
    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        if num == 0 {
            return Ok(Value::zero());
        }
        let mut factors = Factors::new();
        for (p, k) in factorize64(num) {
            *factors.entry(p).or_insert_with(Rational::zero) += rational::int(k as i64);
        }
        for (p, k) in factorize64(den) {
            *factors.entry(p).or_insert_with(Rational::zero) -= rational::int(k as i64);
        }
        Ok(Value::canonical(factors))
    }

    /// A nonnegative rational; numerator and denominator must fit in 64 bits.
    pub fn from_rational(x: &Rational) -> Result<Self> {
        if x.is_negative() {
            return Err(Error::Parse(format!(
                "negative absolute value {}",
                format_rational(x)
            )));
        }
        let too_big = || Error::Parse(format!("{} does not fit in 64 bits", format_rational(x)));
        let num = x.numer().to_u64().ok_or_else(too_big)?;
        let den = x.denom().to_u64().ok_or_else(too_big)?;
        Value::from_ratio(num, den)
    }

    fn canonical(mut factors: Factors) -> Self {
        factors.retain(|_, e| !e.is_zero());
        Value {
            factors: Some(factors),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.factors.is_none()
    }

    pub fn is_one(&self) -> bool {
        matches!(&self.factors, Some(f) if f.is_empty())
    }

    /// Prime → exponent map, `None` for zero.
    pub fn factors(&self) -> Option<&BTreeMap<u64, Rational>> {
        self.factors.as_ref()
    }

    /// The value as a plain rational when every exponent is an integer.
    pub fn as_rational(&self) -> Option<Rational> {
        let factors = match &self.factors {
            None => return Some(Rational::zero()),
            Some(f) => f,
        };
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, e) in factors {
            if !e.is_integer() {
                return None;
            }
            let k = e.numer().abs().to_u32()?;
            let pk = BigInt::from(*p).pow(k);
            if e.is_positive() {
                num *= pk;
            } else {
                den *= pk;
            }
        }
        Some(Rational::new(num, den))
    }

    pub fn pow(&self, exponent: &Rational) -> Result<Value> {
        check_cap(exponent)?;
        match &self.factors {
            None if exponent.is_positive() => Ok(Value::zero()),
            None => Err(Error::ZeroPower(format_rational(exponent))),
            Some(f) => Ok(Value::canonical(
                f.iter().map(|(p, e)| (*p, e * exponent)).collect(),
            )),
        }
    }

    pub fn powi(&self, k: i64) -> Result<Value> {
        self.pow(&rational::int(k))
    }

    pub fn inv(&self) -> Result<Value> {
        match &self.factors {
            None => Err(Error::DivisionByZero),
            Some(f) => Ok(Value::canonical(f.iter().map(|(p, e)| (*p, -e)).collect())),
        }
    }

    pub fn checked_div(&self, rhs: &Value) -> Result<Value> {
        Ok(self * &rhs.inv()?)
    }

    pub fn log(&self) -> Option<LogValue> {
        self.factors.as_ref().map(|f| LogValue { coeffs: f.clone() })
    }

    pub fn max(self, other: Value) -> Value {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Natural logarithm as an `f64` estimate (`-inf` for zero). Display only.
    pub fn ln_f64(&self) -> f64 {
        match &self.factors {
            None => f64::NEG_INFINITY,
            Some(f) => f
                .iter()
                .map(|(p, e)| rational::to_f64(e) * (*p as f64).ln())
                .sum(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.ln_f64().exp()
    }
}

/// Exact comparison of two nonzero values by comparing `∏ p^{D f_p}` on the
/// positive and negative sides of the quotient's exponent vector.
fn cmp_positive(a: &Factors, b: &Factors) -> Ordering {
    let mut diff: Factors = a.clone();
    for (p, e) in b {
        *diff.entry(*p).or_insert_with(Rational::zero) -= e;
    }
    diff.retain(|_, e| !e.is_zero());
    if diff.is_empty() {
        return Ordering::Equal;
    }
    if diff.values().all(|e| e.is_positive()) {
        return Ordering::Greater;
    }
    if diff.values().all(|e| e.is_negative()) {
        return Ordering::Less;
    }
    let d = lcm_of_denominators(diff.values());
    let mut upper = BigUint::one();
    let mut lower = BigUint::one();
    for (p, e) in &diff {
        let scaled = (e * Rational::from_integer(d.clone())).to_integer();
        let k = scaled
            .abs()
            .to_u32()
            .expect("scaled exponent exceeds u32; value group element too large to compare");
        let pk = BigUint::from(*p).pow(k);
        if scaled.is_positive() {
            upper *= pk;
        } else {
            lower *= pk;
        }
    }
    upper.cmp(&lower)
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.factors, &other.factors) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => cmp_positive(a, b),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for &Value {
    type Output = Value;

    fn mul(self, rhs: &Value) -> Value {
        match (&self.factors, &rhs.factors) {
            (Some(a), Some(b)) => {
                let mut out = a.clone();
                for (p, e) in b {
                    *out.entry(*p).or_insert_with(Rational::zero) += e;
                }
                Value::canonical(out)
            }
            _ => Value::zero(),
        }
    }
}

impl Mul for Value {
    type Output = Value;

    fn mul(self, rhs: Value) -> Value {
        &self * &rhs
    }
}

impl Div for &Value {
    type Output = Value;

    /// Panics on a zero divisor; use [`Value::checked_div`] for fallible input.
    fn div(self, rhs: &Value) -> Value {
        self.checked_div(rhs).expect("division by zero value")
    }
}

impl Div for Value {
    type Output = Value;

    fn div(self, rhs: Value) -> Value {
        &self / &rhs
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Value({self})")
    }
}

/// Plain rational (`"1/2"`) when exponents are integral, otherwise a product
/// of prime powers (`"2^(-1/3)*3"`). [`Value::from_str`] reads both forms back.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(x) = self.as_rational() {
            return f.write_str(&format_rational(&x));
        }
        let factors = self.factors.as_ref().expect("zero is rational");
        let parts: Vec<String> = factors
            .iter()
            .map(|(p, e)| {
                if e.is_one() {
                    p.to_string()
                } else if e.is_integer() {
                    format!("{p}^{}", e.numer())
                } else {
                    format!("{p}^({})", format_rational(e))
                }
            })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

impl FromStr for Value {
    type Err = Error;

    /// Products of `base` or `base^exp` factors, where `base` is a
    /// nonnegative rational and `exp` a rational, each optionally in parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let mut acc = Value::one();
        for part in split_top_level(s.trim(), '*') {
            let part = part.trim();
            if part.is_empty() {
                return Err(Error::Parse(format!("empty factor in {s:?}")));
            }
            let factor = match split_top_level(part, '^').as_slice() {
                [base] => Value::from_rational(&rational::parse_rational(base)?)?,
                [base, exp] => {
                    let base = Value::from_rational(&rational::parse_rational(base)?)?;
                    base.pow(&rational::parse_rational(exp)?)?
                }
                _ => return Err(Error::Parse(format!("malformed power {part:?}"))),
            };
            acc = &acc * &factor;
        }
        Ok(acc)
    }
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Zero {
        zero: bool,
    },
    Factors {
        factors: BTreeMap<String, String>,
    },
    Text(String),
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match &self.factors {
            None => ValueRepr::Zero { zero: true },
            Some(f) => ValueRepr::Factors {
                factors: f
                    .iter()
                    .map(|(p, e)| (p.to_string(), format_rational(e)))
                    .collect(),
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match ValueRepr::deserialize(d)? {
            ValueRepr::Zero { zero: true } => Ok(Value::zero()),
            ValueRepr::Zero { zero: false } => {
                Err(D::Error::custom("{\"zero\": false} is not a value"))
            }
            ValueRepr::Factors { factors } => {
                let mut pairs = Vec::with_capacity(factors.len());
                for (p, e) in factors {
                    let p: u64 = p
                        .trim()
                        .parse()
                        .map_err(|_| D::Error::custom(format!("bad prime key {p:?}")))?;
                    pairs.push((p, rational::parse_rational(&e).map_err(D::Error::custom)?));
                }
                Value::from_factors_uncapped(pairs).map_err(D::Error::custom)
            }
            ValueRepr::Text(t) => t.parse().map_err(D::Error::custom),
        }
    }
}

/// `Σ e_p · log p`, the logarithm of a nonzero [`Value`].
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LogValue {
    coeffs: Factors,
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue::default()
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, Rational> {
        &self.coeffs
    }

    pub fn exp(&self) -> Value {
        Value {
            factors: Some(self.coeffs.clone()),
        }
    }

    pub fn scale(&self, k: &Rational) -> LogValue {
        let mut coeffs: Factors = self.coeffs.iter().map(|(p, e)| (*p, e * k)).collect();
        coeffs.retain(|_, e| !e.is_zero());
        LogValue { coeffs }
    }

    /// Sign of the real number, i.e. the comparison of `exp(self)` with 1.
    pub fn signum(&self) -> Ordering {
        self.exp().cmp(&Value::one())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Some(q)` iff `self = q · base` exactly.
    pub fn ratio_to(&self, base: &LogValue) -> Option<Rational> {
        let (p0, b0) = base.coeffs.iter().next()?;
        let q = self
            .coeffs
            .get(p0)
            .cloned()
            .unwrap_or_else(Rational::zero)
            / b0;
        (base.scale(&q) == *self).then_some(q)
    }

    pub fn to_f64(&self) -> f64 {
        self.exp().ln_f64()
    }
}

impl Ord for LogValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exp().cmp(&other.exp())
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &LogValue {
    type Output = LogValue;

    fn add(self, rhs: &LogValue) -> LogValue {
        (&self.exp() * &rhs.exp()).log().expect("nonzero")
    }
}

impl Sub for &LogValue {
    type Output = LogValue;

    fn sub(self, rhs: &LogValue) -> LogValue {
        self + &(-rhs)
    }
}

impl Neg for &LogValue {
    type Output = LogValue;

    fn neg(self) -> LogValue {
        self.scale(&-Rational::one())
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogValue(log {})", self.exp())
    }
}

impl Serialize for LogValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, String> = self
            .coeffs
            .iter()
            .map(|(p, e)| (p.to_string(), format_rational(e)))
            .collect();
        #[derive(Serialize)]
        struct Repr {
            log: BTreeMap<String, String>,
        }
        Repr { log: map }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Repr {
            log: BTreeMap<String, String>,
        }
        let repr = Repr::deserialize(d)?;
        let mut pairs = Vec::new();
        for (p, e) in repr.log {
            let p: u64 = p
                .trim()
                .parse()
                .map_err(|_| D::Error::custom(format!("bad prime key {p:?}")))?;
            pairs.push((p, rational::parse_rational(&e).map_err(D::Error::custom)?));
        }
        Ok(Value::from_factors_uncapped(pairs)
            .map_err(D::Error::custom)?
            .log()
            .expect("nonzero"))
    }
}

/// `Some(q)` iff `v = r^q`. Exact because prime factorisations are
/// multiplicatively independent: membership in `r^Q` is a linear-algebra
/// question on exponent vectors.
pub fn in_r_power_class(v: &Value, r: &Value) -> Result<Option<Rational>> {
    let lv = v
        .log()
        .ok_or_else(|| Error::Precondition("v must be nonzero".into()))?;
    let lr = r
        .log()
        .ok_or_else(|| Error::Precondition("r must be nonzero".into()))?;
    if lr.is_zero() {
        return Err(Error::DegenerateClass);
    }
    Ok(lv.ratio_to(&lr))
}

//! Overlapping chart coverings of `x_0 x_1 = π_1 t_0^{n_0}⋯t_m^{n_m}` over the
//! model base `t_0⋯t_m = π_0`: λ choice, base and fiber splits, leaf
//! triangulations, certificates and their exact verification.

mod certificate;
mod lambda;
mod render;
mod tree;
mod triangulate;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial_algebra::ModelAlgebra;
use crate::rational::{self, Rational};
use crate::value_group::{max_denominator, Value};

pub use certificate::{
    certify, leaf_skeleton, verify_covering, AxisTarget, ChartRecord, CheckId, CheckResult,
    CoverTarget, CoveringCertificate, Interval, LeafRecord, LeafSkeleton, SplitRecord,
    VerificationReport, Verdict, CERTIFICATE_FORMAT, CERTIFICATE_VERSION,
};
pub use lambda::{choose_lambda, simplest_rational_in, LambdaChoice, Side};
pub use render::{render_csv, render_svg};
pub use tree::{
    build_covering, build_covering_with, split_base, split_fiber, ChartNode, ChartTree,
    Constants, NodeKind, SplitInfo,
};
pub use triangulate::{
    segments, triangulate_leaf, triangulate_region, LeafRegion, Point, Segment, Triangle,
};

/// `B = k°[t_0..t_l]/(t_0⋯t_m − π_0)` with `A = B[x_0, x_1]/(x_0 x_1 − π_1 t^n)`,
/// plus the reference radius `r` whose rational powers are the target classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AnnuliRepr")]
pub struct AnnuliModel {
    base: ModelAlgebra,
    fiber_exponents: Vec<u64>,
    pi_1: Value,
    r: Value,
}

#[derive(Deserialize)]
struct AnnuliRepr {
    base: ModelAlgebra,
    fiber_exponents: Vec<u64>,
    pi_1: Value,
    r: Value,
}

impl TryFrom<AnnuliRepr> for AnnuliModel {
    type Error = Error;

    fn try_from(repr: AnnuliRepr) -> Result<Self> {
        AnnuliModel::new(repr.base, repr.fiber_exponents, repr.pi_1, repr.r)
    }
}

impl AnnuliModel {
    pub fn new(base: ModelAlgebra, fiber_exponents: Vec<u64>, pi_1: Value, r: Value) -> Result<Self> {
        if fiber_exponents.len() != base.m() + 1 {
            return Err(Error::invariant(
                "fiber exponents n_0..n_m",
                format!(
                    "got {} exponents for m = {}",
                    fiber_exponents.len(),
                    base.m()
                ),
            ));
        }
        if pi_1.is_zero() || pi_1 > Value::one() {
            return Err(Error::invariant("0 < |pi_1| <= 1", format!("pi_1 = {pi_1}")));
        }
        if r.is_zero() || r >= Value::one() {
            return Err(Error::invariant("0 < r < 1", format!("r = {r}")));
        }
        Ok(AnnuliModel {
            base,
            fiber_exponents,
            pi_1,
            r,
        })
    }

    /// The product of two annuli `|π| ≤ |t| ≤ 1`, `|ω| ≤ |x| ≤ 1`.
    pub fn two_annuli(pi: Value, omega: Value, r: Value) -> Result<Self> {
        AnnuliModel::new(ModelAlgebra::new(1, 1, pi)?, vec![0, 0], omega, r)
    }

    pub fn base(&self) -> &ModelAlgebra {
        &self.base
    }

    pub fn m(&self) -> usize {
        self.base.m()
    }

    pub fn pi_0(&self) -> &Value {
        self.base.pi()
    }

    pub fn pi_1(&self) -> &Value {
        &self.pi_1
    }

    pub fn fiber_exponents(&self) -> &[u64] {
        &self.fiber_exponents
    }

    pub fn r(&self) -> &Value {
        &self.r
    }
}

/// Exponent bounds for the λ intervals and the search cap.
///
/// Unset fields take the defaults `1/2` (fiber), `1/(m+1)` (base) and the
/// global denominator cap.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverConfig {
    #[serde(default, with = "rational::option", skip_serializing_if = "Option::is_none")]
    pub fiber_exponent: Option<Rational>,
    #[serde(default, with = "rational::option", skip_serializing_if = "Option::is_none")]
    pub base_exponent: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_denominator: Option<u64>,
}

/// A [`CoverConfig`] with every default filled in for a given `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    #[serde(with = "rational")]
    pub fiber_exponent: Rational,
    #[serde(with = "rational")]
    pub base_exponent: Rational,
    pub max_denominator: u64,
}

impl CoverConfig {
    /// Fills defaults and checks that the bounds still force the overlap
    /// inequalities `s² > r_1` and `s^{m+1} > r_0`.
    pub fn resolve(&self, m: usize) -> Result<ResolvedConfig> {
        let half = rational::q(1, 2);
        let base_max = Rational::new(1.into(), (m as i64 + 1).into());
        let fiber = self.fiber_exponent.clone().unwrap_or_else(|| half.clone());
        let base = self.base_exponent.clone().unwrap_or_else(|| base_max.clone());
        if !fiber.is_positive() || fiber > half {
            return Err(Error::invariant(
                "fiber exponent in (0, 1/2]",
                rational::format_rational(&fiber),
            ));
        }
        if !base.is_positive() || base > base_max {
            return Err(Error::invariant(
                "base exponent in (0, 1/(m+1)]",
                rational::format_rational(&base),
            ));
        }
        let cap = self.max_denominator.unwrap_or_else(max_denominator);
        if cap == 0 {
            return Err(Error::invariant("max denominator >= 1", "0"));
        }
        debug_assert!(base <= Rational::one());
        Ok(ResolvedConfig {
            fiber_exponent: fiber,
            base_exponent: base,
            max_denominator: cap,
        })
    }
}

//! Exact toolkit for monomial semivaluations on model semistable algebras
//! `k°[t_0..t_l]/(t_0⋯t_m − π)` and for overlap coverings of products of
//! annuli by semistable charts.
//!
//! * [`value_group`]: exact rational-power absolute values and their logs.
//! * [`monomial_algebra`]: special representations, domination, unit tests
//!   and generic-unit factorisation.
//! * [`pl_engine`]: the piecewise log-affine functions `|a|_Δ` on the skeleton.
//! * [`covering_engine`]: λ-splits, chart trees, leaf triangulations and
//!   covering certificates.

pub mod covering_engine;
pub mod error;
pub mod monomial_algebra;
pub mod pl_engine;
pub mod random;
pub mod rational;
pub mod selftest;
pub mod value_group;

pub use error::{Error, Result};
pub use rational::Rational;
pub use value_group::{in_r_power_class, LogValue, Value};

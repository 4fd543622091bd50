//! The functions `|a|_Δ` on the skeleton `Δ = Δ_m × [0,1]^{l-m}`.
//!
//! Every `|a|_Δ` is a pointwise maximum of power functions `c r^n`, i.e. a
//! convex piecewise-affine function of `log r`. Single power functions are
//! compared exactly with the vertex criterion; maxima of several terms are
//! only compared where a single term settles the question, otherwise the
//! answer is [`PlComparison::Unknown`] after a refutation-only sampling pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::monomial_algebra::{monomial_value, term_dominates, ModelAlgebra, SpecialPoly};
use crate::rational::{q, Rational};
use crate::value_group::Value;

const SAMPLE_SEED: u64 = 0x5eed_0f_de17a;
const SAMPLE_COUNT: usize = 64;
const SAMPLE_DENOMINATOR: i64 = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    model: ModelAlgebra,
}

impl Skeleton {
    pub fn new(model: &ModelAlgebra) -> Self {
        Skeleton {
            model: model.clone(),
        }
    }

    pub fn model(&self) -> &ModelAlgebra {
        &self.model
    }

    /// `ρ_0..ρ_m` in stored coordinates `(r_1..r_l)`: `ρ_j` has `π` in slot `j`
    /// (slot 0 is the dependent `r_0`) and 1 everywhere else.
    pub fn vertices(&self) -> Vec<Vec<Value>> {
        let l = self.model.l();
        (0..=self.model.m())
            .map(|j| {
                let mut point = vec![Value::one(); l];
                if j > 0 {
                    point[j - 1] = self.model.pi().clone();
                }
                point
            })
            .collect()
    }

    /// A point in the relative interior of `Δ` with coordinates `π^{k/D}`:
    /// strictly positive simplex weights and tail coordinates in `(0, 1)`.
    pub fn interior_point<R: Rng>(&self, rng: &mut R, denominator: i64) -> Vec<Value> {
        let m = self.model.m();
        let d = denominator.max(m as i64 + 1);
        let pi = self.model.pi();
        // m distinct cut points in 1..d split d into m + 1 positive parts.
        let mut cuts: Vec<i64> = Vec::with_capacity(m);
        while cuts.len() < m {
            let c = rng.gen_range(1..d);
            if !cuts.contains(&c) {
                cuts.push(c);
            }
        }
        cuts.sort_unstable();
        cuts.push(d);
        let mut point = Vec::with_capacity(self.model.l());
        for w in cuts.windows(2) {
            point.push(pi.pow(&q(w[1] - w[0], d)).expect("pi is nonzero"));
        }
        let tail_base = if pi.is_one() {
            Value::from_ratio(1, 2).expect("1/2")
        } else {
            pi.clone()
        };
        for _ in m..self.model.l() {
            let j = rng.gen_range(1..=2 * d);
            point.push(tail_base.pow(&q(j, d)).expect("nonzero"));
        }
        debug_assert!(self.model.check_point(&point).is_ok());
        point
    }

    /// Vertices followed by a fixed pseudo-random set of interior points.
    pub fn probe_points(&self) -> Vec<Vec<Value>> {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        let mut out = self.vertices();
        for _ in 0..SAMPLE_COUNT {
            out.push(self.interior_point(&mut rng, SAMPLE_DENOMINATOR));
        }
        out
    }
}

/// `r ↦ c r^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlTerm {
    pub c: Value,
    pub n: Vec<i64>,
}

impl PlTerm {
    pub fn eval(&self, point: &[Value]) -> Result<Value> {
        monomial_value(&self.c, &self.n, point)
    }

    fn dominates(&self, model: &ModelAlgebra, other: &PlTerm) -> bool {
        term_dominates(model, &self.c, &self.n, &other.c, &other.n)
    }
}

/// Pointwise maximum of power functions, stored with dominated terms removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlFunction {
    terms: Vec<PlTerm>,
}

impl PlFunction {
    pub fn new(sk: &Skeleton, terms: impl IntoIterator<Item = PlTerm>) -> Result<Self> {
        let mut terms: Vec<PlTerm> = terms.into_iter().collect();
        for t in &terms {
            sk.model.check_exponent(&t.n)?;
            if t.c.is_zero() {
                return Err(Error::invariant("PL term coefficient != 0", "zero coefficient"));
            }
        }
        if terms.is_empty() {
            return Err(Error::invariant("PL function is nonempty", "no terms"));
        }
        terms.sort_by(|a, b| a.n.cmp(&b.n).then_with(|| b.c.cmp(&a.c)));
        Ok(PlFunction {
            terms: reduce(&sk.model, terms),
        })
    }

    /// `|a|_Δ` for a nonzero special representation.
    pub fn from_poly(a: &SpecialPoly) -> Result<Self> {
        let sk = Skeleton::new(a.model());
        PlFunction::new(
            &sk,
            a.terms().map(|(n, c)| PlTerm {
                c: c.valuation(),
                n: n.clone(),
            }),
        )
    }

    pub fn terms(&self) -> &[PlTerm] {
        &self.terms
    }

    pub fn eval(&self, point: &[Value]) -> Result<Value> {
        let mut best = Value::zero();
        for t in &self.terms {
            best = best.max(t.eval(point)?);
        }
        Ok(best)
    }

    /// Pointwise product, which is again a maximum of power functions.
    pub fn product(&self, other: &PlFunction, sk: &Skeleton) -> PlFunction {
        let terms = self.terms.iter().flat_map(|a| {
            other.terms.iter().map(move |b| PlTerm {
                c: &a.c * &b.c,
                n: a.n.iter().zip(&b.n).map(|(x, y)| x + y).collect(),
            })
        });
        PlFunction::new(sk, terms).expect("product of valid PL functions")
    }

    /// Re-runs reduction; a no-op on any value built through [`PlFunction::new`].
    pub fn reduced(&self, sk: &Skeleton) -> PlFunction {
        PlFunction::new(sk, self.terms.iter().cloned()).expect("already valid")
    }
}

fn reduce(model: &ModelAlgebra, sorted: Vec<PlTerm>) -> Vec<PlTerm> {
    let mut kept: Vec<PlTerm> = Vec::with_capacity(sorted.len());
    for t in sorted {
        if kept.iter().any(|k| k.dominates(model, &t)) {
            continue;
        }
        kept.retain(|k| !t.dominates(model, k));
        kept.push(t);
    }
    kept.sort_by(|a, b| a.n.cmp(&b.n));
    kept
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlComparison {
    Holds,
    /// A point of `Δ` where the left side is strictly smaller.
    Refuted { point: Vec<Value> },
    /// No single left term settles it and sampling found no counterexample.
    Unknown,
}

impl PlComparison {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlComparison::Holds => "holds",
            PlComparison::Refuted { .. } => "refuted",
            PlComparison::Unknown => "unknown",
        }
    }
}

/// Vertex criterion: `c r^n ≥ c' r^{n'}` on `Δ` iff `n_i ≤ n'_i` on the tail
/// and the inequality holds at each `ρ_j`.
fn single_geq(sk: &Skeleton, f: &PlTerm, g: &PlTerm) -> PlComparison {
    for vertex in sk.vertices() {
        let fv = f.eval(&vertex).expect("vertices lie in Δ");
        let gv = g.eval(&vertex).expect("vertices lie in Δ");
        if fv < gv {
            return PlComparison::Refuted { point: vertex };
        }
    }
    let m = sk.model.m();
    if let Some(i) = (m..sk.model.l()).find(|&i| f.n[i] > g.n[i]) {
        // At ρ_0 with r_i = t: f = c t^{k+e}, g = c' t^e with k ≥ 1, so
        // t ≤ min(1/2, c'/2c) gives f ≤ c t · t^e < c' t^e.
        let half = Value::from_ratio(1, 2).expect("1/2");
        let ratio = &(&g.c / &f.c) * &half;
        let t = if ratio < half { ratio } else { half };
        let mut point = vec![Value::one(); sk.model.l()];
        point[i] = t;
        debug_assert!(f.eval(&point).unwrap() < g.eval(&point).unwrap());
        return PlComparison::Refuted { point };
    }
    PlComparison::Holds
}

fn geq_single_rhs(f: &PlFunction, g: &PlTerm, sk: &Skeleton) -> PlComparison {
    if let [only] = f.terms.as_slice() {
        return single_geq(sk, only, g);
    }
    if f.terms
        .iter()
        .any(|t| single_geq(sk, t, g) == PlComparison::Holds)
    {
        return PlComparison::Holds;
    }
    for point in sk.probe_points() {
        let fv = f.eval(&point).expect("probe points lie in Δ");
        let gv = g.eval(&point).expect("probe points lie in Δ");
        if fv < gv {
            return PlComparison::Refuted { point };
        }
    }
    PlComparison::Unknown
}

/// Decides `f ≥ g` on all of `Δ` where the vertex method applies.
pub fn pl_geq(f: &PlFunction, g: &PlFunction, sk: &Skeleton) -> PlComparison {
    let mut unknown = false;
    for gt in &g.terms {
        match geq_single_rhs(f, gt, sk) {
            PlComparison::Holds => {}
            refuted @ PlComparison::Refuted { .. } => return refuted,
            PlComparison::Unknown => unknown = true,
        }
    }
    if unknown {
        PlComparison::Unknown
    } else {
        PlComparison::Holds
    }
}

/// The single power function equal to `f` on `Δ`, if any. Since dominated
/// terms are already removed this is exactly the singleton case.
pub fn is_power_on_delta(f: &PlFunction, _sk: &Skeleton) -> Option<PlTerm> {
    match f.terms.as_slice() {
        [only] => Some(only.clone()),
        _ => None,
    }
}

/// `f·g` is a power function iff both `f` and `g` are. Any `false` return
/// is a counterexample to that statement.
pub fn check_product_power_property(f: &PlFunction, g: &PlFunction, sk: &Skeleton) -> bool {
    let fg = f.product(g, sk);
    is_power_on_delta(&fg, sk).is_some()
        == (is_power_on_delta(f, sk).is_some() && is_power_on_delta(g, sk).is_some())
}

/// `log_π` weights of an interior point, for diagnostics.
pub fn simplex_weights(model: &ModelAlgebra, point: &[Value]) -> Option<Vec<Rational>> {
    let lp = model.pi().log()?;
    let mut out = Vec::with_capacity(model.m() + 1);
    out.push(model.r0(point).log()?.ratio_to(&lp)?);
    for r in &point[..model.m()] {
        out.push(r.log()?.ratio_to(&lp)?);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial_algebra::Coefficient;
    use crate::rational::int;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    fn model(l: usize, m: usize) -> ModelAlgebra {
        ModelAlgebra::new(l, m, v("1/2")).unwrap()
    }

    fn term(c: &str, n: &[i64]) -> PlTerm {
        PlTerm {
            c: v(c),
            n: n.to_vec(),
        }
    }

    fn func(sk: &Skeleton, terms: &[(&str, &[i64])]) -> PlFunction {
        PlFunction::new(sk, terms.iter().map(|(c, n)| term(c, n))).unwrap()
    }

    #[test]
    fn vertex_examples() {
        let sk = Skeleton::new(&model(1, 1));
        assert_eq!(sk.vertices(), vec![vec![v("1")], vec![v("1/2")]]);
        let sk0 = Skeleton::new(&model(2, 0));
        assert_eq!(sk0.vertices(), vec![vec![v("1"), v("1")]]);
        let sk21 = Skeleton::new(&model(2, 1));
        let vs = sk21.vertices();
        assert_eq!(vs.len(), 2);
        assert!(vs.iter().all(|p| p[1].is_one()));
    }

    #[test]
    fn geq_examples() {
        let sk = Skeleton::new(&model(1, 1));
        let t0 = func(&sk, &[("1/2", &[-1])]);
        let pi = func(&sk, &[("1/2", &[0])]);
        assert_eq!(pl_geq(&t0, &pi, &sk), PlComparison::Holds);
        assert_eq!(pl_geq(&t0, &t0, &sk), PlComparison::Holds);

        let sk21 = Skeleton::new(&model(2, 1));
        let t1 = func(&sk21, &[("1", &[1, 0])]);
        let t2 = func(&sk21, &[("1", &[0, 1])]);
        match pl_geq(&t1, &t2, &sk21) {
            PlComparison::Refuted { point } => {
                assert_eq!(point, vec![v("1/2"), v("1")]);
            }
            other => panic!("expected refutation, got {other:?}"),
        }
    }

    #[test]
    fn tail_refutation_point_is_exact() {
        let sk = Skeleton::new(&model(2, 1));
        // c r_2^2 vs r_2 with c = 1 > 1/3: vertices agree, tail fails
        let f = func(&sk, &[("1", &[0, 2])]);
        let g = func(&sk, &[("1/3", &[0, 1])]);
        match pl_geq(&f, &g, &sk) {
            PlComparison::Refuted { point } => {
                assert!(f.eval(&point).unwrap() < g.eval(&point).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multi_term_left_side_can_be_unknown() {
        let sk = Skeleton::new(&model(1, 1));
        // max(r_1, π/r_1) ≥ π^{1/2} on Δ, but neither term alone dominates.
        let f = func(&sk, &[("1", &[1]), ("1/2", &[-1])]);
        let g = PlFunction::new(&sk, [PlTerm { c: v("2^(-1/2)"), n: vec![0] }]).unwrap();
        assert_eq!(pl_geq(&f, &g, &sk), PlComparison::Unknown);
        // ... while max(r_1, π/r_1) ≥ 1 fails in the interior
        let one = func(&sk, &[("1", &[0])]);
        assert!(matches!(pl_geq(&f, &one, &sk), PlComparison::Refuted { .. }));
    }

    #[test]
    fn power_examples() {
        let m11 = model(1, 1);
        let sk = Skeleton::new(&m11);
        let a = SpecialPoly::from_terms(
            &m11,
            [
                (vec![0], Coefficient::from_value(v("1/2"))),
                (vec![1], Coefficient::one()),
            ],
        )
        .unwrap();
        let f = PlFunction::from_poly(&a).unwrap();
        assert_eq!(is_power_on_delta(&f, &sk), Some(term("1", &[1])));

        let sk21 = Skeleton::new(&model(2, 1));
        let f = func(&sk21, &[("1", &[1, 0]), ("1", &[0, 1])]);
        assert_eq!(f.terms().len(), 2);
        assert_eq!(is_power_on_delta(&f, &sk21), None);
    }

    #[test]
    fn product_power_examples() {
        let sk = Skeleton::new(&model(1, 1));
        let f = func(&sk, &[("1", &[0]), ("1", &[1])]);
        assert!(check_product_power_property(&f, &f, &sk));
        let prod = f.product(&f, &sk);
        // r_1 and r_1^2 are both dominated by the constant on Δ
        assert_eq!(prod.terms().len(), 1, "{prod:?}");
        let g = func(&sk, &[("1", &[1]), ("1/2", &[-1])]);
        assert!(is_power_on_delta(&g, &sk).is_none());
        assert!(check_product_power_property(&g, &g, &sk));
        let mono = func(&sk, &[("1/3", &[2])]);
        assert!(check_product_power_property(&mono, &mono, &sk));
    }

    #[test]
    fn interior_points_are_interior() {
        let m = model(3, 2);
        let sk = Skeleton::new(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = sk.interior_point(&mut rng, 12);
            assert!(m.check_point(&p).is_ok());
            let w = simplex_weights(&m, &p).unwrap();
            assert!(w.iter().all(|x| *x > int(0)));
            assert_eq!(w.iter().sum::<Rational>(), int(1));
            assert!(p[2] < Value::one());
        }
    }
}

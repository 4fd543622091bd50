//! One handler per subcommand. Payloads are typed structs; results are
//! built as JSON with values and rationals written as exact strings.

use serde::Deserialize;
use serde_json::{json, Value as Json};

use ss_skeleton::covering_engine::{
    build_covering_with, certify, choose_lambda, leaf_skeleton, render_csv, render_svg,
    triangulate_leaf, verify_covering, AnnuliModel, CoverConfig, CoveringCertificate,
};
use ss_skeleton::monomial_algebra::{
    divides_witness, dominates_criterion, dominating_monomial, factor_generic_unit, is_unit_r,
    is_unit_r_eta, Coefficient, ModelAlgebra, SpecialPoly,
};
use ss_skeleton::pl_engine::{
    check_product_power_property, is_power_on_delta, pl_geq, PlComparison, PlFunction, PlTerm,
    Skeleton,
};
use ss_skeleton::rational::{self, format_rational, Rational};
use ss_skeleton::{in_r_power_class, selftest as suite, Value};

use crate::poly::parse_poly;
use crate::{CliError, CliResult, Command, IoArgs, Outcome, Request};

pub fn dispatch(command: Command, req: &Request, io: &IoArgs) -> CliResult<Outcome> {
    match command {
        Command::ValueCmp => value_cmp(req.payload()?),
        Command::Special => special(req.payload()?),
        Command::Eval => eval(req.payload()?),
        Command::Dominates => dominates(req.payload()?),
        Command::Units => units(req.payload()?),
        Command::Factor => factor(req.payload()?),
        Command::Cover => cover(req, io),
        Command::Verify => verify(req.payload()?),
        Command::Selftest { .. } => unreachable!("handled by the caller"),
    }
}

/// A polynomial in text form (`"t_0 + t_1^2"`) or as special terms over `t_1..t_l`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PolyInput {
    Text(String),
    Terms(Vec<TermInput>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermInput {
    n: Vec<i64>,
    coeff: Coefficient,
}

impl PolyInput {
    fn resolve(&self, model: &ModelAlgebra) -> CliResult<SpecialPoly> {
        Ok(match self {
            PolyInput::Text(text) => parse_poly(text, model)?,
            PolyInput::Terms(terms) => SpecialPoly::from_terms(
                model,
                terms.iter().map(|t| (t.n.clone(), t.coeff.clone())),
            )?,
        })
    }
}

fn value_str(v: &Value) -> Json {
    Json::String(v.to_string())
}

fn rational_str(x: &Rational) -> Json {
    Json::String(format_rational(x))
}

fn coefficient_json(c: &Coefficient) -> Json {
    match c.terms() {
        [(k, gamma)] if k == &rational::int(1) => value_str(gamma),
        _ => serde_json::to_value(c).expect("coefficients serialize"),
    }
}

fn poly_json(p: &SpecialPoly) -> Json {
    json!({
        "text": p.to_string(),
        "terms": p
            .terms()
            .map(|(n, c)| json!({ "n": n, "coeff": coefficient_json(c) }))
            .collect::<Vec<_>>(),
    })
}

fn pl_term_json(t: &PlTerm) -> Json {
    json!({ "c": value_str(&t.c), "n": t.n })
}

fn point_json(point: &[Value]) -> Json {
    Json::Array(point.iter().map(value_str).collect())
}

fn comparison_json(c: &PlComparison) -> Json {
    match c {
        PlComparison::Refuted { point } => json!({ "result": c.as_str(), "point": point_json(point) }),
        _ => json!({ "result": c.as_str() }),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueCmpPayload {
    a: Value,
    b: Value,
    #[serde(default, with = "rational::option")]
    exponent: Option<Rational>,
    #[serde(default)]
    r: Option<Value>,
}

fn value_cmp(p: ValueCmpPayload) -> CliResult<Outcome> {
    let cmp = match p.a.cmp(&p.b) {
        std::cmp::Ordering::Less => "less",
        std::cmp::Ordering::Equal => "equal",
        std::cmp::Ordering::Greater => "greater",
    };
    let mut out = json!({
        "a": value_str(&p.a),
        "b": value_str(&p.b),
        "cmp": cmp,
        "product": value_str(&(&p.a * &p.b)),
    });
    if let Some(e) = &p.exponent {
        out["power"] = value_str(&p.a.pow(e)?);
    }
    if let Some(r) = &p.r {
        let class = |v: &Value| -> CliResult<Json> {
            Ok(in_r_power_class(v, r)?.as_ref().map_or(Json::Null, rational_str))
        };
        out["r"] = value_str(r);
        out["a_class"] = class(&p.a)?;
        out["b_class"] = class(&p.b)?;
    }
    Ok(Outcome::new(out, true))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyPayload {
    model: ModelAlgebra,
    poly: PolyInput,
    /// A second factor for the power-product check (`special` only).
    #[serde(default)]
    times: Option<PolyInput>,
}

fn nonzero(p: SpecialPoly, what: &str) -> CliResult<SpecialPoly> {
    if p.is_zero() {
        return Err(ss_skeleton::Error::invariant("a != 0", format!("{what} is zero")).into());
    }
    Ok(p)
}

fn special(p: PolyPayload) -> CliResult<Outcome> {
    let a = nonzero(p.poly.resolve(&p.model)?, "poly")?;
    let sk = Skeleton::new(&p.model);
    let f = PlFunction::from_poly(&a)?;
    let mut out = json!({
        "special": poly_json(&a),
        "dominating_monomial": dominating_monomial(&a),
        "pl": f.terms().iter().map(pl_term_json).collect::<Vec<_>>(),
        "power_on_delta": is_power_on_delta(&f, &sk).as_ref().map(pl_term_json),
        "vertices": sk.vertices().iter().map(|v| point_json(v)).collect::<Vec<_>>(),
    });
    if let Some(times) = &p.times {
        let b = nonzero(times.resolve(&p.model)?, "times")?;
        let g = PlFunction::from_poly(&b)?;
        out["product"] = poly_json(&(&a * &b));
        out["product_power_property"] = json!(check_product_power_property(&f, &g, &sk));
    }
    Ok(Outcome::new(out, true))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalPayload {
    model: ModelAlgebra,
    poly: PolyInput,
    point: Vec<Value>,
}

fn eval(p: EvalPayload) -> CliResult<Outcome> {
    let a = p.poly.resolve(&p.model)?;
    let value = a.eval(&p.point)?;
    let out = json!({
        "value": value_str(&value),
        "r_0": value_str(&p.model.r0(&p.point)),
    });
    Ok(Outcome::new(out, true))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominatesPayload {
    model: ModelAlgebra,
    a: PolyInput,
    b: PolyInput,
}

fn dominates(p: DominatesPayload) -> CliResult<Outcome> {
    let a = nonzero(p.a.resolve(&p.model)?, "a")?;
    let b = nonzero(p.b.resolve(&p.model)?, "b")?;
    let sk = Skeleton::new(&p.model);
    let pl = pl_geq(&PlFunction::from_poly(&a)?, &PlFunction::from_poly(&b)?, &sk);
    let mut out = json!({ "pl": comparison_json(&pl) });
    let verdict = match (a.monomials().as_slice(), b.monomials().as_slice()) {
        ([ma], [mb]) => {
            let criterion = dominates_criterion(&p.model, ma, mb);
            let witness = divides_witness(&p.model, ma, mb);
            out["criterion"] = json!(criterion);
            out["witness"] = witness.map_or(Json::Null, |w| Json::String(w.to_string()));
            Some(criterion)
        }
        _ => match pl {
            PlComparison::Holds => Some(true),
            PlComparison::Refuted { .. } => Some(false),
            PlComparison::Unknown => None,
        },
    };
    out["dominates"] = verdict.map_or(Json::Null, Json::Bool);
    Ok(Outcome::new(out, verdict == Some(true)))
}

fn units(p: PolyPayload) -> CliResult<Outcome> {
    let a = nonzero(p.poly.resolve(&p.model)?, "poly")?;
    let eta = is_unit_r_eta(&a);
    let out = json!({
        "unit_R": is_unit_r(&a),
        "unit_R_eta": eta,
        "dominating_monomial": dominating_monomial(&a),
    });
    Ok(Outcome::new(out, eta))
}

fn factor(p: PolyPayload) -> CliResult<Outcome> {
    let a = nonzero(p.poly.resolve(&p.model)?, "poly")?;
    match factor_generic_unit(&a) {
        Ok(f) => {
            let recomposes = f.recompose()? == a;
            let out = json!({
                "generic_unit": true,
                "u": poly_json(&f.u),
                "pi_prime": coefficient_json(&f.pi_prime),
                "n": f.n,
                "recomposes": recomposes,
            });
            Ok(Outcome::new(out, recomposes))
        }
        Err(e) => Ok(Outcome::new(
            json!({ "generic_unit": false, "reason": e.to_string() }),
            false,
        )),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelPayload {
    model: AnnuliModel,
    #[serde(default)]
    config: CoverConfig,
    /// Report the chart ranges of this leaf instead of the certificate.
    #[serde(default)]
    leaf: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaPayload {
    lambda: LambdaRequest,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaRequest {
    target: Value,
    #[serde(with = "rational")]
    exponent: Rational,
    r: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulatePayload {
    triangulate: TriangulateRequest,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulateRequest {
    #[serde(with = "rational")]
    a: Rational,
    #[serde(with = "rational")]
    b: Rational,
}

fn cover(req: &Request, io: &IoArgs) -> CliResult<Outcome> {
    let json = req.json()?;
    if json.get("lambda").is_some() {
        let p: LambdaPayload = req.payload()?;
        let choice = choose_lambda(&p.lambda.target, &p.lambda.exponent, &p.lambda.r, ss_skeleton::value_group::max_denominator())?;
        return Ok(Outcome::new(
            json!({ "q": rational_str(&choice.q), "s": value_str(&choice.s) }),
            true,
        ));
    }
    if json.get("triangulate").is_some() {
        let p: TriangulatePayload = req.payload()?;
        let triangles = triangulate_leaf(&p.triangulate.a, &p.triangulate.b)?;
        let area = triangles
            .iter()
            .fold(Rational::from_integer(0.into()), |acc, t| acc + t.area());
        let out = json!({
            "scale": triangles.first().map(|t| t.scale),
            "count": triangles.len(),
            "area": rational_str(&area),
            "unimodular": triangles.iter().all(|t| t.is_unimodular()),
            "triangles": triangles,
        });
        return Ok(Outcome::new(out, true));
    }
    let (model, config, leaf) = if json.get("model").is_some() {
        let p: ModelPayload = req.payload()?;
        (p.model, p.config, p.leaf)
    } else {
        (req.payload::<AnnuliModel>()?, CoverConfig::default(), None)
    };
    let tree = build_covering_with(&model, &config)?;
    if let Some(id) = leaf {
        let sk = leaf_skeleton(&tree, &id)?;
        return Ok(Outcome::new(serde_json::to_value(&sk)?, true));
    }
    let cert = certify(&tree)?;
    log::info!(
        "covering: {} splits, {} leaves, {} triangles, valid = {}",
        cert.splits.len(),
        cert.leaves.len(),
        cert.triangle_count(),
        cert.verdict.valid
    );
    let mut outcome = Outcome::new(serde_json::to_value(&cert)?, cert.verdict.valid);
    if let Some(path) = &io.emit_svg {
        outcome.files.push((path.clone(), render_svg(&cert)));
    }
    if let Some(path) = &io.emit_csv {
        outcome.files.push((path.clone(), render_csv(&cert)));
    }
    Ok(outcome)
}

fn verify(cert: CoveringCertificate) -> CliResult<Outcome> {
    let report = verify_covering(&cert)?;
    log::info!("{report}");
    let valid = report.valid;
    Ok(Outcome::new(serde_json::to_value(&report)?, valid))
}

pub fn selftest(seed: u64, trials: usize) -> CliResult<Outcome> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let report = suite::run(seed, trials);
    for item in &report.items {
        log::info!("{}: {}/{} failures", item.name, item.failures, item.trials);
    }
    let passed = report.passed;
    Ok(Outcome::new(serde_json::to_value(&report)?, passed))
}

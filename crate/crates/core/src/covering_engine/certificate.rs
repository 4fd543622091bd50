use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::lambda::power;
use super::tree::{ChartNode, ChartTree, Constants, NodeKind};
use super::triangulate::{segments, triangulate_region, LeafRegion, Point, Segment, Triangle};
use super::{AnnuliModel, ResolvedConfig};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::value_group::{in_r_power_class, LogValue, Value};

pub const CERTIFICATE_FORMAT: &str = "ss-skeleton-certificate";
pub const CERTIFICATE_VERSION: u32 = 1;

/// A closed interval `[lo, hi]` of absolute values.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Value,
    pub hi: Value,
}

impl Interval {
    pub fn new(lo: Value, hi: Value) -> Self {
        Interval { lo, hi }
    }

    pub fn is_proper(&self) -> bool {
        self.lo < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = if self.hi < other.hi {
            self.hi.clone()
        } else {
            other.hi.clone()
        };
        (lo <= hi).then(|| Interval::new(lo, hi))
    }

    pub fn scale_down(&self, s: &Value) -> Interval {
        Interval::new(&self.lo / s, &self.hi / s)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One side of the target: the radius, its logarithm, and its `r`-exponent
/// when that is rational.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisTarget {
    pub radius: Value,
    pub log: LogValue,
    #[serde(with = "rational::option")]
    pub r_exponent: Option<Rational>,
    pub interval: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverTarget {
    pub log_r: LogValue,
    pub base: AxisTarget,
    pub fiber: AxisTarget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartRecord {
    pub child: String,
    pub substitution: String,
    /// Range of the split axis covered by this chart.
    pub interval: Interval,
    pub base_constant: Value,
    pub fiber_constant: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub id: String,
    pub kind: NodeKind,
    /// The coordinate whose range is split, absent for the pigeonhole case `m ≥ 2`.
    pub axis: Option<String>,
    pub target: Value,
    #[serde(with = "rational")]
    pub exponent_bound: Rational,
    pub s: Value,
    #[serde(with = "rational")]
    pub q: Rational,
    pub parent_interval: Option<Interval>,
    pub charts: Vec<ChartRecord>,
    pub overlap: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub id: String,
    pub kind: NodeKind,
    pub base_constant: Value,
    pub fiber_constant: Value,
    #[serde(with = "rational::option")]
    pub a: Option<Rational>,
    #[serde(with = "rational::option")]
    pub b: Option<Rational>,
    pub region: Option<LeafRegion>,
    pub scale: Option<u64>,
    pub triangles: Vec<Triangle>,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    pub failed_checks: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringCertificate {
    pub format: String,
    pub version: u32,
    pub model: AnnuliModel,
    pub config: ResolvedConfig,
    pub target: CoverTarget,
    pub splits: Vec<SplitRecord>,
    pub leaves: Vec<LeafRecord>,
    pub verdict: Verdict,
}

impl CoveringCertificate {
    pub fn triangle_count(&self) -> usize {
        self.leaves.iter().map(|l| l.triangles.len()).sum()
    }

    pub fn leaf(&self, id: &str) -> Option<&LeafRecord> {
        self.leaves.iter().find(|l| l.id == id)
    }

    pub fn split(&self, id: &str) -> Option<&SplitRecord> {
        self.splits.iter().find(|s| s.id == id)
    }
}

/// Chart ranges of one split of the constant `c` by `s`.
struct Geometry {
    axis: Option<String>,
    parent: Option<Interval>,
    charts: Vec<Interval>,
    overlap: Option<Interval>,
}

/// Chart 0 (`x'_0 = x_0/λ`) covers `|x_0| ∈ [c, s]`; chart 1 (`x'_1 = x_1/λ`)
/// covers `|x_0| ∈ [c/s, 1]`. The base split with `m = 1` is the same on
/// `|t_0|`; `m = 0` has a single point chart, and `m ≥ 2` covers by
/// pigeonhole with `|t_i| ∈ [c, s]` on chart `i`.
fn geometry(kind: NodeKind, m: usize, c: &Value, s: &Value) -> Geometry {
    let one = Value::one();
    let two_charts = |axis: &str| Geometry {
        axis: Some(axis.into()),
        parent: Some(Interval::new(c.clone(), one.clone())),
        charts: vec![
            Interval::new(c.clone(), s.clone()),
            Interval::new(c / s, one.clone()),
        ],
        overlap: Some(Interval::new(c / s, s.clone())),
    };
    match (kind, m) {
        (NodeKind::FiberSplit, _) => two_charts("x_0"),
        (_, 1) => two_charts("t_0"),
        (_, 0) => Geometry {
            axis: Some("t_0".into()),
            parent: Some(Interval::new(c.clone(), c.clone())),
            charts: vec![Interval::new(c.clone(), c.clone())],
            overlap: None,
        },
        _ => Geometry {
            axis: None,
            parent: None,
            charts: vec![Interval::new(c.clone(), s.clone()); m + 1],
            overlap: None,
        },
    }
}

fn base_axis_interval(m: usize, c: &Value) -> Interval {
    if m == 0 {
        Interval::new(c.clone(), c.clone())
    } else {
        Interval::new(c.clone(), Value::one())
    }
}

/// The skeleton of a leaf chart in `(u, v) = (log_r|t_1|, log_r|x_0|)`.
pub(crate) fn leaf_region(m: usize, n: &[u64], a: &Rational, b: &Rational) -> LeafRegion {
    let shift = |k: u64| b + a * Rational::from_integer(k.into());
    if m == 1 {
        LeafRegion {
            width: a.clone(),
            left: shift(n[0]),
            right: shift(n[1]),
        }
    } else {
        let h = shift(n[0]);
        LeafRegion {
            width: Rational::zero(),
            left: h.clone(),
            right: h,
        }
    }
}

pub(crate) fn leaf_scale(a: &Rational, b: &Rational) -> u64 {
    rational::lcm_of_denominators([a, b])
        .to_u64()
        .expect("scale fits in u64")
}

fn leaf_cells(region: &LeafRegion, scale: u64) -> Result<(Vec<Triangle>, Vec<Segment>)> {
    match region.dimension() {
        2 => Ok((triangulate_region(region, scale)?, Vec::new())),
        1 if region.width.is_positive() => Ok((Vec::new(), segments(&region.width, 0, scale)?)),
        1 => Ok((Vec::new(), segments(&region.left, 1, scale)?)),
        _ => Ok((Vec::new(), Vec::new())),
    }
}

fn axis_target(v: &Value, r: &Value, interval: Interval) -> Result<AxisTarget> {
    Ok(AxisTarget {
        radius: v.clone(),
        log: v.log().expect("nonzero radius"),
        r_exponent: in_r_power_class(v, r)?,
        interval,
    })
}

fn cover_target(model: &AnnuliModel) -> Result<CoverTarget> {
    let r = model.r();
    Ok(CoverTarget {
        log_r: r.log().expect("nonzero r"),
        base: axis_target(model.pi_0(), r, base_axis_interval(model.m(), model.pi_0()))?,
        fiber: axis_target(
            model.pi_1(),
            r,
            Interval::new(model.pi_1().clone(), Value::one()),
        )?,
    })
}

fn split_record(model: &AnnuliModel, node: &ChartNode) -> SplitRecord {
    let info = node.split.as_ref().expect("split node");
    let geo = geometry(node.kind, model.m(), &info.target, &info.lambda.s);
    let charts = node
        .children
        .iter()
        .zip(geo.charts)
        .map(|(child, interval)| ChartRecord {
            child: child.id.clone(),
            substitution: child.substitution.clone().unwrap_or_default(),
            interval,
            base_constant: child.constants.base.clone(),
            fiber_constant: child.constants.fiber.clone(),
        })
        .collect();
    SplitRecord {
        id: node.id.clone(),
        kind: node.kind,
        axis: geo.axis,
        target: info.target.clone(),
        exponent_bound: info.exponent_bound.clone(),
        s: info.lambda.s.clone(),
        q: info.lambda.q.clone(),
        parent_interval: geo.parent,
        charts,
        overlap: geo.overlap,
    }
}

fn leaf_record(model: &AnnuliModel, node: &ChartNode) -> Result<LeafRecord> {
    let mut record = LeafRecord {
        id: node.id.clone(),
        kind: node.kind,
        base_constant: node.constants.base.clone(),
        fiber_constant: node.constants.fiber.clone(),
        a: node.a.clone(),
        b: node.b.clone(),
        region: None,
        scale: None,
        triangles: Vec::new(),
        segments: Vec::new(),
    };
    if let (NodeKind::ToricLeaf, Some(a), Some(b)) = (node.kind, &node.a, &node.b) {
        let region = leaf_region(model.m(), model.fiber_exponents(), a, b);
        let scale = leaf_scale(a, b);
        let (triangles, segments) = leaf_cells(&region, scale)?;
        record.region = Some(region);
        record.scale = Some(scale);
        record.triangles = triangles;
        record.segments = segments;
    }
    Ok(record)
}

/// Turns a chart tree into a certificate and records its verification verdict.
pub fn certify(tree: &ChartTree) -> Result<CoveringCertificate> {
    let model = &tree.model;
    let nodes = tree.nodes();
    let splits = nodes
        .iter()
        .filter(|n| !n.kind.is_leaf())
        .map(|n| split_record(model, n))
        .collect();
    let leaves = nodes
        .iter()
        .filter(|n| n.kind.is_leaf())
        .map(|n| leaf_record(model, n))
        .collect::<Result<Vec<_>>>()?;
    let mut cert = CoveringCertificate {
        format: CERTIFICATE_FORMAT.into(),
        version: CERTIFICATE_VERSION,
        model: model.clone(),
        config: tree.config.clone(),
        target: cover_target(model)?,
        splits,
        leaves,
        verdict: Verdict {
            valid: false,
            failed_checks: Vec::new(),
        },
    };
    let report = verify_covering(&cert)?;
    cert.verdict = report.verdict();
    Ok(cert)
}

/// Where a leaf chart sits in the original coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeafSkeleton {
    pub id: String,
    /// Range of `|t_0|` covered (absent in the pigeonhole case `m ≥ 2`).
    pub base_interval: Option<Interval>,
    /// Range of `|x_0|` covered, in the coordinates before the fiber split.
    pub fiber_interval: Interval,
    /// Overlaps with sibling charts along the path.
    pub overlaps: Vec<Interval>,
    pub region: Option<LeafRegion>,
}

/// The chart ranges and skeleton of the leaf `id`.
pub fn leaf_skeleton(tree: &ChartTree, id: &str) -> Result<LeafSkeleton> {
    let model = &tree.model;
    let m = model.m();
    let mut path = Vec::new();
    let mut node = &tree.root;
    loop {
        if node.id == id {
            break;
        }
        let next = node
            .children
            .iter()
            .enumerate()
            .find(|(_, c)| id == c.id || id.starts_with(&format!("{}.", c.id)));
        match next {
            Some((i, child)) => {
                path.push((node, i));
                node = child;
            }
            None => return Err(Error::Precondition(format!("no chart with id {id}"))),
        }
    }
    if !node.kind.is_leaf() {
        return Err(Error::Precondition(format!("chart {id} is not a leaf")));
    }
    let mut base_interval = Some(base_axis_interval(m, model.pi_0()));
    let mut fiber_interval = Interval::new(node.constants.fiber.clone(), Value::one());
    let mut overlaps = Vec::new();
    for (parent, i) in path {
        let info = parent.split.as_ref().expect("split node");
        let geo = geometry(parent.kind, m, &info.target, &info.lambda.s);
        let interval = geo.charts[i].clone();
        match parent.kind {
            NodeKind::BaseSplit => base_interval = geo.parent.map(|_| interval),
            _ => fiber_interval = interval,
        }
        overlaps.extend(geo.overlap);
    }
    let region = match (&node.a, &node.b) {
        (Some(a), Some(b)) if node.kind == NodeKind::ToricLeaf => {
            Some(leaf_region(m, model.fiber_exponents(), a, b))
        }
        _ => None,
    };
    Ok(LeafSkeleton {
        id: id.into(),
        base_interval,
        fiber_interval,
        overlaps,
        region,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckId {
    Coverage = 1,
    Overlap = 2,
    Unimodular = 3,
    LeafTiling = 4,
    Resolved = 5,
}

impl CheckId {
    pub const ALL: [CheckId; 5] = [
        CheckId::Coverage,
        CheckId::Overlap,
        CheckId::Unimodular,
        CheckId::LeafTiling,
        CheckId::Resolved,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Coverage => "coverage",
            CheckId::Overlap => "overlap",
            CheckId::Unimodular => "unimodular",
            CheckId::LeafTiling => "leaf-tiling",
            CheckId::Resolved => "resolved",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub checks: Vec<CheckResult>,
    pub leaves: usize,
    pub triangles: usize,
    /// Whether the verdict stored in the certificate agrees with this one.
    pub stored_verdict_matches: bool,
}

impl VerificationReport {
    pub fn failed(&self) -> Vec<u8> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id)
            .collect()
    }

    pub fn check(&self, id: CheckId) -> &CheckResult {
        &self.checks[id as usize - 1]
    }

    pub fn verdict(&self) -> Verdict {
        Verdict {
            valid: self.valid,
            failed_checks: self.failed(),
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "ok" } else { "FAILED" };
            writeln!(f, "check {} ({}): {}", c.id, c.name, mark)?;
            for msg in &c.failures {
                writeln!(f, "  - {msg}")?;
            }
        }
        write!(
            f,
            "verdict: {} ({} leaves, {} triangles)",
            if self.valid { "valid" } else { "invalid" },
            self.leaves,
            self.triangles
        )
    }
}

#[derive(Default)]
struct Failures {
    by_check: BTreeMap<CheckId, Vec<String>>,
}

impl Failures {
    fn push(&mut self, check: CheckId, msg: impl Into<String>) {
        self.by_check.entry(check).or_default().push(msg.into());
    }
}

/// Checks a certificate against its own model, in exact arithmetic.
///
/// Nothing in the certificate is trusted beyond the model and configuration:
/// constants, λ values, chart ranges and leaf regions are all recomputed.
pub fn verify_covering(cert: &CoveringCertificate) -> Result<VerificationReport> {
    if cert.format != CERTIFICATE_FORMAT {
        return Err(Error::Parse(format!(
            "unknown certificate format {:?}",
            cert.format
        )));
    }
    if cert.version != CERTIFICATE_VERSION {
        return Err(Error::Parse(format!(
            "unsupported certificate version {}",
            cert.version
        )));
    }
    let mut f = Failures::default();
    check_target(cert, &mut f)?;
    check_tree(cert, &mut f);
    for split in &cert.splits {
        check_split(cert, split, &mut f);
    }
    for leaf in &cert.leaves {
        check_leaf(cert, leaf, &mut f)?;
    }
    let checks: Vec<CheckResult> = CheckId::ALL
        .iter()
        .map(|&id| {
            let failures = f.by_check.remove(&id).unwrap_or_default();
            CheckResult {
                id: id.number(),
                name: id.name(),
                passed: failures.is_empty(),
                failures,
            }
        })
        .collect();
    let valid = checks.iter().all(|c| c.passed);
    let failed: Vec<u8> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    Ok(VerificationReport {
        valid,
        leaves: cert.leaves.len(),
        triangles: cert.triangle_count(),
        stored_verdict_matches: cert.verdict.valid == valid && cert.verdict.failed_checks == failed,
        checks,
    })
}

fn check_target(cert: &CoveringCertificate, f: &mut Failures) -> Result<()> {
    let expected = cover_target(&cert.model)?;
    if cert.target != expected {
        f.push(
            CheckId::Coverage,
            "target does not match the model's radii".to_string(),
        );
    }
    let config = &cert.config;
    let m = cert.model.m();
    let base_max = Rational::new(1.into(), (m as i64 + 1).into());
    if !config.base_exponent.is_positive() || config.base_exponent > base_max {
        f.push(CheckId::Overlap, "base exponent outside (0, 1/(m+1)]");
    }
    if !config.fiber_exponent.is_positive() || config.fiber_exponent > rational::q(1, 2) {
        f.push(CheckId::Overlap, "fiber exponent outside (0, 1/2]");
    }
    Ok(())
}

/// The constants each chart must carry, recomputed from the model along the
/// declared splits.
fn expected_constants(cert: &CoveringCertificate) -> BTreeMap<String, Constants> {
    let model = &cert.model;
    let splits: BTreeMap<&str, &SplitRecord> =
        cert.splits.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut out = BTreeMap::new();
    let mut stack = vec![(
        "r".to_string(),
        Constants {
            base: model.pi_0().clone(),
            fiber: model.pi_1().clone(),
        },
    )];
    while let Some((id, consts)) = stack.pop() {
        if out.contains_key(&id) {
            continue;
        }
        if let Some(split) = splits.get(id.as_str()) {
            let s = &split.s;
            if !s.is_zero() {
                for (i, chart) in split.charts.iter().enumerate() {
                    let child = match split.kind {
                        NodeKind::BaseSplit => Constants {
                            base: &consts.base / s,
                            fiber: model.pi_1()
                                * &power(
                                    s,
                                    &Rational::from_integer(
                                        model.fiber_exponents().get(i).copied().unwrap_or(0).into(),
                                    ),
                                ),
                        },
                        _ => Constants {
                            base: consts.base.clone(),
                            fiber: &consts.fiber / s,
                        },
                    };
                    stack.push((chart.child.clone(), child));
                }
            }
        }
        out.insert(id, consts);
    }
    out
}

fn check_tree(cert: &CoveringCertificate, f: &mut Failures) {
    let mut kinds: BTreeMap<&str, NodeKind> = BTreeMap::new();
    for (id, kind) in cert
        .splits
        .iter()
        .map(|s| (s.id.as_str(), s.kind))
        .chain(cert.leaves.iter().map(|l| (l.id.as_str(), l.kind)))
    {
        if kinds.insert(id, kind).is_some() {
            f.push(CheckId::Coverage, format!("chart id {id} appears twice"));
        }
    }
    if !kinds.contains_key("r") {
        f.push(CheckId::Coverage, "no root chart r");
    }
    let mut referenced: BTreeSet<&str> = BTreeSet::new();
    for split in &cert.splits {
        if split.kind.is_leaf() {
            f.push(CheckId::Coverage, format!("split {} has a leaf kind", split.id));
        }
        if split.kind == NodeKind::BaseSplit && split.id != "r" {
            f.push(CheckId::Coverage, format!("base split {} is not at the root", split.id));
        }
        for chart in &split.charts {
            if !referenced.insert(chart.child.as_str()) {
                f.push(CheckId::Coverage, format!("chart {} has two parents", chart.child));
            }
            match kinds.get(chart.child.as_str()) {
                None => f.push(
                    CheckId::Coverage,
                    format!("split {}: chart {} is missing", split.id, chart.child),
                ),
                Some(NodeKind::BaseSplit) => f.push(
                    CheckId::Coverage,
                    format!("split {}: chart {} splits the base again", split.id, chart.child),
                ),
                Some(NodeKind::FiberSplit) if split.kind == NodeKind::FiberSplit => f.push(
                    CheckId::Coverage,
                    format!("split {}: chart {} splits the fiber again", split.id, chart.child),
                ),
                _ => {}
            }
        }
    }
    for id in kinds.keys() {
        if *id != "r" && !referenced.contains(id) {
            f.push(CheckId::Coverage, format!("chart {id} is not reachable from r"));
        }
    }
    for leaf in &cert.leaves {
        if !leaf.kind.is_leaf() {
            f.push(CheckId::Coverage, format!("leaf {} has a split kind", leaf.id));
        }
    }
}

/// Reports gaps and overhangs of `charts` inside `parent`.
fn sweep(parent: &Interval, charts: &[&Interval]) -> Vec<String> {
    let mut out = Vec::new();
    let mut sorted: Vec<&Interval> = charts.to_vec();
    sorted.sort_by(|x, y| x.lo.cmp(&y.lo).then(x.hi.cmp(&y.hi)));
    let mut reach = parent.lo.clone();
    for iv in sorted {
        if iv.lo > iv.hi {
            out.push(format!("empty interval {iv}"));
            continue;
        }
        if iv.lo < parent.lo || iv.hi > parent.hi {
            out.push(format!("interval {iv} leaves the target {parent}"));
        }
        if iv.lo > reach {
            out.push(format!("gap ({}, {})", reach, iv.lo));
        }
        if iv.hi > reach {
            reach = iv.hi.clone();
        }
    }
    if charts.is_empty() {
        out.push(format!("no charts cover {parent}"));
    } else if reach < parent.hi {
        out.push(format!("gap ({}, {})", reach, parent.hi));
    }
    out
}

fn check_split(cert: &CoveringCertificate, split: &SplitRecord, f: &mut Failures) {
    let model = &cert.model;
    let m = model.m();
    let id = &split.id;
    let expected = expected_constants(cert);
    let Some(consts) = expected.get(id) else {
        return;
    };
    let (target, bound, arity) = match split.kind {
        NodeKind::BaseSplit => (&consts.base, &cert.config.base_exponent, m + 1),
        NodeKind::FiberSplit => (&consts.fiber, &cert.config.fiber_exponent, 2),
        _ => return,
    };
    let one = Value::one();

    // check 1: the split is the one the model prescribes and its charts cover
    if split.target != *target {
        f.push(
            CheckId::Coverage,
            format!("split {id}: target {} should be {target}", split.target),
        );
    }
    if split.s.is_zero() || split.s != target * &power(model.r(), &split.q) {
        f.push(
            CheckId::Coverage,
            format!(
                "split {id}: s = {} is not target * r^{}",
                split.s,
                rational::format_rational(&split.q)
            ),
        );
        return;
    }
    if split.charts.len() != arity {
        f.push(
            CheckId::Coverage,
            format!("split {id}: {} charts, expected {arity}", split.charts.len()),
        );
    }
    let geo = geometry(split.kind, m, target, &split.s);
    if split.axis != geo.axis {
        f.push(CheckId::Coverage, format!("split {id}: wrong axis"));
    }
    let declared: Vec<&Interval> = split.charts.iter().map(|c| &c.interval).collect();
    match (&split.parent_interval, &geo.parent) {
        (Some(parent), Some(want)) => {
            if parent != want {
                f.push(
                    CheckId::Coverage,
                    format!("split {id}: parent interval {parent} should be {want}"),
                );
            }
            for msg in sweep(want, &declared) {
                f.push(CheckId::Coverage, format!("split {id}: {msg}"));
            }
        }
        (None, None) => {
            // pigeonhole: some |t_i| ≤ s as soon as s^{m+1} ≥ π_0
            let pow = power(&split.s, &Rational::from_integer((m as i64 + 1).into()));
            if pow < *target {
                f.push(CheckId::Coverage, format!("split {id}: s^(m+1) < r_0"));
            }
        }
        _ => f.push(
            CheckId::Coverage,
            format!("split {id}: parent interval does not match the split shape"),
        ),
    }
    for (i, chart) in split.charts.iter().enumerate() {
        if let Some(want) = geo.charts.get(i) {
            if chart.interval != *want {
                f.push(
                    CheckId::Coverage,
                    format!(
                        "split {id}: chart {} covers {} but its lift is {want}",
                        chart.child, chart.interval
                    ),
                );
            }
        }
        match expected.get(&chart.child) {
            Some(c) if c.base == chart.base_constant && c.fiber == chart.fiber_constant => {}
            Some(c) => f.push(
                CheckId::Coverage,
                format!(
                    "split {id}: chart {} constants ({}, {}) should be ({}, {})",
                    chart.child, chart.base_constant, chart.fiber_constant, c.base, c.fiber
                ),
            ),
            None => {}
        }
    }

    // check 2: λ admissibility and nonempty overlaps
    if split.exponent_bound != *bound {
        f.push(CheckId::Overlap, format!("split {id}: exponent bound differs from config"));
    }
    if split.s >= one || split.s <= power(target, bound) {
        f.push(
            CheckId::Overlap,
            format!("split {id}: s = {} outside (target^e, 1)", split.s),
        );
    }
    let k = match split.kind {
        NodeKind::BaseSplit => m as i64 + 1,
        _ => 2,
    };
    if power(&split.s, &Rational::from_integer(k.into())) <= *target {
        f.push(
            CheckId::Overlap,
            format!("split {id}: s^{k} = {} does not exceed {target}", power(&split.s, &Rational::from_integer(k.into()))),
        );
    }
    match (&split.overlap, &geo.overlap) {
        (Some(declared_overlap), Some(_)) => {
            let actual = match declared.as_slice() {
                [x, y] => x.intersect(y),
                _ => None,
            };
            match actual {
                Some(actual) if actual == *declared_overlap && actual.is_proper() => {}
                Some(actual) => f.push(
                    CheckId::Overlap,
                    format!(
                        "split {id}: declared overlap {declared_overlap}, charts meet in {actual}"
                    ),
                ),
                None => f.push(
                    CheckId::Overlap,
                    format!("split {id}: charts do not overlap"),
                ),
            }
        }
        (None, None) => {}
        (None, Some(_)) => f.push(CheckId::Overlap, format!("split {id}: overlap missing")),
        (Some(_), None) => f.push(
            CheckId::Overlap,
            format!("split {id}: unexpected overlap record"),
        ),
    }
}

fn check_leaf(cert: &CoveringCertificate, leaf: &LeafRecord, f: &mut Failures) -> Result<()> {
    let model = &cert.model;
    let id = &leaf.id;
    let expected = expected_constants(cert);
    if let Some(c) = expected.get(id) {
        if c.base != leaf.base_constant || c.fiber != leaf.fiber_constant {
            f.push(
                CheckId::Coverage,
                format!("leaf {id}: constants differ from the model's charts"),
            );
        }
    }

    // check 3 holds for every cell that is present
    for (k, t) in leaf.triangles.iter().enumerate() {
        if !t.is_unimodular() {
            f.push(
                CheckId::Unimodular,
                format!(
                    "leaf {id}: triangle {k} {:?} has scaled determinant {}",
                    t.vertices,
                    rational::format_rational(&t.scaled_determinant())
                ),
            );
        }
    }
    for (k, s) in leaf.segments.iter().enumerate() {
        let len = (&s.end.0 - &s.start.0).abs() + (&s.end.1 - &s.start.1).abs();
        let axis_parallel = s.end.0 == s.start.0 || s.end.1 == s.start.1;
        let on_lattice = s.start.scaled(s.scale).is_some() && s.end.scaled(s.scale).is_some();
        if s.scale == 0
            || !axis_parallel
            || !on_lattice
            || len != Rational::new(1.into(), s.scale.into())
        {
            f.push(CheckId::Unimodular, format!("leaf {id}: segment {k} is not a unit step"));
        }
    }

    if leaf.kind == NodeKind::UnresolvedLeaf {
        f.push(CheckId::Resolved, format!("leaf {id} is unresolved"));
        return Ok(());
    }
    if model.m() > 1 {
        f.push(
            CheckId::Resolved,
            format!("leaf {id}: skeleton has dimension above 2"),
        );
        return Ok(());
    }

    // check 4: the leaf skeleton is tiled
    let a = in_r_power_class(&leaf.base_constant, model.r())?;
    let b = in_r_power_class(&leaf.fiber_constant, model.r())?;
    let (Some(a), Some(b)) = (a, b) else {
        f.push(
            CheckId::LeafTiling,
            format!("leaf {id}: a radius is not in r^Q"),
        );
        return Ok(());
    };
    if leaf.a.as_ref() != Some(&a) || leaf.b.as_ref() != Some(&b) {
        f.push(
            CheckId::LeafTiling,
            format!(
                "leaf {id}: exponents should be a = {}, b = {}",
                rational::format_rational(&a),
                rational::format_rational(&b)
            ),
        );
    }
    let region = leaf_region(model.m(), model.fiber_exponents(), &a, &b);
    let scale = leaf_scale(&a, &b);
    if leaf.region.as_ref() != Some(&region) {
        f.push(CheckId::LeafTiling, format!("leaf {id}: region differs from its radii"));
    }
    if leaf.scale != Some(scale) {
        f.push(CheckId::LeafTiling, format!("leaf {id}: scale should be {scale}"));
    }
    match region.dimension() {
        2 => {
            if !leaf.segments.is_empty() {
                f.push(CheckId::LeafTiling, format!("leaf {id}: segments in a 2-dimensional leaf"));
            }
            for msg in tiling_failures(&region, scale, &leaf.triangles) {
                f.push(CheckId::LeafTiling, format!("leaf {id}: {msg}"));
            }
        }
        1 => {
            if !leaf.triangles.is_empty() {
                f.push(CheckId::LeafTiling, format!("leaf {id}: triangles in a 1-dimensional leaf"));
            }
            let (axis, length) = if region.width.is_positive() {
                (0, &region.width)
            } else {
                (1, &region.left)
            };
            for msg in segment_failures(axis, length, scale, &leaf.segments) {
                f.push(CheckId::LeafTiling, format!("leaf {id}: {msg}"));
            }
        }
        _ => {
            if !leaf.triangles.is_empty() || !leaf.segments.is_empty() {
                f.push(CheckId::LeafTiling, format!("leaf {id}: cells in a point leaf"));
            }
        }
    }
    Ok(())
}

/// Exact tiling test on the lattice `(1/N) Z²`.
///
/// Vertices inside the region, total area equal to the region's, and every
/// edge either shared by exactly two triangles on opposite sides or lying on
/// the boundary. Together these force the triangles to cover each point of
/// the region exactly once.
fn tiling_failures(region: &LeafRegion, scale: u64, triangles: &[Triangle]) -> Vec<String> {
    let mut out = Vec::new();
    let n = Rational::from_integer(scale.into());
    let as_int = |x: &Rational| -> Option<i128> {
        let y = x * &n;
        y.is_integer().then(|| y.to_integer().to_i128()).flatten()
    };
    let (Some(w), Some(l), Some(r)) = (
        as_int(&region.width),
        as_int(&region.left),
        as_int(&region.right),
    ) else {
        out.push("region is not a lattice polygon at the leaf scale".into());
        return out;
    };
    // top edge: j·w = l·w + (r − l)·i
    let inside = |(i, j): (i128, i128)| i >= 0 && i <= w && j >= 0 && j * w <= l * w + (r - l) * i;
    let on_boundary = |p: (i128, i128), q: (i128, i128)| {
        (p.0 == 0 && q.0 == 0)
            || (p.0 == w && q.0 == w)
            || (p.1 == 0 && q.1 == 0)
            || (p.1 * w == l * w + (r - l) * p.0 && q.1 * w == l * w + (r - l) * q.0)
    };
    let mut doubled_area: i128 = 0;
    let mut edges: BTreeMap<((i128, i128), (i128, i128)), Vec<bool>> = BTreeMap::new();
    for (k, t) in triangles.iter().enumerate() {
        if t.scale != scale {
            out.push(format!("triangle {k} has scale {}, leaf has {scale}", t.scale));
            continue;
        }
        let pts: Option<Vec<(i128, i128)>> = t
            .vertices
            .iter()
            .map(|p| p.scaled(scale).map(|(i, j)| (i as i128, j as i128)))
            .collect();
        let Some(mut pts) = pts else {
            out.push(format!("triangle {k} is off the lattice"));
            continue;
        };
        if let Some(p) = pts.iter().find(|p| !inside(**p)) {
            out.push(format!(
                "triangle {k} has vertex {} outside the region",
                Point::from_scaled(p.0 as i64, p.1 as i64, scale)
            ));
        }
        let det = (pts[1].0 - pts[0].0) * (pts[2].1 - pts[0].1)
            - (pts[1].1 - pts[0].1) * (pts[2].0 - pts[0].0);
        if det == 0 {
            out.push(format!("triangle {k} is degenerate"));
            continue;
        }
        if det < 0 {
            pts.swap(1, 2);
        }
        doubled_area += det.abs();
        for e in 0..3 {
            let (p, q) = (pts[e], pts[(e + 1) % 3]);
            let key = if p < q { (p, q) } else { (q, p) };
            edges.entry(key).or_default().push(p < q);
        }
    }
    // 2·N²·area = w·(l + r)
    let want = w * (l + r);
    if doubled_area != want {
        out.push(format!(
            "triangle area {} differs from region area {}",
            rational::format_rational(&(Rational::from_integer(doubled_area.into()) / (&n * &n * Rational::from_integer(2.into())))),
            rational::format_rational(&region.area())
        ));
    }
    let point = |p: (i128, i128)| Point::from_scaled(p.0 as i64, p.1 as i64, scale);
    for ((p, q), dirs) in &edges {
        let ok = match dirs.as_slice() {
            [_] => on_boundary(*p, *q),
            [x, y] => x != y,
            _ => false,
        };
        if !ok {
            out.push(format!(
                "edge {} - {} is used {} time(s) inconsistently",
                point(*p),
                point(*q),
                dirs.len()
            ));
        }
    }
    out
}

fn segment_failures(axis: usize, length: &Rational, scale: u64, segs: &[Segment]) -> Vec<String> {
    let mut out = Vec::new();
    let coord = |p: &Point| if axis == 0 { p.0.clone() } else { p.1.clone() };
    let off = |p: &Point| if axis == 0 { p.1.clone() } else { p.0.clone() };
    let mut spans: Vec<(Rational, Rational)> = Vec::new();
    for (k, s) in segs.iter().enumerate() {
        if s.scale != scale {
            out.push(format!("segment {k} has scale {}, leaf has {scale}", s.scale));
        }
        if !off(&s.start).is_zero() || !off(&s.end).is_zero() {
            out.push(format!("segment {k} leaves the leaf axis"));
            continue;
        }
        let (x, y) = (coord(&s.start), coord(&s.end));
        spans.push(if x <= y { (x, y) } else { (y, x) });
    }
    spans.sort();
    let mut reach = Rational::zero();
    for (x, y) in &spans {
        if *x != reach {
            out.push(format!(
                "segments {} at {}",
                if *x > reach { "leave a gap" } else { "overlap" },
                rational::format_rational(&reach)
            ));
        }
        reach = y.clone();
    }
    if reach != *length {
        out.push(format!(
            "segments end at {}, leaf length is {}",
            rational::format_rational(&reach),
            rational::format_rational(length)
        ));
    }
    if length.is_positive() && spans.is_empty() {
        out.push("no segments".into());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering_engine::{build_covering, AnnuliModel};
    use crate::monomial_algebra::ModelAlgebra;
    use crate::rational::int;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    fn flagship() -> (ChartTree, CoveringCertificate) {
        let model = AnnuliModel::two_annuli(v("1/2"), v("1/3"), v("1/2")).unwrap();
        let tree = build_covering(&model).unwrap();
        let cert = certify(&tree).unwrap();
        (tree, cert)
    }

    #[test]
    fn two_annuli_certificate_is_valid() {
        let (_, cert) = flagship();
        let report = verify_covering(&cert).unwrap();
        assert!(report.valid, "{report}");
        assert!(cert.verdict.valid);
        assert_eq!(cert.triangle_count(), 4);
        assert_eq!(cert.leaves.len(), 2);
        let split = &cert.splits[0];
        assert_eq!(split.kind, NodeKind::FiberSplit);
        assert_eq!(split.charts[0].interval, Interval::new(v("1/3"), v("2/3")));
        assert_eq!(split.charts[1].interval, Interval::new(v("1/2"), Value::one()));
        assert_eq!(split.overlap, Some(Interval::new(v("1/2"), v("2/3"))));
    }

    #[test]
    fn leaf_skeleton_intervals() {
        let (tree, _) = flagship();
        let sk = leaf_skeleton(&tree, "r.0").unwrap();
        assert_eq!(sk.fiber_interval, Interval::new(v("1/3"), v("2/3")));
        assert_eq!(sk.overlaps, vec![Interval::new(v("1/2"), v("2/3"))]);
        assert_eq!(sk.region, Some(LeafRegion::rectangle(int(1), int(1))));
        let sk = leaf_skeleton(&tree, "r.1").unwrap();
        assert_eq!(sk.fiber_interval, Interval::new(v("1/2"), Value::one()));

        let model = AnnuliModel::two_annuli(v("1/2"), v("1/5"), v("1/2")).unwrap();
        let tree = build_covering(&model).unwrap();
        assert_eq!(
            leaf_skeleton(&tree, "r.0").unwrap().fiber_interval,
            Interval::new(v("1/5"), v("4/5"))
        );
        assert_eq!(
            leaf_skeleton(&tree, "r.1").unwrap().overlaps,
            vec![Interval::new(v("1/4"), v("4/5"))]
        );

        let model = AnnuliModel::two_annuli(v("1/2"), v("1/4"), v("1/2")).unwrap();
        let tree = build_covering(&model).unwrap();
        let sk = leaf_skeleton(&tree, "r").unwrap();
        assert_eq!(sk.fiber_interval, Interval::new(v("1/4"), Value::one()));
        assert!(sk.overlaps.is_empty());
        assert!(leaf_skeleton(&tree, "r.7").is_err());
    }

    #[test]
    fn deleted_triangle_fails_tiling() {
        let (_, mut cert) = flagship();
        cert.leaves[1].triangles.pop();
        let report = verify_covering(&cert).unwrap();
        assert!(!report.valid);
        assert_eq!(report.failed(), vec![4]);
        assert!(report.check(CheckId::LeafTiling).failures[0].contains("leaf r.1"));
        assert!(!report.stored_verdict_matches);
    }

    #[test]
    fn gap_is_reported() {
        let (_, mut cert) = flagship();
        cert.splits[0].charts[0].interval = Interval::new(v("1/3"), v("1/2"));
        cert.splits[0].charts[1].interval = Interval::new(v("2/3"), Value::one());
        let report = verify_covering(&cert).unwrap();
        assert!(!report.valid);
        let coverage = report.check(CheckId::Coverage);
        assert!(
            coverage.failures.iter().any(|m| m.contains("gap (1/2, 2/3)")),
            "{report}"
        );
    }

    #[test]
    fn broken_determinant_fails_unimodularity() {
        let (_, mut cert) = flagship();
        cert.leaves[0].triangles[0].vertices[1] = Point::new(int(2), int(0));
        let report = verify_covering(&cert).unwrap();
        assert!(report.failed().contains(&3), "{report}");
    }

    #[test]
    fn wrong_lambda_fails_coverage() {
        let (_, mut cert) = flagship();
        cert.splits[0].s = v("3/4");
        let report = verify_covering(&cert).unwrap();
        assert!(report.failed().contains(&1));
    }

    #[test]
    fn unresolved_leaves_fail_check_five() {
        let model = AnnuliModel::new(
            ModelAlgebra::new(2, 2, v("1/3")).unwrap(),
            vec![0, 1, 0],
            v("1/5"),
            v("1/2"),
        )
        .unwrap();
        let cert = certify(&build_covering(&model).unwrap()).unwrap();
        let report = verify_covering(&cert).unwrap();
        assert_eq!(report.failed(), vec![5], "{report}");
    }

    #[test]
    fn sloped_and_degenerate_leaves_verify() {
        let cases = [
            (1, "1/3", vec![1, 2], "1/7"),
            (1, "1/4", vec![0, 3], "1"),
            (1, "1", vec![2, 0], "1/3"),
            (0, "1/3", vec![2], "1/5"),
            (0, "1/3", vec![0], "1"),
        ];
        for (m, pi_0, n, pi_1) in cases {
            let model = AnnuliModel::new(
                ModelAlgebra::new(1, m, v(pi_0)).unwrap(),
                n,
                v(pi_1),
                v("1/2"),
            )
            .unwrap();
            let cert = certify(&build_covering(&model).unwrap()).unwrap();
            let report = verify_covering(&cert).unwrap();
            assert!(report.valid, "{pi_0} {pi_1}: {report}");
        }
    }

    #[test]
    fn certificate_json_round_trip() {
        let (_, cert) = flagship();
        let text = serde_json::to_string_pretty(&cert).unwrap();
        let back: CoveringCertificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
        assert!(text.contains("\"format\": \"ss-skeleton-certificate\""));
        let mut bad = cert.clone();
        bad.format = "other".into();
        assert!(verify_covering(&bad).is_err());
    }
}

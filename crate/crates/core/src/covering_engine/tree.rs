use serde::{Deserialize, Serialize};

use super::lambda::{choose_lambda, power, LambdaChoice};
use super::{AnnuliModel, CoverConfig, ResolvedConfig};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::value_group::{in_r_power_class, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    BaseSplit,
    FiberSplit,
    ToricLeaf,
    UnresolvedLeaf,
}

impl NodeKind {
    pub fn is_leaf(self) -> bool {
        matches!(self, NodeKind::ToricLeaf | NodeKind::UnresolvedLeaf)
    }
}

/// The constants of a chart: `t_0⋯t_m = base` and `x y = fiber · t^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constants {
    pub base: Value,
    pub fiber: Value,
}

/// The λ-split performed at a node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitInfo {
    /// The constant being moved into `r^Q`.
    pub target: Value,
    #[serde(with = "rational")]
    pub exponent_bound: Rational,
    pub lambda: LambdaChoice,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartNode {
    /// Path from the root: `r`, `r.0`, `r.0.1`, ...
    pub id: String,
    pub kind: NodeKind,
    pub constants: Constants,
    /// How this chart arises from its parent, e.g. `x_0' = x_0/lambda`.
    pub substitution: Option<String>,
    pub split: Option<SplitInfo>,
    pub children: Vec<ChartNode>,
    /// `log_r` of the base and fiber constants, when rational.
    pub a: Option<Rational>,
    pub b: Option<Rational>,
}

impl ChartNode {
    /// A leaf chart, classified by dimension and by whether its radii lie in `r^Q`.
    fn leaf(
        model: &AnnuliModel,
        id: String,
        constants: Constants,
        substitution: Option<String>,
    ) -> Result<ChartNode> {
        let a = in_r_power_class(&constants.base, model.r())?;
        let b = in_r_power_class(&constants.fiber, model.r())?;
        let toric = model.m() <= 1 && a.is_some() && b.is_some();
        Ok(ChartNode {
            id,
            kind: if toric {
                NodeKind::ToricLeaf
            } else {
                NodeKind::UnresolvedLeaf
            },
            constants,
            substitution,
            split: None,
            children: Vec::new(),
            a,
            b,
        })
    }

    /// Preorder traversal.
    pub fn walk(&self) -> Vec<&ChartNode> {
        let mut out = vec![self];
        for child in &self.children {
            out.extend(child.walk());
        }
        out
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        if self.kind.is_leaf() {
            0
        } else {
            1 + self.children.iter().map(ChartNode::depth).max().unwrap_or(0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartTree {
    pub model: AnnuliModel,
    pub config: ResolvedConfig,
    pub root: ChartNode,
}

impl ChartTree {
    pub fn nodes(&self) -> Vec<&ChartNode> {
        self.root.walk()
    }

    pub fn leaves(&self) -> Vec<&ChartNode> {
        self.nodes().into_iter().filter(|n| n.kind.is_leaf()).collect()
    }

    pub fn splits(&self) -> Vec<&ChartNode> {
        self.nodes().into_iter().filter(|n| !n.kind.is_leaf()).collect()
    }
}

fn root_constants(model: &AnnuliModel) -> Constants {
    Constants {
        base: model.pi_0().clone(),
        fiber: model.pi_1().clone(),
    }
}

/// Replaces the base `t_0⋯t_m = π_0` by the `m+1` charts `t'_i = t_i/λ`.
///
/// Child `i` has base constant `π_0/s` and fiber constant `π_1 s^{n_i}`.
pub fn split_base(model: &AnnuliModel, config: &ResolvedConfig) -> Result<ChartNode> {
    let constants = root_constants(model);
    let target = constants.base.clone();
    let lambda = choose_lambda(
        &target,
        &config.base_exponent,
        model.r(),
        config.max_denominator,
    )?;
    let s = &lambda.s;
    let m = model.m();
    if power(s, &Rational::from_integer((m as i64 + 1).into())) <= target {
        return Err(Error::invariant(
            "s^(m+1) > r_0",
            format!("s = {s}, r_0 = {target}"),
        ));
    }
    let base = &target / s;
    let children = model
        .fiber_exponents()
        .iter()
        .enumerate()
        .map(|(i, &n_i)| {
            let fiber = model.pi_1() * &power(s, &Rational::from_integer(n_i.into()));
            ChartNode::leaf(
                model,
                format!("r.{i}"),
                Constants {
                    base: base.clone(),
                    fiber,
                },
                Some(format!("t_{i}' = t_{i}/lambda")),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChartNode {
        id: "r".into(),
        kind: NodeKind::BaseSplit,
        constants,
        substitution: None,
        split: Some(SplitInfo {
            target,
            exponent_bound: config.base_exponent.clone(),
            lambda,
        }),
        children,
        a: None,
        b: None,
    })
}

/// Replaces the chart by `x'_0 = x_0/λ` and `x'_1 = x_1/λ`, both with fiber
/// constant `r_1/s`.
pub fn split_fiber(
    model: &AnnuliModel,
    chart: &ChartNode,
    config: &ResolvedConfig,
) -> Result<ChartNode> {
    let target = chart.constants.fiber.clone();
    let lambda = choose_lambda(
        &target,
        &config.fiber_exponent,
        model.r(),
        config.max_denominator,
    )?;
    let s = &lambda.s;
    if s * s <= target {
        return Err(Error::invariant("s^2 > r_1", format!("s = {s}, r_1 = {target}")));
    }
    let fiber = &target / s;
    let children = (0..2)
        .map(|i| {
            ChartNode::leaf(
                model,
                format!("{}.{i}", chart.id),
                Constants {
                    base: chart.constants.base.clone(),
                    fiber: fiber.clone(),
                },
                Some(format!("x_{i}' = x_{i}/lambda")),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChartNode {
        id: chart.id.clone(),
        kind: NodeKind::FiberSplit,
        constants: chart.constants.clone(),
        substitution: chart.substitution.clone(),
        split: Some(SplitInfo {
            target,
            exponent_bound: config.fiber_exponent.clone(),
            lambda,
        }),
        children,
        a: None,
        b: None,
    })
}

fn needs_split(v: &Value, r: &Value) -> Result<bool> {
    Ok(in_r_power_class(v, r)?.is_none())
}

pub fn build_covering(model: &AnnuliModel) -> Result<ChartTree> {
    build_covering_with(model, &CoverConfig::default())
}

/// Base split if `π_0 ∉ r^Q`, then a fiber split on every chart whose fiber
/// constant is not in `r^Q`.
///
/// A split whose constant already lies in `r^Q` would only duplicate charts,
/// so it is skipped.
pub fn build_covering_with(model: &AnnuliModel, config: &CoverConfig) -> Result<ChartTree> {
    let config = config.resolve(model.m())?;
    let r = model.r();
    let fiber_pass = |chart: ChartNode| -> Result<ChartNode> {
        if needs_split(&chart.constants.fiber, r)? {
            split_fiber(model, &chart, &config)
        } else {
            Ok(chart)
        }
    };
    let root = if needs_split(model.pi_0(), r)? {
        let mut node = split_base(model, &config)?;
        node.children = node
            .children
            .into_iter()
            .map(fiber_pass)
            .collect::<Result<Vec<_>>>()?;
        node
    } else {
        fiber_pass(ChartNode::leaf(
            model,
            "r".into(),
            root_constants(model),
            None,
        )?)?
    };
    log::debug!("covering built with depth {}", root.depth());
    Ok(ChartTree {
        model: model.clone(),
        config,
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial_algebra::ModelAlgebra;
    use crate::rational::int;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    fn model(m: usize, pi_0: &str, n: Vec<u64>, pi_1: &str, r: &str) -> AnnuliModel {
        AnnuliModel::new(ModelAlgebra::new(m.max(1), m, v(pi_0)).unwrap(), n, v(pi_1), v(r)).unwrap()
    }

    fn resolved(m: usize) -> ResolvedConfig {
        CoverConfig::default().resolve(m).unwrap()
    }

    #[test]
    fn base_split_examples() {
        let mdl = model(1, "1/3", vec![0, 0], "1/2", "1/2");
        let node = split_base(&mdl, &resolved(1)).unwrap();
        assert_eq!(node.kind, NodeKind::BaseSplit);
        assert_eq!(node.split.as_ref().unwrap().lambda.s, v("2/3"));
        assert_eq!(node.children.len(), 2);
        assert!(node.children.iter().all(|c| c.constants.base == v("1/2")));

        let mdl = model(0, "1/3", vec![2], "1/2", "1/2");
        let node = split_base(&mdl, &resolved(0)).unwrap();
        assert_eq!(node.children.len(), 1);
        assert_eq!(node.children[0].substitution.as_deref(), Some("t_0' = t_0/lambda"));

        let mdl = model(1, "1/3", vec![0, 1], "1/5", "1/2");
        let node = split_base(&mdl, &resolved(1)).unwrap();
        let s = node.split.as_ref().unwrap().lambda.s.clone();
        assert_eq!(node.children[0].constants.fiber, v("1/5"));
        assert_eq!(node.children[1].constants.fiber, &v("1/5") * &s);
    }

    #[test]
    fn fiber_split_examples() {
        let mdl = model(1, "1/2", vec![0, 0], "1/3", "1/2");
        let chart = ChartNode::leaf(&mdl, "r".into(), root_constants(&mdl), None).unwrap();
        let node = split_fiber(&mdl, &chart, &resolved(1)).unwrap();
        let lambda = &node.split.as_ref().unwrap().lambda;
        assert_eq!((lambda.s.clone(), lambda.q.clone()), (v("2/3"), int(-1)));
        assert!(node.children.iter().all(|c| c.constants.fiber == v("1/2")));

        let mdl = model(1, "1/2", vec![0, 0], "1/5", "1/2");
        let chart = ChartNode::leaf(&mdl, "r".into(), root_constants(&mdl), None).unwrap();
        let node = split_fiber(&mdl, &chart, &resolved(1)).unwrap();
        assert_eq!(node.split.as_ref().unwrap().lambda.s, v("4/5"));
        assert!(node.children.iter().all(|c| c.constants.fiber == v("1/4")));
        assert!(node.children.iter().all(|c| c.b == Some(int(2))));
    }

    #[test]
    fn two_annuli_tree() {
        let mdl = AnnuliModel::two_annuli(v("1/2"), v("1/3"), v("1/2")).unwrap();
        let tree = build_covering(&mdl).unwrap();
        assert_eq!(tree.root.kind, NodeKind::FiberSplit);
        assert_eq!(tree.splits().len(), 1);
        let leaves = tree.leaves();
        assert_eq!(leaves.len(), 2);
        for leaf in leaves {
            assert_eq!(leaf.kind, NodeKind::ToricLeaf);
            assert_eq!((leaf.a.clone(), leaf.b.clone()), (Some(int(1)), Some(int(1))));
        }
    }

    #[test]
    fn no_split_when_in_class() {
        let mdl = AnnuliModel::two_annuli(v("1/2"), v("1/2"), v("1/2")).unwrap();
        let tree = build_covering(&mdl).unwrap();
        assert!(tree.splits().is_empty());
        assert_eq!(tree.root.kind, NodeKind::ToricLeaf);
    }

    #[test]
    fn higher_base_is_unresolved() {
        let mdl = AnnuliModel::new(
            ModelAlgebra::new(2, 2, v("1/3")).unwrap(),
            vec![0, 0, 0],
            v("1/5"),
            v("1/2"),
        )
        .unwrap();
        let tree = build_covering(&mdl).unwrap();
        assert_eq!(tree.root.kind, NodeKind::BaseSplit);
        assert_eq!(tree.root.children.len(), 3);
        assert!(tree.root.depth() <= 2);
        assert!(tree
            .leaves()
            .iter()
            .all(|l| l.kind == NodeKind::UnresolvedLeaf));
    }

    #[test]
    fn coset_shift_matches_certificate() {
        let mdl = model(1, "1/3", vec![1, 0], "1/7", "1/2");
        let tree = build_covering(&mdl).unwrap();
        let split = tree.root.split.as_ref().unwrap();
        for child in &tree.root.children {
            assert_eq!(
                in_r_power_class(&child.constants.base, mdl.r()).unwrap(),
                Some(-split.lambda.q.clone())
            );
        }
        assert!(tree.root.depth() <= 2);
        assert!(tree.leaves().iter().all(|l| l.kind == NodeKind::ToricLeaf));
    }
}

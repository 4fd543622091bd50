use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A point `(u, v)` in `log_r` units. Serialized as `["u", "v"]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point(
    #[serde(with = "rational")] pub Rational,
    #[serde(with = "rational")] pub Rational,
);

impl Point {
    pub fn new(u: Rational, v: Rational) -> Self {
        Point(u, v)
    }

    pub fn from_scaled(i: i64, j: i64, scale: u64) -> Self {
        let n = BigInt::from(scale);
        Point(
            Rational::new(i.into(), n.clone()),
            Rational::new(j.into(), n),
        )
    }

    pub fn u(&self) -> &Rational {
        &self.0
    }

    pub fn v(&self) -> &Rational {
        &self.1
    }

    /// Integer coordinates at scale `N`, if the point lies on `(1/N) Z²`.
    pub fn scaled(&self, scale: u64) -> Option<(i64, i64)> {
        let n = Rational::from_integer(scale.into());
        let (u, v) = (&self.0 * &n, &self.1 * &n);
        if !u.is_integer() || !v.is_integer() {
            return None;
        }
        Some((u.to_integer().to_i64()?, v.to_integer().to_i64()?))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            rational::format_rational(&self.0),
            rational::format_rational(&self.1)
        )
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A lattice triangle at scale `N`: its edge vectors times `N` should form a
/// basis of `Z²`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangle {
    pub vertices: [Point; 3],
    pub scale: u64,
}

impl Triangle {
    /// `N² · det(p_1 − p_0, p_2 − p_0)`, exactly.
    pub fn scaled_determinant(&self) -> Rational {
        let [p0, p1, p2] = &self.vertices;
        let (a, b) = (&p1.0 - &p0.0, &p1.1 - &p0.1);
        let (c, d) = (&p2.0 - &p0.0, &p2.1 - &p0.1);
        let n = Rational::from_integer(self.scale.into());
        (a * d - b * c) * &n * n
    }

    /// `N`-semistable: vertices on `(1/N) Z²` and `|N² det| = 1`.
    pub fn is_unimodular(&self) -> bool {
        self.scale > 0
            && self.vertices.iter().all(|p| p.scaled(self.scale).is_some())
            && self.scaled_determinant().abs().is_one()
    }

    pub fn area(&self) -> Rational {
        let n = Rational::from_integer(self.scale.into());
        self.scaled_determinant().abs() / (&n * &n) / Rational::from_integer(2.into())
    }
}

/// A lattice segment of length `1/N` on one axis of a degenerate leaf.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
    pub scale: u64,
}

/// `{(u, v) : 0 ≤ u ≤ width, 0 ≤ v ≤ left + (right − left)·u/width}`.
///
/// The skeleton of a leaf chart in coordinates `u = log_r|t_1|`,
/// `v = log_r|x_0|`. With no base direction (`width = 0`) only `left` matters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafRegion {
    #[serde(with = "rational")]
    pub width: Rational,
    #[serde(with = "rational")]
    pub left: Rational,
    #[serde(with = "rational")]
    pub right: Rational,
}

impl LeafRegion {
    pub fn rectangle(a: Rational, b: Rational) -> Self {
        LeafRegion {
            width: a,
            left: b.clone(),
            right: b,
        }
    }

    pub fn area(&self) -> Rational {
        &self.width * (&self.left + &self.right) / Rational::from_integer(2.into())
    }

    /// Height of the region above `u`.
    pub fn height(&self, u: &Rational) -> Rational {
        if self.width.is_zero() {
            return self.left.clone();
        }
        &self.left + (&self.right - &self.left) * u / &self.width
    }

    /// Topological dimension: 2, 1 or 0.
    pub fn dimension(&self) -> usize {
        let tall = self.left.is_positive() || self.right.is_positive();
        match (self.width.is_positive(), tall) {
            (true, true) => 2,
            (true, false) | (false, true) => 1,
            (false, false) => 0,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        !p.0.is_negative()
            && p.0 <= self.width
            && !p.1.is_negative()
            && p.1 <= self.height(&p.0)
    }

    /// Whether `p` lies on the side `side` of the boundary
    /// (0: `u = 0`, 1: `u = width`, 2: `v = 0`, 3: top edge).
    pub fn on_side(&self, p: &Point, side: usize) -> bool {
        match side {
            0 => p.0.is_zero(),
            1 => p.0 == self.width,
            2 => p.1.is_zero(),
            _ => p.1 == self.height(&p.0),
        }
    }

    /// The smallest `N` with the region a lattice polygon in `(1/N) Z²`.
    pub fn natural_scale(&self) -> u64 {
        rational::lcm_of_denominators([&self.width, &self.left, &self.right])
            .to_u64()
            .expect("scale fits in u64")
    }
}

fn scaled_integer(x: &Rational, scale: u64, what: &str) -> Result<i64> {
    let y = x * Rational::from_integer(scale.into());
    if !y.is_integer() {
        return Err(Error::Precondition(format!(
            "{what} = {} is not a multiple of 1/{scale}",
            rational::format_rational(x)
        )));
    }
    y.to_integer()
        .to_i64()
        .ok_or_else(|| Error::Precondition(format!("{what} is too large")))
}

/// Unimodular triangulation of a 2-dimensional [`LeafRegion`] at scale `N`.
///
/// Each column `[i, i+1]/N` is cut into the staircase cells
/// `{(i,j),(i+1,j),(i,j+1)}`, `{(i+1,j),(i+1,j+1),(i,j+1)}` up to the lower of
/// its two side heights, then fanned to the higher side. For a rectangle this
/// is the plain staircase with `2·Na·Nb` triangles.
pub fn triangulate_region(region: &LeafRegion, scale: u64) -> Result<Vec<Triangle>> {
    if region.dimension() != 2 {
        return Err(Error::Precondition(
            "only 2-dimensional regions are triangulated".into(),
        ));
    }
    if region.left.is_negative() || region.right.is_negative() {
        return Err(Error::Precondition("region heights must be nonnegative".into()));
    }
    let columns = scaled_integer(&region.width, scale, "width")?;
    let heights = (0..=columns)
        .map(|i| {
            let u = Rational::new(i.into(), scale.into());
            scaled_integer(&region.height(&u), scale, "column height")
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let tri = |a: (i64, i64), b: (i64, i64), c: (i64, i64)| Triangle {
        vertices: [
            Point::from_scaled(a.0, a.1, scale),
            Point::from_scaled(b.0, b.1, scale),
            Point::from_scaled(c.0, c.1, scale),
        ],
        scale,
    };
    for i in 0..columns {
        let (hl, hr) = (heights[i as usize], heights[i as usize + 1]);
        let low = hl.min(hr);
        for j in 0..low {
            out.push(tri((i, j), (i + 1, j), (i, j + 1)));
            out.push(tri((i + 1, j), (i + 1, j + 1), (i, j + 1)));
        }
        for k in low..hr {
            out.push(tri((i, low), (i + 1, k), (i + 1, k + 1)));
        }
        for k in low..hl {
            out.push(tri((i + 1, low), (i, k + 1), (i, k)));
        }
    }
    Ok(out)
}

/// Staircase triangulation of the `a × b` rectangle at `N = lcm(den a, den b)`.
pub fn triangulate_leaf(a: &Rational, b: &Rational) -> Result<Vec<Triangle>> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::Precondition(format!(
            "leaf sides must be positive, got {} x {}",
            rational::format_rational(a),
            rational::format_rational(b)
        )));
    }
    let region = LeafRegion::rectangle(a.clone(), b.clone());
    triangulate_region(&region, region.natural_scale())
}

/// Unit lattice segments tiling `[0, length]` on the `u` axis (`axis = 0`) or
/// the `v` axis (`axis = 1`).
pub fn segments(length: &Rational, axis: usize, scale: u64) -> Result<Vec<Segment>> {
    if length.is_negative() {
        return Err(Error::Precondition("segment length must be nonnegative".into()));
    }
    let count = scaled_integer(length, scale, "length")?;
    let at = |k: i64| {
        if axis == 0 {
            Point::from_scaled(k, 0, scale)
        } else {
            Point::from_scaled(0, k, scale)
        }
    };
    Ok((0..count)
        .map(|k| Segment {
            start: at(k),
            end: at(k + 1),
            scale,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    fn total_area(ts: &[Triangle]) -> Rational {
        ts.iter().map(Triangle::area).fold(Rational::zero(), |a, b| a + b)
    }

    #[test]
    fn staircase_counts() {
        let unit = triangulate_leaf(&int(1), &int(1)).unwrap();
        assert_eq!(unit.len(), 2);
        assert_eq!(total_area(&unit), int(1));

        let t = triangulate_leaf(&int(1), &q(3, 2)).unwrap();
        assert_eq!(t.len(), 12);
        assert!(t.iter().all(|t| t.scale == 2));

        let t = triangulate_leaf(&q(1, 2), &q(1, 3)).unwrap();
        assert_eq!(t.len(), 12);
        assert!(t.iter().all(|t| t.scale == 6 && t.area() == q(1, 72)));
        assert_eq!(total_area(&t), q(1, 6));
        assert!(t.iter().all(Triangle::is_unimodular));
    }

    #[test]
    fn nonpositive_sides_rejected() {
        assert!(triangulate_leaf(&int(0), &int(1)).is_err());
        assert!(triangulate_leaf(&int(1), &q(-1, 2)).is_err());
    }

    #[test]
    fn trapezoid_fan() {
        // heights 1 at u = 0 and 3 at u = 1
        let region = LeafRegion {
            width: int(1),
            left: int(1),
            right: int(3),
        };
        let t = triangulate_region(&region, 1).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(Triangle::is_unimodular));
        assert_eq!(total_area(&t), region.area());
        assert!(t.iter().all(|t| t.vertices.iter().all(|p| region.contains(p))));

        // falling top edge, down to height 0
        let region = LeafRegion {
            width: int(2),
            left: int(2),
            right: int(0),
        };
        let t = triangulate_region(&region, 1).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(total_area(&t), int(2));
    }

    #[test]
    fn degenerate_regions_and_segments() {
        assert_eq!(LeafRegion::rectangle(int(0), int(2)).dimension(), 1);
        assert_eq!(LeafRegion::rectangle(int(1), int(0)).dimension(), 1);
        assert_eq!(LeafRegion::rectangle(int(0), int(0)).dimension(), 0);
        let s = segments(&q(3, 2), 1, 2).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[2].end, Point::new(int(0), q(3, 2)));
        assert!(segments(&q(1, 3), 0, 2).is_err());
    }

    #[test]
    fn point_json() {
        let p = Point::new(q(1, 2), int(0));
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"["1/2","0"]"#);
        assert_eq!(serde_json::from_str::<Point>(&text).unwrap(), p);
    }
}

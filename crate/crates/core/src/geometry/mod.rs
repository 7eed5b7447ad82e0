//! Closed sets in R^n as expression trees with exact distances and
//! projections, plus a grid-based oracle.

mod brute;
mod parabola;
mod polyhedron;
mod scene;

pub use brute::{brute_distance, BruteDistance, GridSpec, Probe, RegionSearch};
pub use polyhedron::Polyhedron;
pub use scene::{parse_scene, parse_set, set_to_json, Scene};

use crate::error::{Error, Result};
use crate::linalg::{
    add, axpy, check_dim, dist2, dot, norm2, orthogonal_complement, orthonormalize, sub, Norm, Point,
};

/// Default membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum Node {
    /// {x : <a, x> <= b}, stored with |a| = 1.
    Halfspace { a: Point, b: f64 },
    Ball { c: Point, r: f64 },
    Box { lo: Point, hi: Point },
    /// p + span(basis), basis orthonormal.
    Affine { p: Point, basis: Vec<Point> },
    Polyhedron(Polyhedron),
    /// {(u, v) : v >= c u^2} in R^2.
    ParabolaEpi { c: f64 },
    Union(Vec<SetExpr>),
    Translate { child: Box<SetExpr>, offset: Point },
}

/// A nonempty closed set. Only the validating constructors build one.
#[derive(Debug, Clone)]
pub struct SetExpr {
    node: Node,
    dim: usize,
}

fn finite_vec(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidSet(format!("{what} has non-finite entries")))
    }
}

impl SetExpr {
    pub fn halfspace(a: Point, b: f64) -> Result<Self> {
        finite_vec(&a, "halfspace normal")?;
        let n = norm2(&a);
        if a.is_empty() || n == 0.0 {
            return Err(Error::InvalidSet("halfspace normal must be nonzero".into()));
        }
        if !b.is_finite() {
            return Err(Error::InvalidSet("halfspace offset must be finite".into()));
        }
        let dim = a.len();
        Ok(SetExpr { node: Node::Halfspace { a: a.iter().map(|v| v / n).collect(), b: b / n }, dim })
    }

    pub fn ball(c: Point, r: f64) -> Result<Self> {
        finite_vec(&c, "ball center")?;
        if c.is_empty() || !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidSet("ball needs a center and a radius >= 0".into()));
        }
        let dim = c.len();
        Ok(SetExpr { node: Node::Ball { c, r }, dim })
    }

    pub fn boxed(lo: Point, hi: Point) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidSet("box bounds must have equal nonzero length".into()));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if l.is_nan() || h.is_nan() || l > h || *l == f64::INFINITY || *h == f64::NEG_INFINITY {
                return Err(Error::InvalidSet(format!("box bounds violate lo <= hi: [{l}, {h}]")));
            }
        }
        let dim = lo.len();
        Ok(SetExpr { node: Node::Box { lo, hi }, dim })
    }

    /// The whole space R^dim.
    pub fn whole_space(dim: usize) -> Result<Self> {
        Self::boxed(vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn affine(p: Point, basis: Vec<Point>) -> Result<Self> {
        finite_vec(&p, "affine anchor")?;
        if p.is_empty() {
            return Err(Error::InvalidSet("affine anchor is empty".into()));
        }
        for v in &basis {
            check_dim(p.len(), v)?;
            finite_vec(v, "affine basis")?;
        }
        let basis = orthonormalize(&basis)
            .ok_or_else(|| Error::InvalidSet("affine basis is linearly dependent".into()))?;
        let dim = p.len();
        Ok(SetExpr { node: Node::Affine { p, basis }, dim })
    }

    pub fn polyhedron(dim: usize, rows: Vec<(Point, f64)>) -> Result<Self> {
        Ok(SetExpr { node: Node::Polyhedron(Polyhedron::new(dim, rows)?), dim })
    }

    pub fn parabola_epi(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidSet("parabola coefficient must be positive".into()));
        }
        Ok(SetExpr { node: Node::ParabolaEpi { c }, dim: 2 })
    }

    pub fn union(children: Vec<SetExpr>) -> Result<Self> {
        if children.len() < 2 {
            return Err(Error::InvalidSet("union needs at least two children".into()));
        }
        let dim = children[0].dim;
        for ch in &children {
            if ch.dim != dim {
                return Err(Error::Dimension { expected: dim, got: ch.dim });
            }
        }
        Ok(SetExpr { node: Node::Union(children), dim })
    }

    pub fn translate(child: SetExpr, offset: Point) -> Result<Self> {
        check_dim(child.dim, &offset)?;
        finite_vec(&offset, "translation offset")?;
        let dim = child.dim;
        Ok(SetExpr { node: Node::Translate { child: Box::new(child), offset }, dim })
    }

    /// The set moved by v, merging nested offsets and dropping zero ones.
    pub fn shifted(&self, v: &[f64]) -> SetExpr {
        let (child, o) = match &self.node {
            Node::Translate { child, offset } => ((**child).clone(), add(offset, v)),
            _ => (self.clone(), v.to_vec()),
        };
        if o.iter().all(|&t| t == 0.0) {
            child
        } else {
            SetExpr { node: Node::Translate { child: Box::new(child), offset: o }, dim: self.dim }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    /// True when the set is convex by construction (no unions).
    pub fn is_convex(&self) -> bool {
        match &self.node {
            Node::Union(_) => false,
            Node::Translate { child, .. } => child.is_convex(),
            _ => true,
        }
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok(self.dist(x))
    }

    pub fn project(&self, x: &[f64]) -> Result<Point> {
        check_dim(self.dim, x)?;
        Ok(self.proj(x))
    }

    pub fn membership(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// Euclidean distance; the caller guarantees the dimension.
    pub fn dist(&self, x: &[f64]) -> f64 {
        match &self.node {
            Node::Halfspace { a, b } => (dot(a, x) - b).max(0.0),
            Node::Ball { c, r } => (dist2(x, c) - r).max(0.0),
            Node::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| {
                    let e = if v < l { l - v } else if v > h { v - h } else { 0.0 };
                    e * e
                })
                .sum::<f64>()
                .sqrt(),
            Node::Affine { .. } => dist2(x, &self.proj(x)),
            Node::Polyhedron(p) => dist2(x, &p.project(x).expect("nonempty polyhedron")),
            Node::ParabolaEpi { c } => {
                let y = parabola::project(*c, x);
                ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2)).sqrt()
            }
            Node::Union(ch) => ch.iter().map(|s| s.dist(x)).fold(f64::INFINITY, f64::min),
            Node::Translate { child, offset } => child.dist(&sub(x, offset)),
        }
    }

    /// Euclidean nearest point; the caller guarantees the dimension.
    pub fn proj(&self, x: &[f64]) -> Point {
        match &self.node {
            Node::Halfspace { a, b } => {
                let e = dot(a, x) - b;
                if e > 0.0 {
                    axpy(x, -e, a)
                } else {
                    x.to_vec()
                }
            }
            Node::Ball { c, r } => {
                let d = dist2(x, c);
                if d <= *r {
                    x.to_vec()
                } else if d == 0.0 {
                    let mut y = c.clone();
                    y[0] += r;
                    y
                } else {
                    axpy(c, r / d, &sub(x, c))
                }
            }
            Node::Box { lo, hi } => {
                x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.clamp(*l, *h)).collect()
            }
            Node::Affine { p, basis } => {
                let w = sub(x, p);
                let mut y = p.clone();
                for q in basis {
                    y = axpy(&y, dot(&w, q), q);
                }
                y
            }
            Node::Polyhedron(p) => p.project(x).expect("nonempty polyhedron"),
            Node::ParabolaEpi { c } => parabola::project(*c, x).to_vec(),
            Node::Union(ch) => {
                let mut best = (f64::INFINITY, 0);
                for (i, s) in ch.iter().enumerate() {
                    let d = s.dist(x);
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                ch[best.1].proj(x)
            }
            Node::Translate { child, offset } => {
                let y = child.proj(&sub(x, offset));
                y.iter().zip(offset).map(|(a, b)| a + b).collect()
            }
        }
    }

    /// Checks that distances under `norm` are available for this set.
    pub fn check_norm(&self, norm: &Norm) -> Result<()> {
        if norm.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: norm.dim() });
        }
        if norm.is_euclidean() {
            return Ok(());
        }
        match &self.node {
            Node::Affine { basis, .. } => {
                let k = basis.len();
                if k == 0 || k == self.dim || k + 1 == self.dim || (k == 1 && self.dim == 3) {
                    Ok(())
                } else {
                    Err(Error::Unsupported("affine set of this codimension under a block norm".into()))
                }
            }
            Node::Polyhedron(_) => {
                if norm.block_sizes().iter().all(|&b| b == 1) {
                    Ok(())
                } else {
                    Err(Error::Unsupported("polyhedron under a mixed block norm".into()))
                }
            }
            Node::ParabolaEpi { .. } => {
                if norm.block_sizes() == [1, 1] {
                    Ok(())
                } else {
                    Err(Error::Unsupported("parabola epigraph under this block norm".into()))
                }
            }
            Node::Union(ch) => ch.iter().try_for_each(|s| s.check_norm(norm)),
            Node::Translate { child, .. } => child.check_norm(norm),
            _ => Ok(()),
        }
    }

    /// Distance measured in `norm`. Requires a successful `check_norm`.
    pub fn dist_in(&self, x: &[f64], norm: &Norm) -> f64 {
        if norm.is_euclidean() {
            return self.dist(x);
        }
        match &self.node {
            Node::Halfspace { a, b } => (dot(a, x) - b).max(0.0) / norm.dual_norm(a),
            Node::Ball { c, r } => {
                let gaps: Vec<f64> = norm.ranges().into_iter().map(|rg| dist2(&x[rg.clone()], &c[rg])).collect();
                let top = gaps.iter().copied().fold(0.0, f64::max);
                if *r == 0.0 {
                    return top;
                }
                let inside = |t: f64| gaps.iter().map(|g| (g - t).max(0.0).powi(2)).sum::<f64>() <= r * r;
                if inside(0.0) {
                    return 0.0;
                }
                let (mut lo, mut hi) = (0.0, top);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if inside(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
            Node::Box { .. } => {
                let y = self.proj(x);
                norm.dist(x, &y)
            }
            Node::Affine { p, basis } => {
                let k = basis.len();
                let w = sub(x, p);
                if k == self.dim {
                    0.0
                } else if k == 0 {
                    norm.norm(&w)
                } else if k + 1 == self.dim {
                    let n = &orthogonal_complement(basis, self.dim)[0];
                    dot(n, &w).abs() / norm.dual_norm(n)
                } else {
                    // a line in R^3: minimize norm(w - z b) over z
                    let b = &basis[0];
                    let z0 = dot(&w, b);
                    let g = |z: f64| norm.norm(&axpy(&w, -z, b));
                    let g0 = g(z0);
                    let span = g0 * (self.dim as f64).sqrt();
                    golden_min(g, z0 - span, z0 + span)
                }
            }
            Node::Polyhedron(p) => p.sup_distance(x),
            Node::ParabolaEpi { c } => parabola::sup_distance(*c, x),
            Node::Union(ch) => ch.iter().map(|s| s.dist_in(x, norm)).fold(f64::INFINITY, f64::min),
            Node::Translate { child, offset } => child.dist_in(&sub(x, offset), norm),
        }
    }

    /// Inequality rows describing the set when it is polyhedral (no balls of
    /// positive radius, parabolas or unions). An empty list is the whole space.
    pub fn polyhedral_rows(&self) -> Option<Vec<(Point, f64)>> {
        let dim = self.dim;
        let unit = |k: usize, s: f64| -> Point {
            let mut e = vec![0.0; dim];
            e[k] = s;
            e
        };
        match &self.node {
            Node::Halfspace { a, b } => Some(vec![(a.clone(), *b)]),
            Node::Ball { c, r } if *r == 0.0 => {
                Some((0..dim).flat_map(|k| [(unit(k, 1.0), c[k]), (unit(k, -1.0), -c[k])]).collect())
            }
            Node::Ball { .. } | Node::ParabolaEpi { .. } | Node::Union(_) => None,
            Node::Box { lo, hi } => {
                let mut rows = Vec::new();
                for k in 0..dim {
                    if hi[k].is_finite() {
                        rows.push((unit(k, 1.0), hi[k]));
                    }
                    if lo[k].is_finite() {
                        rows.push((unit(k, -1.0), -lo[k]));
                    }
                }
                Some(rows)
            }
            Node::Affine { p, basis } => Some(
                orthogonal_complement(basis, dim)
                    .into_iter()
                    .flat_map(|n| {
                        let b = dot(&n, p);
                        let neg: Point = n.iter().map(|v| -v).collect();
                        [(n, b), (neg, -b)]
                    })
                    .collect(),
            ),
            Node::Polyhedron(p) => Some(p.rows().map(|(a, b)| (a.to_vec(), b)).collect()),
            Node::Translate { child, offset } => Some(
                child
                    .polyhedral_rows()?
                    .into_iter()
                    .map(|(a, b)| {
                        let b = b + dot(&a, offset);
                        (a, b)
                    })
                    .collect(),
            ),
        }
    }

    /// Image of the set under y = center + t (x - center), t > 0.
    pub fn scaled_about(&self, center: &[f64], t: f64) -> Result<SetExpr> {
        check_dim(self.dim, center)?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Precondition("scale factor must be positive".into()));
        }
        let map = |v: &[f64]| -> Point { v.iter().zip(center).map(|(a, c)| c + t * (a - c)).collect() };
        match &self.node {
            Node::Halfspace { a, b } => Self::halfspace(a.clone(), t * b + (1.0 - t) * dot(a, center)),
            Node::Ball { c, r } => Self::ball(map(c), t * r),
            Node::Box { lo, hi } => {
                let f = |v: &[f64]| -> Point {
                    v.iter()
                        .zip(center)
                        .map(|(a, c)| if a.is_finite() { c + t * (a - c) } else { *a })
                        .collect()
                };
                Self::boxed(f(lo), f(hi))
            }
            Node::Affine { p, basis } => Self::affine(map(p), basis.clone()),
            Node::Polyhedron(p) => Ok(SetExpr {
                node: Node::Polyhedron(p.map_rows(|a, b| (a.to_vec(), t * b + (1.0 - t) * dot(a, center)))?),
                dim: self.dim,
            }),
            Node::ParabolaEpi { c } => {
                let shift: Point = center.iter().map(|v| v * (1.0 - t)).collect();
                Self::translate(Self::parabola_epi(c / t)?, shift)
            }
            Node::Union(ch) => Self::union(ch.iter().map(|s| s.scaled_about(center, t)).collect::<Result<_>>()?),
            Node::Translate { child, offset } => {
                let inner_center = sub(center, offset);
                let moved = child.scaled_about(&inner_center, t)?;
                Self::translate(moved, offset.clone())
            }
        }
    }
}

fn golden_min(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..120 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    gc.min(gd)
}

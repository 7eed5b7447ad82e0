use super::cone::Cone;
use crate::error::{Error, Result};
use crate::geometry::{Node, SetExpr, MEMBERSHIP_TOL};
use crate::linalg::{check_dim, dist2, dot, orthogonal_complement, sub, Point};

const BOUNDARY_TOL: f64 = 1e-9;

fn axes(dim: usize) -> Vec<Point> {
    (0..dim)
        .map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            e
        })
        .collect()
}

fn cone_at(s: &SetExpr, x: &[f64]) -> Cone {
    let dim = s.dim();
    let near = |a: f64, b: f64| (a - b).abs() <= BOUNDARY_TOL * (1.0 + b.abs());
    match s.node() {
        Node::Halfspace { a, b } => {
            if near(dot(a, x), *b) {
                Cone::ray(a)
            } else {
                Cone::zero(dim)
            }
        }
        Node::Ball { c, r } => {
            if *r == 0.0 {
                Cone::linear(dim, &axes(dim))
            } else if near(dist2(x, c), *r) {
                Cone::ray(&sub(x, c))
            } else {
                Cone::zero(dim)
            }
        }
        Node::Box { lo, hi } => {
            let mut gens = Vec::new();
            for (k, e) in axes(dim).into_iter().enumerate() {
                if hi[k].is_finite() && near(x[k], hi[k]) {
                    gens.push(e.clone());
                }
                if lo[k].is_finite() && near(x[k], lo[k]) {
                    gens.push(e.iter().map(|v| -v).collect());
                }
            }
            Cone::generated(dim, &gens)
        }
        Node::Affine { basis, .. } => Cone::linear(dim, &orthogonal_complement(basis, dim)),
        Node::Polyhedron(p) => {
            let gens: Vec<Point> = p.active_rows(x, BOUNDARY_TOL).into_iter().map(|i| p.normal(i).to_vec()).collect();
            Cone::generated(dim, &gens)
        }
        Node::ParabolaEpi { c } => {
            let (u, v) = (x[0], x[1]);
            if near(v, c * u * u) {
                Cone::ray(&[2.0 * c * u, -1.0])
            } else {
                Cone::zero(dim)
            }
        }
        Node::Union(children) => {
            let mut acc: Option<Cone> = None;
            for ch in children {
                if ch.dist(x) <= MEMBERSHIP_TOL {
                    let k = cone_at(ch, x);
                    acc = Some(match acc {
                        None => k,
                        Some(a) => a.intersect(&k),
                    });
                }
            }
            acc.unwrap_or_else(|| Cone::zero(dim))
        }
        Node::Translate { child, offset } => cone_at(child, &sub(x, offset)),
    }
}

/// Frechet normal cone of s at x. At a point shared by several branches of
/// a union, a normal must be normal to every branch, so the branch cones are
/// intersected.
pub fn normal_cone(s: &SetExpr, x: &[f64]) -> Result<Cone> {
    check_dim(s.dim(), x)?;
    let d = s.dist(x);
    if d > MEMBERSHIP_TOL {
        return Err(Error::Precondition(format!("point is at distance {d:e} from the set")));
    }
    Ok(cone_at(s, x))
}

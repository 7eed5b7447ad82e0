//! Random sets with an independent membership predicate.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setreg::geometry::{Scene, SetExpr};
use setreg::linalg::Norm;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub enum Shape {
    Half(Vec<f64>, f64),
    Ball(Vec<f64>, f64),
    Box(Vec<f64>, Vec<f64>),
    /// anchor, spanning vectors (not necessarily orthonormal)
    Affine(Vec<f64>, Vec<Vec<f64>>),
    Poly(Vec<(Vec<f64>, f64)>),
    Parab(f64),
    Union(Vec<Shape>),
    Shift(Box<Shape>, Vec<f64>),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nrm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Residual of v after removing its component in span(vs), by Gram-Schmidt.
fn off_span(v: &[f64], vs: &[Vec<f64>]) -> f64 {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for b in vs {
        let mut w = b.clone();
        for e in &q {
            let c = dot(&w, e);
            w.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
        }
        let n = nrm(&w);
        q.push(w.iter().map(|x| x / n).collect());
    }
    let mut r = v.to_vec();
    for e in &q {
        let c = dot(&r, e);
        r.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
    }
    nrm(&r)
}

impl Shape {
    pub fn build(&self) -> SetExpr {
        match self {
            Shape::Half(a, b) => SetExpr::halfspace(a.clone(), *b),
            Shape::Ball(c, r) => SetExpr::ball(c.clone(), *r),
            Shape::Box(lo, hi) => SetExpr::boxed(lo.clone(), hi.clone()),
            Shape::Affine(p, vs) => SetExpr::affine(p.clone(), vs.clone()),
            Shape::Poly(rows) => SetExpr::polyhedron(rows[0].0.len(), rows.clone()),
            Shape::Parab(c) => SetExpr::parabola_epi(*c),
            Shape::Union(ch) => SetExpr::union(ch.iter().map(|s| s.build()).collect()),
            Shape::Shift(s, o) => SetExpr::translate(s.build(), o.clone()),
        }
        .expect("valid random set")
    }

    /// Membership up to `tol`, computed without the library.
    pub fn member(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Shape::Half(a, b) => dot(a, x) <= b + tol * nrm(a),
            Shape::Ball(c, r) => {
                let d: Vec<f64> = x.iter().zip(c).map(|(p, q)| p - q).collect();
                nrm(&d) <= r + tol
            }
            Shape::Box(lo, hi) => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            Shape::Affine(p, vs) => {
                let d: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
                off_span(&d, vs) <= tol
            }
            Shape::Poly(rows) => rows.iter().all(|(a, b)| dot(a, x) <= b + tol * nrm(a)),
            Shape::Parab(c) => x[1] >= c * x[0] * x[0] - tol,
            Shape::Union(ch) => ch.iter().any(|s| s.member(x, tol)),
            Shape::Shift(s, o) => {
                let y: Vec<f64> = x.iter().zip(o).map(|(a, b)| a - b).collect();
                s.member(&y, tol)
            }
        }
    }
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = nrm(&v);
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn point(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-r..r)).collect()
}

/// A random set in R^dim, with unions and translations up to `depth`.
pub fn random_shape(rng: &mut ChaCha8Rng, dim: usize, depth: usize) -> Shape {
    let kinds = if depth == 0 { 6 } else { 8 };
    match rng.gen_range(0..kinds) {
        0 => Shape::Half(unit(rng, dim), rng.gen_range(-1.0..1.0)),
        1 => Shape::Ball(point(rng, dim, 1.0), rng.gen_range(0.0..1.0)),
        2 => {
            let lo = point(rng, dim, 1.0);
            let hi = lo.iter().map(|l| l + rng.gen_range(0.0..1.5)).collect();
            Shape::Box(lo, hi)
        }
        3 => {
            let k = rng.gen_range(0..dim);
            Shape::Affine(point(rng, dim, 1.0), (0..k).map(|_| unit(rng, dim)).collect())
        }
        4 if dim <= 3 => {
            let c = point(rng, dim, 1.0);
            let rows = (0..rng.gen_range(1..5))
                .map(|_| {
                    let a = unit(rng, dim);
                    let b = dot(&a, &c) + rng.gen_range(0.05..1.0);
                    (a, b)
                })
                .collect();
            Shape::Poly(rows)
        }
        5 if dim == 2 => Shape::Parab(rng.gen_range(0.2..3.0)),
        6 => Shape::Union((0..rng.gen_range(2..4)).map(|_| random_shape(rng, dim, depth - 1)).collect()),
        7 => Shape::Shift(Box::new(random_shape(rng, dim, depth - 1)), point(rng, dim, 1.0)),
        _ => Shape::Ball(point(rng, dim, 1.0), rng.gen_range(0.0..1.0)),
    }
}

/// A random closed convex set in the plane containing `x`.
pub fn convex_through(rng: &mut ChaCha8Rng, x: &[f64]) -> Shape {
    let dim = x.len();
    match rng.gen_range(0..5) {
        0 => {
            let a = unit(rng, dim);
            Shape::Half(a.clone(), dot(&a, x) + rng.gen_range(0.0..0.3))
        }
        1 => {
            let u = unit(rng, dim);
            let r = rng.gen_range(0.2..1.0);
            let s = rng.gen_range(0.0..r);
            Shape::Ball(x.iter().zip(&u).map(|(a, b)| a + s * b).collect(), r)
        }
        2 => Shape::Affine(x.to_vec(), vec![unit(rng, dim)]),
        3 => {
            let lo = x.iter().map(|v| v - rng.gen_range(0.0..0.5)).collect();
            let hi = x.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
            Shape::Box(lo, hi)
        }
        _ => {
            let rows = (0..rng.gen_range(2..4))
                .map(|_| {
                    let a = unit(rng, dim);
                    (a.clone(), dot(&a, x) + rng.gen_range(0.0..0.2))
                })
                .collect();
            Shape::Poly(rows)
        }
    }
}

/// Two random convex sets through a random point of the plane.
pub fn random_convex_scene(rng: &mut ChaCha8Rng) -> Scene {
    let x = point(rng, 2, 1.0);
    let sets = vec![convex_through(rng, &x).build(), convex_through(rng, &x).build()];
    Scene::new(sets, x, None, vec![], Norm::euclidean(2)).expect("valid scene")
}

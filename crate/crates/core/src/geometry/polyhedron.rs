//! Polyhedra in dimension <= 3, projected by active-set enumeration.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Point};

/// One candidate active set with its precomputed projector
/// y = x - M (A_S x - b_S).
#[derive(Debug, Clone)]
struct ActiveSet {
    rows: Vec<usize>,
    // dim x k, row-major
    m: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Polyhedron {
    dim: usize,
    a: Vec<Point>,
    b: Vec<f64>,
    active: Vec<ActiveSet>,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl Polyhedron {
    pub const MAX_DIM: usize = 3;

    pub fn new(dim: usize, rows: Vec<(Point, f64)>) -> Result<Self> {
        if dim == 0 || dim > Self::MAX_DIM {
            return Err(Error::Unsupported(format!(
                "polyhedra are limited to dimension <= 3, got {dim}"
            )));
        }
        if rows.is_empty() {
            return Err(Error::InvalidSet("polyhedron needs at least one row".into()));
        }
        let mut a: Vec<Point> = Vec::new();
        let mut b = Vec::new();
        for (ai, bi) in rows {
            if ai.len() != dim {
                return Err(Error::Dimension { expected: dim, got: ai.len() });
            }
            let n = norm2(&ai);
            if n == 0.0 || !n.is_finite() || !bi.is_finite() {
                return Err(Error::InvalidSet("polyhedron row with zero normal".into()));
            }
            a.push(ai.iter().map(|v| v / n).collect());
            b.push(bi / n);
        }
        let mut active = Vec::new();
        for k in 1..=dim.min(a.len()) {
            for s in subsets(a.len(), k) {
                let am = DMatrix::from_fn(k, dim, |i, j| a[s[i]][j]);
                let gram = &am * am.transpose();
                let Some(inv) = gram.clone().try_inverse() else { continue };
                if gram.determinant().abs() < 1e-12 {
                    continue;
                }
                let m = am.transpose() * inv;
                let mut flat = Vec::with_capacity(dim * k);
                for i in 0..dim {
                    for j in 0..k {
                        flat.push(m[(i, j)]);
                    }
                }
                active.push(ActiveSet { rows: s, m: flat });
            }
        }
        let p = Polyhedron { dim, a, b, active };
        if p.project(&vec![0.0; dim]).is_none() {
            return Err(Error::InfeasiblePolyhedron);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unit normals and offsets of the rows.
    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.a.iter().map(|v| v.as_slice()).zip(self.b.iter().copied())
    }

    fn feasible(&self, y: &[f64], slack: f64) -> bool {
        self.a
            .iter()
            .zip(&self.b)
            .all(|(ai, bi)| dot(ai, y) <= bi + slack * (1.0 + bi.abs()))
    }

    /// Exact nearest point, or None when the polyhedron is empty.
    pub(crate) fn project(&self, x: &[f64]) -> Option<Point> {
        if self.feasible(x, 0.0) {
            return Some(x.to_vec());
        }
        let mut best: Option<(Point, f64)> = None;
        let mut r = [0.0; 3];
        for s in &self.active {
            let k = s.rows.len();
            for (j, &row) in s.rows.iter().enumerate() {
                r[j] = dot(&self.a[row], x) - self.b[row];
            }
            let mut y = x.to_vec();
            for (i, yi) in y.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..k {
                    acc += s.m[i * k + j] * r[j];
                }
                *yi -= acc;
            }
            if !self.feasible(&y, 1e-10) {
                continue;
            }
            let d2: f64 = y.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum();
            if best.as_ref().map_or(true, |(_, bd)| d2 < *bd) {
                best = Some((y, d2));
            }
        }
        best.map(|b| b.0)
    }

    /// Row indices active at y (within tol).
    pub(crate) fn active_rows(&self, y: &[f64], tol: f64) -> Vec<usize> {
        (0..self.a.len())
            .filter(|&i| (dot(&self.a[i], y) - self.b[i]).abs() <= tol)
            .collect()
    }

    pub(crate) fn normal(&self, i: usize) -> &[f64] {
        &self.a[i]
    }

    pub(crate) fn map_rows(&self, f: impl Fn(&[f64], f64) -> (Point, f64)) -> Result<Polyhedron> {
        let rows = self.a.iter().zip(&self.b).map(|(a, b)| f(a, *b)).collect();
        Polyhedron::new(self.dim, rows)
    }

    /// Distance under the sup norm: the linear program min t over
    /// A z <= b, |z_k - x_k| <= t, solved by vertex enumeration.
    pub(crate) fn sup_distance(&self, x: &[f64]) -> f64 {
        if self.feasible(x, 0.0) {
            return 0.0;
        }
        let n = self.dim + 1;
        let mut rows: Vec<(Vec<f64>, f64)> = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(ai, bi)| {
                let mut r = ai.clone();
                r.push(0.0);
                (r, *bi)
            })
            .collect();
        for k in 0..self.dim {
            for s in [1.0, -1.0] {
                let mut r = vec![0.0; n];
                r[k] = s;
                r[self.dim] = -1.0;
                rows.push((r, s * x[k]));
            }
        }
        let ok = |v: &[f64]| rows.iter().all(|(r, b)| dot(r, v) <= b + 1e-10 * (1.0 + b.abs()));
        let mut best = f64::INFINITY;
        for sub in subsets(rows.len(), n) {
            let m = DMatrix::from_fn(n, n, |i, j| rows[sub[i]].0[j]);
            let rhs = nalgebra::DVector::from_fn(n, |i, _| rows[sub[i]].1);
            let Some(v) = m.lu().solve(&rhs) else { continue };
            let v: Vec<f64> = v.iter().copied().collect();
            if v[self.dim] < best && v.iter().all(|c| c.is_finite()) && ok(&v) {
                best = v[self.dim];
            }
        }
        best.max(0.0)
    }
}

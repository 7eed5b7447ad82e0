use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{axpy, dist2, dot, norm2, normalized, orthonormalize, scale, Point};

/// Tolerance for deciding cone membership of unit vectors.
pub const CONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConeKind {
    Zero,
    /// {t g : t >= 0}, |g| = 1.
    Ray { g: Point },
    /// A linear subspace with orthonormal basis.
    Linear { basis: Vec<Point> },
    /// Nonnegative combinations of unit generators.
    Generated { generators: Vec<Point> },
}

/// A finitely generated convex cone in R^dim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cone {
    pub dim: usize,
    pub kind: ConeKind,
}

fn lstsq(cols: &[&Point], v: &[f64]) -> Option<Vec<f64>> {
    let dim = v.len();
    let k = cols.len();
    let a = DMatrix::from_fn(dim, k, |i, j| cols[j][i]);
    let gram = a.transpose() * &a;
    if gram.determinant().abs() < 1e-12 {
        return None;
    }
    let rhs = a.transpose() * DVector::from_column_slice(v);
    gram.lu().solve(&rhs).map(|c| c.iter().copied().collect())
}

fn subsets_upto(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while let Some(s) = stack.pop() {
        if s.len() < k {
            for j in s[s.len() - 1] + 1..n {
                let mut t = s.clone();
                t.push(j);
                stack.push(t);
            }
        }
        out.push(s);
    }
    out
}

impl Cone {
    pub fn zero(dim: usize) -> Cone {
        Cone { dim, kind: ConeKind::Zero }
    }

    pub fn ray(g: &[f64]) -> Cone {
        match normalized(g) {
            Some(g) => Cone { dim: g.len(), kind: ConeKind::Ray { g } },
            None => Cone::zero(g.len()),
        }
    }

    /// Subspace spanned by `vs`; dependent vectors are dropped.
    pub fn linear(dim: usize, vs: &[Point]) -> Cone {
        let mut basis: Vec<Point> = Vec::new();
        for v in vs {
            let mut cand = basis.clone();
            cand.push(v.clone());
            if let Some(b) = orthonormalize(&cand) {
                basis = b;
            }
        }
        match basis.len() {
            0 => Cone::zero(dim),
            _ => Cone { dim, kind: ConeKind::Linear { basis } },
        }
    }

    /// Cone generated by `gens`, reduced to a ray or subspace when possible.
    pub fn generated(dim: usize, gens: &[Point]) -> Cone {
        let mut g: Vec<Point> = Vec::new();
        for v in gens {
            if let Some(u) = normalized(v) {
                if !g.iter().any(|w| dist2(w, &u) < 1e-9) {
                    g.push(u);
                }
            }
        }
        match g.len() {
            0 => Cone::zero(dim),
            1 => Cone { dim, kind: ConeKind::Ray { g: g.remove(0) } },
            _ => {
                // a generator set closed under negation spans a subspace
                let sym = g.iter().all(|u| g.iter().any(|w| dist2(w, &scale(u, -1.0)) < 1e-9));
                if sym {
                    Cone::linear(dim, &g)
                } else {
                    Cone { dim, kind: ConeKind::Generated { generators: g } }
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ConeKind::Zero)
    }

    /// Generators of the cone as a convex cone (subspaces contribute +-basis).
    pub fn generators(&self) -> Vec<Point> {
        match &self.kind {
            ConeKind::Zero => Vec::new(),
            ConeKind::Ray { g } => vec![g.clone()],
            ConeKind::Linear { basis } => basis.iter().flat_map(|b| [b.clone(), scale(b, -1.0)]).collect(),
            ConeKind::Generated { generators } => generators.clone(),
        }
    }

    /// Nearest point of the cone to v.
    pub fn project(&self, v: &[f64]) -> Point {
        match &self.kind {
            ConeKind::Zero => vec![0.0; self.dim],
            ConeKind::Ray { g } => scale(g, dot(v, g).max(0.0)),
            ConeKind::Linear { basis } => {
                basis.iter().fold(vec![0.0; self.dim], |acc, b| axpy(&acc, dot(v, b), b))
            }
            ConeKind::Generated { generators } => {
                let mut best = vec![0.0; self.dim];
                let mut best_d = norm2(v);
                for s in subsets_upto(generators.len(), self.dim) {
                    let cols: Vec<&Point> = s.iter().map(|&i| &generators[i]).collect();
                    let Some(c) = lstsq(&cols, v) else { continue };
                    if c.iter().any(|&ci| ci < -1e-12) {
                        continue;
                    }
                    let p = cols.iter().zip(&c).fold(vec![0.0; self.dim], |acc, (g, ci)| axpy(&acc, ci.max(0.0), g));
                    let d = dist2(v, &p);
                    if d < best_d {
                        best_d = d;
                        best = p;
                    }
                }
                best
            }
        }
    }

    pub fn dist(&self, v: &[f64]) -> f64 {
        dist2(v, &self.project(v))
    }

    /// v is a nonnegative combination of the generators, within tol.
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        self.dist(v) <= tol
    }

    /// Intersection with another cone, by candidate extreme rays: generators
    /// of either cone lying in the other and, in three dimensions, the lines
    /// where faces of the two cones meet.
    pub fn intersect(&self, other: &Cone) -> Cone {
        if self.is_zero() || other.is_zero() {
            return Cone::zero(self.dim);
        }
        let (ga, gb) = (self.generators(), other.generators());
        let mut cand: Vec<Point> = Vec::new();
        for u in &ga {
            if other.contains(u, CONE_TOL) {
                cand.push(u.clone());
            }
        }
        for u in &gb {
            if self.contains(u, CONE_TOL) {
                cand.push(u.clone());
            }
        }
        if self.dim == 3 {
            let planes = |g: &[Point]| -> Vec<Point> {
                let mut out = Vec::new();
                for i in 0..g.len() {
                    for j in i + 1..g.len() {
                        if let Some(n) = normalized(&cross(&g[i], &g[j])) {
                            out.push(n);
                        }
                    }
                }
                out
            };
            for na in planes(&ga) {
                for nb in planes(&gb) {
                    if let Some(l) = normalized(&cross(&na, &nb)) {
                        for s in [1.0, -1.0] {
                            let u = scale(&l, s);
                            if self.contains(&u, CONE_TOL) && other.contains(&u, CONE_TOL) {
                                cand.push(u);
                            }
                        }
                    }
                }
            }
        }
        Cone::generated(self.dim, &cand)
    }

    /// Unit vectors spread over the section of the cone by the unit sphere.
    pub fn section_samples(&self, k: usize) -> Vec<Point> {
        match &self.kind {
            ConeKind::Zero => Vec::new(),
            ConeKind::Ray { g } => vec![g.clone()],
            ConeKind::Linear { basis } => match basis.len() {
                1 => vec![basis[0].clone(), scale(&basis[0], -1.0)],
                2 => (0..k)
                    .map(|j| {
                        let t = std::f64::consts::TAU * j as f64 / k as f64;
                        axpy(&scale(&basis[0], t.cos()), t.sin(), &basis[1])
                    })
                    .collect(),
                _ => {
                    // whole space: Fibonacci sphere
                    let n = k * k / 4;
                    let ga = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                    (0..n)
                        .map(|j| {
                            let z = 1.0 - 2.0 * (j as f64 + 0.5) / n as f64;
                            let r = (1.0 - z * z).sqrt();
                            let t = ga * j as f64;
                            let local = [r * t.cos(), r * t.sin(), z];
                            (0..basis.len()).fold(vec![0.0; self.dim], |acc, b| axpy(&acc, local[b], &basis[b]))
                        })
                        .collect()
                }
            },
            ConeKind::Generated { generators } => {
                let mut out = generators.clone();
                let g = generators;
                for i in 0..g.len() {
                    for j in i + 1..g.len() {
                        for s in 1..k {
                            let t = s as f64 / k as f64;
                            if let Some(u) = normalized(&axpy(&scale(&g[i], 1.0 - t), t, &g[j])) {
                                out.push(u);
                            }
                        }
                        if self.dim == 3 {
                            for l in j + 1..g.len() {
                                let q = k / 4 + 1;
                                for a in 1..q {
                                    for b in 1..q - a {
                                        let (ta, tb) = (a as f64 / q as f64, b as f64 / q as f64);
                                        let v = axpy(&axpy(&scale(&g[i], 1.0 - ta - tb), ta, &g[j]), tb, &g[l]);
                                        if let Some(u) = normalized(&v) {
                                            out.push(u);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                out
            }
        }
    }
}

pub(crate) fn cross(a: &[f64], b: &[f64]) -> Point {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

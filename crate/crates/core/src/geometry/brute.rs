//! Grid search used as an independent oracle and as the inner solver of
//! the estimators.

use serde::{Deserialize, Serialize};

use super::SetExpr;
use crate::error::{Error, Result};
use crate::linalg::{check_dim, dist2, Norm, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radius: f64,
    pub points_per_axis: usize,
    pub refinement_levels: usize,
}

impl GridSpec {
    pub fn new(radius: f64, points_per_axis: usize, refinement_levels: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Precondition("grid radius must be positive".into()));
        }
        if points_per_axis < 3 {
            return Err(Error::Precondition("grid needs at least 3 points per axis".into()));
        }
        Ok(GridSpec { radius, points_per_axis, refinement_levels })
    }

    /// Samples evaluated per level in dimension `dim`.
    pub fn samples_per_level(&self, dim: usize) -> usize {
        self.points_per_axis.pow(dim as u32)
    }
}

/// Calls `f` on every node of the cube grid with half-width `w`.
fn for_each_node(center: &[f64], w: f64, n: usize, mut f: impl FnMut(&[f64], bool)) {
    let dim = center.len();
    let h = 2.0 * w / (n - 1) as f64;
    let mut idx = vec![0usize; dim];
    let mut p = vec![0.0; dim];
    loop {
        let mut on_face = false;
        for k in 0..dim {
            p[k] = center[k] - w + h * idx[k] as f64;
            on_face |= idx[k] == 0 || idx[k] == n - 1;
        }
        f(&p, on_face);
        let mut k = 0;
        loop {
            if k == dim {
                return;
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BruteDistance {
    pub value: f64,
    pub cell_diagonal: f64,
    pub samples: usize,
    /// False when no grid sample was a member: the value is then +inf.
    pub found: bool,
}

/// Most cells kept per level by `brute_distance`.
const MAX_CELLS: usize = 1 << 14;

/// Distance from `x` to `s` by branch and bound over grid cells. The first
/// level is the `points_per_axis` grid on the cube of half-width `radius`;
/// each refinement level halves every cell that may still hold a nearest
/// point. A cell counts as a member when its center is within its
/// circumradius of `s`, so the result is within one cell diagonal of the
/// distance whenever the nearest point lies in the ball of radius `radius`.
pub fn brute_distance(s: &SetExpr, x: &[f64], g: &GridSpec) -> Result<BruteDistance> {
    check_dim(s.dim(), x)?;
    let n = g.points_per_axis;
    let dim = x.len();
    let mut half = g.radius / (n - 1) as f64;
    let mut cells: Vec<Point> = Vec::new();
    for_each_node(x, g.radius, n, |p, _| cells.push(p.to_vec()));
    let mut samples = 0;
    let mut best = f64::INFINITY;
    let mut diag = 2.0 * half * (dim as f64).sqrt();
    for level in 0..=g.refinement_levels {
        let circ = half * (dim as f64).sqrt();
        diag = 2.0 * circ;
        let mut value = f64::INFINITY;
        let mut upper = f64::INFINITY;
        let mut scored: Vec<(f64, Point)> = Vec::with_capacity(cells.len());
        for c in cells.drain(..) {
            samples += 1;
            let dc = s.dist(&c);
            let dx = dist2(&c, x);
            if dc <= circ && dx <= g.radius + circ {
                value = value.min(dx);
            }
            upper = upper.min(dx + dc);
            if dc <= circ {
                scored.push((dx - circ, c));
            }
        }
        if value.is_infinite() {
            return Ok(BruteDistance { value: f64::INFINITY, cell_diagonal: diag, samples, found: false });
        }
        best = value;
        if level == g.refinement_levels {
            break;
        }
        scored.retain(|(lb, _)| *lb <= upper);
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        scored.truncate(MAX_CELLS);
        half *= 0.5;
        for (_, c) in scored {
            for corner in 0..(1usize << dim) {
                let child = (0..dim)
                    .map(|k| c[k] + if corner >> k & 1 == 1 { half } else { -half })
                    .collect();
                cells.push(child);
            }
        }
    }
    Ok(BruteDistance { value: best, cell_diagonal: diag, samples, found: true })
}

/// Outcome of a feasibility probe.
#[derive(Debug, Clone)]
pub struct Probe {
    /// A point of the ball with residual <= tol, if one was found.
    pub point: Option<Point>,
    pub best: f64,
    pub evals: usize,
}

/// Grid-and-zoom search over norm balls for points where a 1-Lipschitz
/// residual function vanishes.
#[derive(Debug, Clone)]
pub struct RegionSearch {
    pub points_per_axis: usize,
    pub max_levels: usize,
    /// Relative precision of distances returned by `distance`.
    pub rel_precision: f64,
}

impl RegionSearch {
    pub fn for_dim(dim: usize) -> Self {
        let n = match dim {
            1 => 9,
            2 => 7,
            3 => 5,
            _ => 3,
        };
        RegionSearch { points_per_axis: n, max_levels: 48, rel_precision: 1e-4 }
    }

    /// Looks for y in the `norm`-ball B_r(c) with f(y) <= tol.
    pub fn probe(&self, f: &dyn Fn(&[f64]) -> f64, c: &[f64], r: f64, norm: &Norm, tol: f64) -> Probe {
        let n = self.points_per_axis;
        let mut center = c.to_vec();
        let mut w = r;
        let mut best = f64::INFINITY;
        let mut best_pt = c.to_vec();
        let mut evals = 0;
        for level in 0..=self.max_levels {
            let h = 2.0 * w / (n - 1) as f64;
            let slack = norm.uniform_vector_norm(0.5 * h);
            let mut lvl_best = f64::INFINITY;
            let mut lvl_pt = center.clone();
            let mut lvl_face = false;
            let mut lvl_clipped = false;
            for_each_node(&center, w, n, |p, face| {
                let q = norm.clip_to_ball(c, r, p);
                let clipped = q.iter().zip(p).any(|(a, b)| a != b);
                let v = f(&q);
                evals += 1;
                if v < lvl_best {
                    lvl_best = v;
                    lvl_pt = q;
                    lvl_face = face;
                    lvl_clipped = clipped;
                }
            });
            if lvl_best < best {
                best = lvl_best;
                best_pt = lvl_pt;
            }
            if best <= tol {
                return Probe { point: Some(best_pt), best, evals };
            }
            if lvl_best - slack > tol {
                // certified on the first level, a local verdict afterwards
                return Probe { point: None, best, evals };
            }
            center = best_pt.clone();
            if level == 0 || !lvl_face || lvl_clipped {
                w *= 0.5;
            }
        }
        Probe { point: None, best, evals }
    }

    /// Distance from x to {y : f(y) <= tol} within the ball of radius
    /// `search` about x. `upper` is the distance to a known member, if any.
    /// Returns None when no member was found.
    pub fn distance(
        &self,
        f: &dyn Fn(&[f64]) -> f64,
        x: &[f64],
        search: f64,
        norm: &Norm,
        tol: f64,
        upper: Option<f64>,
    ) -> Option<f64> {
        let fx = f(x);
        if fx <= tol {
            return Some(0.0);
        }
        let mut hi = match upper {
            Some(u) => u,
            None => {
                let pr = self.probe(f, x, search, norm, tol);
                norm.dist(&pr.point?, x)
            }
        };
        let mut lo = (fx - tol).max(0.0);
        while hi - lo > self.rel_precision * hi {
            let mid = 0.5 * (lo + hi);
            let pr = self.probe(f, x, mid, norm, tol);
            match pr.point {
                Some(p) => hi = norm.dist(&p, x).min(mid),
                None => lo = mid,
            }
        }
        Some(hi)
    }

    /// True when some y with f(y) <= tol lies within distance t of x.
    pub fn within(&self, f: &dyn Fn(&[f64]) -> f64, x: &[f64], t: f64, norm: &Norm, tol: f64) -> bool {
        if f(x) <= tol {
            return true;
        }
        t > 0.0 && self.probe(f, x, t, norm, tol).point.is_some()
    }
}

//! Direct estimators of the metric regularity moduli of a mapping.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Graph, SvMapping};
use crate::error::Result;
use crate::linalg::Point;
use crate::moduli::{Bias, Ctx, EstimatorParams, ModulusEstimate, ModulusKind, RhoRow, SEARCH_FACTOR};
use crate::sampling::{ball_grid, direction_tuples, rng_for, unit_directions};

const RADIUS_FRACTIONS: [f64; 3] = [1.0, 0.1, 0.01];
const RANDOM_TUPLES: usize = 16;
const X_GRID: usize = 5;
/// Search radius for slices of an explicit graph, in multiples of delta.
const SLICE_FACTOR: f64 = 4.0;

struct MapCtx<'a> {
    f: &'a SvMapping,
    p: &'a EstimatorParams,
    scene: Option<Ctx<'a>>,
}

enum Inv {
    Dist(f64),
    Empty,
    Pruned,
}

impl<'a> MapCtx<'a> {
    fn new(f: &'a SvMapping, p: &'a EstimatorParams) -> Result<Self> {
        p.validate()?;
        let scene = match &f.graph {
            Graph::Product(sc) => Some(Ctx::new(sc, p)?),
            Graph::Set(_) => None,
        };
        Ok(MapCtx { f, p, scene })
    }

    fn radius(&self, delta: f64) -> f64 {
        match self.f.graph {
            Graph::Product(_) => SEARCH_FACTOR * delta,
            Graph::Set(_) => SLICE_FACTOR * delta,
        }
    }

    /// d(x, F^{-1}(y)), skipped once it is known to reach `prune_at`.
    fn inverse(&self, x: &[f64], y: &[f64], delta: f64, prune_at: Option<f64>) -> Inv {
        let tol = self.p.bisection_tol * delta;
        let f = self.f;
        if let (Graph::Product(sc), Some(ctx)) = (&f.graph, &self.scene) {
            let shifts: Vec<Point> = y.chunks(sc.dim()).map(|b| b.to_vec()).collect();
            let exact = ctx.cap_dist(x, &shifts).or_else(|| {
                let eq = shifts.windows(2).all(|w| w[0] == w[1]);
                sc.intersection
                    .as_ref()
                    .filter(|_| eq)
                    .map(|int| Some(int.dist_in(&crate::linalg::add(x, &shifts[0]), &sc.norm)))
            });
            if let Some(d) = exact {
                return d.map_or(Inv::Empty, Inv::Dist);
            }
            let res = |z: &[f64]| sc.max_dist_shifted(z, &shifts);
            return self.searched(&res, x, delta, tol, prune_at, &sc.norm);
        }
        let Graph::Set(g) = &f.graph else { unreachable!() };
        let res = |z: &[f64]| g.dist(&super::concat(z, y));
        self.searched(&res, x, delta, tol, prune_at, &f.x_norm())
    }

    fn searched(
        &self,
        res: &dyn Fn(&[f64]) -> f64,
        x: &[f64],
        delta: f64,
        tol: f64,
        prune_at: Option<f64>,
        norm: &crate::linalg::Norm,
    ) -> Inv {
        let search = crate::geometry::RegionSearch::for_dim(x.len());
        if let Some(t) = prune_at {
            if t.is_finite() && search.within(res, x, t, norm, tol) {
                return Inv::Pruned;
            }
        }
        match search.distance(res, x, self.radius(delta), norm, tol, None) {
            Some(d) => Inv::Dist(d),
            None => Inv::Empty,
        }
    }

    /// d(y, F(x)); None when it exceeds `cap`.
    fn image(&self, x: &[f64], y: &[f64], delta: f64, cap: f64) -> Option<f64> {
        let tol = self.p.bisection_tol * delta;
        let r = match self.f.graph {
            Graph::Product(_) => f64::INFINITY,
            Graph::Set(_) => cap.min(2.0 * SLICE_FACTOR * delta),
        };
        self.f.image_dist(x, y, r, tol).filter(|d| *d <= cap)
    }

    /// Points of Y at distance r from ybar.
    fn y_sphere(&self, r: f64, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let f = self.f;
        let out: Vec<Point> = match &f.graph {
            Graph::Product(sc) => {
                let dirs = unit_directions(&sc.norm, self.p.perturbation_samples, rng);
                direction_tuples(sc.m(), sc.dim(), &dirs, RANDOM_TUPLES, rng)
                    .into_iter()
                    .map(|t| t.concat())
                    .collect()
            }
            Graph::Set(_) => unit_directions(&f.y_norm(), self.p.perturbation_samples, rng),
        };
        out.into_iter()
            .map(|u| crate::linalg::axpy(&f.ybar, r, &u))
            .collect()
    }

    fn y_samples(&self, delta: f64, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let f = self.f;
        let mut ys = Vec::new();
        if let Graph::Set(_) = f.graph {
            if f.dim_y <= 3 {
                ys.extend(ball_grid(&f.ybar, delta, &f.y_norm(), self.p.ball_samples.points_per_axis, rng));
            }
        }
        for frac in RADIUS_FRACTIONS {
            ys.extend(self.y_sphere(frac * delta, rng));
        }
        ys
    }

    fn x_samples(&self, delta: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let f = self.f;
        let norm = f.x_norm();
        let grid = ball_grid(&f.xbar, delta, &norm, n, rng);
        let mut xs = grid.clone();
        if let Graph::Product(sc) = &f.graph {
            for g in &grid {
                for s in &sc.sets {
                    let w = s.proj(g);
                    if norm.dist(&w, &f.xbar) <= delta {
                        xs.push(w);
                    }
                }
            }
        }
        xs
    }
}

fn deltas(p: &EstimatorParams) -> Vec<(usize, f64)> {
    p.schedule.values().into_iter().enumerate().collect()
}

fn row(delta: f64, ratio: f64, samples: usize, excluded: usize) -> RhoRow {
    RhoRow { rho: delta, ratio, samples, excluded }
}

/// Metric semiregularity modulus: min of d(y, ybar) / d(xbar, F^{-1}(y))
/// over y near ybar, an empty inverse image counting as 0.
pub fn semireg_modulus(f: &SvMapping, p: &EstimatorParams) -> Result<ModulusEstimate> {
    let mc = MapCtx::new(f, p)?;
    let ynorm = f.y_norm();
    let rows: Vec<(RhoRow, usize)> = deltas(p)
        .into_par_iter()
        .map(|(k, delta)| {
            let mut rng = rng_for(p.seed, &format!("semireg-{k}"));
            let ys = mc.y_samples(delta, &mut rng);
            let tol = p.bisection_tol * delta;
            let (mut best, mut excluded, mut empty) = (f64::INFINITY, 0, 0);
            for y in &ys {
                let num = ynorm.dist(y, &f.ybar);
                if num <= tol {
                    excluded += 1;
                    continue;
                }
                let prune = (best.is_finite() && best > 0.0).then(|| num / best);
                match mc.inverse(&f.xbar, y, delta, prune) {
                    Inv::Empty => {
                        empty += 1;
                        best = 0.0;
                        break;
                    }
                    Inv::Dist(d) if d > tol => best = best.min(num / d),
                    Inv::Dist(_) => excluded += 1,
                    Inv::Pruned => {}
                }
            }
            (row(delta, best, ys.len(), excluded), empty)
        })
        .collect();
    Ok(finish(ModulusKind::Theta, rows, p))
}

/// Metric subregularity modulus: min of d(ybar, F(x)) / d(x, F^{-1}(ybar))
/// over x near xbar off F^{-1}(ybar).
pub fn subreg_modulus(f: &SvMapping, p: &EstimatorParams) -> Result<ModulusEstimate> {
    let mc = MapCtx::new(f, p)?;
    let slice = f.graph_slice_at(&f.ybar);
    let rows: Vec<(RhoRow, usize)> = deltas(p)
        .into_par_iter()
        .map(|(k, delta)| {
            let mut rng = rng_for(p.seed, &format!("subreg-{k}"));
            let xs = mc.x_samples(delta, p.ball_samples.points_per_axis.max(9), &mut rng);
            let tol = p.bisection_tol * delta;
            let (mut best, mut excluded) = (f64::INFINITY, 0);
            for x in &xs {
                let den = match &slice {
                    Some(s) => s.dist(&super::concat(x, &f.ybar)),
                    None => match mc.inverse(x, &f.ybar, delta, None) {
                        Inv::Dist(d) => d,
                        // xbar is a member, so this is a search failure
                        _ => f.x_norm().dist(x, &f.xbar),
                    },
                };
                if den <= tol {
                    excluded += 1;
                    continue;
                }
                if let Some(num) = mc.image(x, &f.ybar, delta, best * den) {
                    best = best.min(num / den);
                }
            }
            (row(delta, best, xs.len(), excluded), 0)
        })
        .collect();
    Ok(finish(ModulusKind::Zeta, rows, p))
}

/// Metric regularity modulus: min of d(y, F(x)) / d(x, F^{-1}(y)) over
/// pairs near (xbar, ybar), an empty inverse image counting as 0.
pub fn reg_modulus(f: &SvMapping, p: &EstimatorParams) -> Result<ModulusEstimate> {
    let mc = MapCtx::new(f, p)?;
    let rows: Vec<(RhoRow, usize)> = deltas(p)
        .into_par_iter()
        .map(|(k, delta)| {
            let mut rng = rng_for(p.seed, &format!("reg-{k}"));
            let mut xs = vec![f.xbar.clone()];
            xs.extend(mc.x_samples(delta, X_GRID, &mut rng));
            let mut ys = vec![f.ybar.clone()];
            ys.extend(mc.y_samples(delta, &mut rng));
            let tol = p.bisection_tol * delta;
            let (mut best, mut excluded, mut empty) = (f64::INFINITY, 0, 0);
            'pairs: for x in &xs {
                for y in &ys {
                    match (&f.graph, best) {
                        (_, b) if b == 0.0 => break 'pairs,
                        (Graph::Product(_), _) => {
                            let num = mc.image(x, y, delta, f64::INFINITY).unwrap_or(f64::INFINITY);
                            if num <= tol {
                                excluded += 1;
                                continue;
                            }
                            let prune = best.is_finite().then(|| num / best);
                            match mc.inverse(x, y, delta, prune) {
                                Inv::Empty => {
                                    empty += 1;
                                    best = 0.0;
                                }
                                Inv::Dist(d) if d > tol => best = best.min(num / d),
                                Inv::Dist(_) => excluded += 1,
                                Inv::Pruned => {}
                            }
                        }
                        (Graph::Set(_), _) => match mc.inverse(x, y, delta, None) {
                            Inv::Empty => {
                                empty += 1;
                                best = 0.0;
                            }
                            Inv::Dist(d) if d > tol => {
                                if let Some(num) = mc.image(x, y, delta, best * d) {
                                    best = best.min(num / d);
                                }
                            }
                            _ => excluded += 1,
                        },
                    }
                }
            }
            (row(delta, best, xs.len() * ys.len(), excluded), empty)
        })
        .collect();
    Ok(finish(ModulusKind::ThetaHat, rows, p))
}

fn finish(kind: ModulusKind, rows: Vec<(RhoRow, usize)>, p: &EstimatorParams) -> ModulusEstimate {
    let empties = rows.iter().map(|r| r.1).sum();
    let rows = rows.into_iter().map(|r| r.0).collect();
    let mut est = ModulusEstimate::from_rows(kind, rows, p, Bias::UpperBiased, false);
    est.diagnostics.empty_translated = empties;
    if est.value == f64::INFINITY {
        est.diagnostics.vacuous = true;
    }
    est
}


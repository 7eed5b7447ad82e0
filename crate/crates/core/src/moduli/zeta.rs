//! Subregularity: ratios max_i d(x, Omega_i) / d(x, cap Omega_i) near xbar
//! and the inclusion radius zeta_{rho,delta}.

use rayon::prelude::*;

use super::params::{Bias, Ctx, EstimatorParams, ModulusEstimate, ModulusKind, RhoRow};
use super::search::pattern_min;
use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::linalg::Point;
use crate::sampling::{ball_grid, rng_for};

/// Ratio at x, or None when x is within tol of the intersection.
/// `best` allows skipping the intersection search when x cannot improve it.
pub(crate) fn zeta_ratio(ctx: &Ctx, x: &[f64], tol: f64, best: f64) -> Option<f64> {
    let sc = ctx.scene;
    let num = sc.max_dist(x);
    if sc.intersection.is_none() && best.is_finite() && best > 0.0 {
        let f = |y: &[f64]| sc.max_dist(y);
        if ctx.search.within(&f, x, num / best, &sc.norm, tol) {
            // ratio >= best, or x is excluded
            return Some(f64::INFINITY);
        }
    }
    let d = ctx.intersection_dist(x, tol);
    (d > tol).then(|| num / d)
}

pub(crate) struct ZetaRho {
    pub row: RhoRow,
}

pub(crate) fn zeta_at(ctx: &Ctx, k: usize, rho: f64) -> ZetaRho {
    let sc = ctx.scene;
    let tol = ctx.tol(rho);
    let radius = rho * ctx.p.ball_samples.radius.min(1.0);
    let mut rng = rng_for(ctx.p.seed, &format!("zeta-grid-{k}"));
    let samples = ball_grid(&sc.xbar, radius, &sc.norm, ctx.grid_n(), &mut rng);
    let mut best = f64::INFINITY;
    let mut arg: Option<Point> = None;
    let mut excluded = 0;
    let mut count = 0;
    for x in &samples {
        count += 1;
        match zeta_ratio(ctx, x, tol, best) {
            None => excluded += 1,
            Some(r) if r < best => {
                best = r;
                arg = Some(x.clone());
            }
            _ => {}
        }
    }
    if let Some(x0) = arg {
        let h = 2.0 * radius / (ctx.grid_n() - 1) as f64;
        let mut eval = |y: &[f64]| {
            count += 1;
            if sc.norm.dist(y, &sc.xbar) > radius {
                return None;
            }
            zeta_ratio(ctx, y, tol, f64::INFINITY)
        };
        let (_, v) = pattern_min(&x0, best, 0.5 * h, ctx.p.ball_samples.refinement_levels + 4, &mut eval);
        best = best.min(v);
    }
    ZetaRho { row: RhoRow { rho, ratio: best, samples: count, excluded } }
}

pub(crate) fn zeta_rows(ctx: &Ctx) -> Vec<ZetaRho> {
    let sched = ctx.p.schedule.values();
    sched.par_iter().enumerate().map(|(k, &rho)| zeta_at(ctx, k, rho)).collect()
}

/// Subregularity constant, clamped to [0, 1].
pub fn zeta(scene: &Scene, p: &EstimatorParams) -> Result<ModulusEstimate> {
    let scene = &scene.centered()?;
    let ctx = Ctx::new(scene, p)?;
    let rows = zeta_rows(&ctx).into_iter().map(|z| z.row).collect();
    Ok(ModulusEstimate::from_rows(ModulusKind::Zeta, rows, p, Bias::UpperBiased, true))
}

/// Largest r such that every sample x in B_delta(xbar) with
/// max_i d(x, Omega_i) <= r satisfies d_cap(x) <= rho + tol, evaluated on a
/// fixed sample set. Infinite when no sample is farther than rho from the
/// intersection.
pub fn zeta_rho_delta_on(scene: &Scene, samples: &[Point], rho: f64, delta: f64, p: &EstimatorParams) -> Result<f64> {
    if !(rho > 0.0 && rho < delta) {
        return Err(Error::Precondition("need 0 < rho < delta".into()));
    }
    let ctx = Ctx::new(scene, p)?;
    let tol = ctx.tol(rho);
    let mut best = f64::INFINITY;
    for x in samples {
        if scene.norm.dist(x, &scene.xbar) > delta {
            continue;
        }
        let num = scene.max_dist(x);
        if num >= best {
            continue;
        }
        if ctx.intersection_dist(x, tol) > rho + tol {
            best = num;
        }
    }
    Ok(best)
}

/// zeta_{rho,delta}: grid over B_delta(xbar) followed by a local search
/// along the constraint d_cap(x) > rho.
pub fn zeta_rho_delta(scene: &Scene, rho: f64, delta: f64, p: &EstimatorParams) -> Result<f64> {
    let scene = &scene.centered()?;
    if !(rho > 0.0 && rho < delta) {
        return Err(Error::Precondition("need 0 < rho < delta".into()));
    }
    let ctx = Ctx::new(scene, p)?;
    let tol = ctx.tol(rho);
    let mut rng = rng_for(p.seed, "zeta-rho-delta");
    let n = ctx.grid_n().max(9);
    let samples = ball_grid(&scene.xbar, delta, &scene.norm, n, &mut rng);
    let mut best = f64::INFINITY;
    let mut arg: Option<Point> = None;
    for x in &samples {
        let num = scene.max_dist(x);
        if num < best && ctx.intersection_dist(x, tol) > rho + tol {
            best = num;
            arg = Some(x.clone());
        }
    }
    if let Some(x0) = arg {
        let h = 2.0 * delta / (n - 1) as f64;
        let mut eval = |y: &[f64]| {
            if scene.norm.dist(y, &scene.xbar) > delta || ctx.intersection_dist(y, tol) <= rho + tol {
                return None;
            }
            Some(scene.max_dist(y))
        };
        let (_, v) = pattern_min(&x0, best, 0.5 * h, p.ball_samples.refinement_levels + 10, &mut eval);
        best = best.min(v);
    }
    Ok(best)
}

//! Slope constant: the least rate of decrease of max_i |x - omega_i| over
//! configurations near xbar, steps measured in the rho-weighted product norm.

use rayon::prelude::*;

use super::configs::{sample_configs, Config};
use super::params::{Bias, Ctx, EstimatorParams, ModulusEstimate, ModulusKind, RhoRow};
use super::search::{pattern_min, stencil};
use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::linalg::{axpy, dist2, normalized, sub, Point};
use crate::sampling::{rng_for, unit_directions};

const STEP: f64 = 1e-3;

fn spread(u: &[f64], v: &[Point]) -> f64 {
    v.iter().map(|w| dist2(u, w)).fold(0.0, f64::max)
}

fn shift_norm(v: &[Point], w: &[Point]) -> f64 {
    v.iter().zip(w).map(|(a, b)| dist2(a, b)).fold(0.0, f64::max)
}

/// Best decrease ratio for the step x -> x + h d over three choices of the
/// new omega: unchanged, projections of the new x, and omega moved with x.
fn step_ratio(scene: &Scene, c: &Config, f0: f64, h: f64, d: &[f64], rho: f64) -> f64 {
    let u = axpy(&c.x, h, d);
    let mut best = ((f0 - spread(&u, &c.omega)).max(0.0)) / h;
    let reproj: Vec<Point> = scene.sets.iter().map(|s| s.proj(&u)).collect();
    let moved: Vec<Point> = scene
        .sets
        .iter()
        .zip(&c.omega)
        .map(|(s, w)| s.proj(&axpy(w, h, d)))
        .collect();
    for v in [reproj, moved] {
        let den = h.max(rho * shift_norm(&v, &c.omega));
        best = best.max((f0 - spread(&u, &v)).max(0.0) / den);
    }
    best
}

/// Slope of the configuration c at weight rho.
pub fn config_slope(scene: &Scene, c: &Config, rho: f64, dirs: &[Point]) -> f64 {
    let f0 = c.spread();
    let h = STEP * f0;
    let mut cand: Vec<Point> = dirs.to_vec();
    for w in c.omega.iter().chain(std::iter::once(&scene.xbar)) {
        if let Some(d) = normalized(&sub(w, &c.x)) {
            cand.push(d);
        }
    }
    let mut best = 0.0;
    let mut arg = cand[0].clone();
    for d in &cand {
        let s = step_ratio(scene, c, f0, h, d, rho);
        if s > best {
            best = s;
            arg = d.clone();
        }
    }
    let mut eval = |y: &[f64]| normalized(y).map(|d| -step_ratio(scene, c, f0, h, &d, rho));
    let (_, v) = pattern_min(&arg, -best, 0.1, 8, &mut eval);
    best.max(-v)
}

pub(crate) fn slope_rows(ctx: &Ctx) -> Vec<RhoRow> {
    let sc = ctx.scene;
    let mut rng = rng_for(ctx.p.seed, "slope-directions");
    let mut dirs = unit_directions(&sc.norm, ctx.p.perturbation_samples, &mut rng);
    dirs.extend(stencil(sc.dim()));
    let sched = ctx.p.schedule.values();
    sched
        .par_iter()
        .enumerate()
        .map(|(k, &rho)| {
            let configs = sample_configs(sc, rho, ctx.grid_n(), ctx.p.seed, &format!("slope-{k}"));
            let ratio = configs
                .iter()
                .map(|c| config_slope(sc, c, rho, &dirs))
                .fold(f64::INFINITY, f64::min);
            RhoRow { rho, ratio, samples: configs.len(), excluded: 0 }
        })
        .collect()
}

/// Slope constant of the scene; Euclidean scenes only.
pub fn slope_zeta_hat(scene: &Scene, p: &EstimatorParams) -> Result<ModulusEstimate> {
    let scene = &scene.centered()?;
    if !scene.norm.is_euclidean() {
        return Err(Error::Unsupported("slope constant needs the Euclidean norm".into()));
    }
    let ctx = Ctx::new(scene, p)?;
    let rows = slope_rows(&ctx);
    Ok(ModulusEstimate::from_rows(ModulusKind::ZetaHatSlope, rows, p, Bias::PointEstimate, true))
}

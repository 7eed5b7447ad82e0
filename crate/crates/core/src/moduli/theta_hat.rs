//! Uniform regularity through the metric form
//! max_i d(x + x_i, Omega_i) / d(x, cap(Omega_i - x_i)).

use rayon::prelude::*;

use super::params::{Bias, Ctx, ModulusEstimate, ModulusKind, RhoRow, SEARCH_FACTOR};
use super::search::pattern_min;
use crate::linalg::{add, scale, Point};
use crate::sampling::{ball_grid, direction_tuples, rng_for, unit_directions};

const RADIUS_FRACTIONS: [f64; 3] = [1.0, 0.1, 0.01];
const RANDOM_TUPLES: usize = 16;
const X_GRID: usize = 5;

enum Sample {
    Ratio(f64),
    Excluded,
    Empty,
    Pruned,
}

fn ratio(ctx: &Ctx, rho: f64, x: &[f64], shifts: &[Point], best: f64) -> Sample {
    let sc = ctx.scene;
    let tol = ctx.tol(rho);
    let num = sc.max_dist_shifted(x, shifts);
    if num <= tol {
        return Sample::Excluded;
    }
    let all_equal = shifts.windows(2).all(|w| w[0] == w[1]);
    let d = match (&sc.intersection, all_equal, ctx.cap_dist(x, shifts)) {
        (_, _, Some(c)) => c,
        (Some(int), true, None) => Some(int.dist_in(&add(x, &shifts[0]), &sc.norm)),
        _ => {
            let f = |y: &[f64]| sc.max_dist_shifted(y, shifts);
            if best.is_finite() && best > 0.0 && ctx.search.within(&f, x, num / best, &sc.norm, tol) {
                return Sample::Pruned;
            }
            ctx.search.distance(&f, x, SEARCH_FACTOR * rho, &sc.norm, tol, None)
        }
    };
    match d {
        None => Sample::Empty,
        Some(d) if d <= tol => Sample::Excluded,
        Some(d) => Sample::Ratio(num / d),
    }
}

/// Extra samples handed over by the other estimators for one radius.
#[derive(Default, Clone)]
pub(crate) struct Seeds {
    /// Best zero-perturbation ratio, which is the subregularity ratio.
    pub zeta_ratio: Option<f64>,
    /// Perturbation tuples evaluated at x = xbar.
    pub tuples: Vec<Vec<Point>>,
}

pub(crate) struct HatRho {
    pub row: RhoRow,
    pub empties: usize,
}

pub(crate) fn theta_hat_at(ctx: &Ctx, k: usize, rho: f64, seeds: &Seeds) -> HatRho {
    let sc = ctx.scene;
    let mut rng = rng_for(ctx.p.seed, &format!("theta-hat-{k}"));
    let grid = ball_grid(&sc.xbar, rho, &sc.norm, X_GRID, &mut rng);
    let mut xs: Vec<Point> = vec![sc.xbar.clone()];
    for g in &grid {
        xs.push(g.clone());
        for s in &sc.sets {
            let w = s.proj(g);
            if sc.norm.dist(&w, &sc.xbar) <= rho {
                xs.push(w);
            }
        }
    }
    let dirs = unit_directions(&sc.norm, ctx.p.perturbation_samples, &mut rng);
    let dir_tuples = direction_tuples(sc.m(), sc.dim(), &dirs, RANDOM_TUPLES, &mut rng);
    let mut tuples: Vec<Vec<Point>> = Vec::new();
    for frac in RADIUS_FRACTIONS {
        let r = frac * rho;
        for t in &dir_tuples {
            tuples.push(t.iter().map(|d| scale(d, r)).collect());
        }
    }

    let mut best = seeds.zeta_ratio.unwrap_or(f64::INFINITY);
    let mut arg: Option<(Point, Vec<Point>)> = None;
    let (mut count, mut excluded, mut empties) = (0, 0, 0);
    let mut visit = |x: &Point, t: &Vec<Point>, best: &mut f64, arg: &mut Option<(Point, Vec<Point>)>| {
        count += 1;
        match ratio(ctx, rho, x, t, *best) {
            Sample::Ratio(r) if r < *best => {
                *best = r;
                *arg = Some((x.clone(), t.clone()));
            }
            Sample::Empty => {
                empties += 1;
                if *best > 0.0 {
                    *best = 0.0;
                    *arg = None;
                }
            }
            Sample::Excluded => excluded += 1,
            _ => {}
        }
    };
    let admissible = |t: &Vec<Point>| t.iter().all(|s| sc.norm.norm(s) <= rho * (1.0 + 1e-9));
    for t in seeds.tuples.iter().filter(|t| admissible(t)) {
        visit(&sc.xbar, t, &mut best, &mut arg);
    }
    for x in &xs {
        for t in &tuples {
            if best == 0.0 {
                break;
            }
            visit(x, t, &mut best, &mut arg);
        }
    }
    if let Some((x0, t)) = arg {
        let h = rho / (X_GRID - 1) as f64;
        let mut eval = |y: &[f64]| {
            if sc.norm.dist(y, &sc.xbar) > rho {
                return None;
            }
            match ratio(ctx, rho, y, &t, f64::INFINITY) {
                Sample::Ratio(r) => Some(r),
                Sample::Empty => Some(0.0),
                _ => None,
            }
        };
        let (_, v) = pattern_min(&x0, best, h, ctx.p.ball_samples.refinement_levels, &mut eval);
        best = best.min(v);
    }
    HatRho { row: RhoRow { rho, ratio: best, samples: count, excluded }, empties }
}

pub(crate) fn theta_hat_estimate(ctx: &Ctx, seeds: &[Seeds]) -> ModulusEstimate {
    let sched = ctx.p.schedule.values();
    let per: Vec<HatRho> = sched
        .par_iter()
        .enumerate()
        .map(|(k, &rho)| theta_hat_at(ctx, k, rho, &seeds[k]))
        .collect();
    let empties = per.iter().map(|h| h.empties).sum();
    let rows = per.into_iter().map(|h| h.row).collect();
    let mut est = ModulusEstimate::from_rows(ModulusKind::ThetaHat, rows, ctx.p, Bias::UpperBiased, true);
    est.diagnostics.empty_translated = empties;
    est
}

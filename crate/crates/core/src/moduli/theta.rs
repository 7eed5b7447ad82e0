//! Semiregularity: theta_rho by bisection on the perturbation size and the
//! metric form as a cross-check.

use rayon::prelude::*;

use super::params::{Bias, Ctx, EstimatorParams, ModulusEstimate, ModulusKind, RhoRow, SEARCH_FACTOR, THETA_CAP};
use crate::error::Result;
use crate::geometry::Scene;
use crate::linalg::{add, scale, Point};
use crate::sampling::{direction_tuples, rng_for, unit_directions, unit_in};

const TUPLE_CAP: usize = 512;

/// theta_rho at one radius together with the tuple that attained it.
#[derive(Debug, Clone)]
pub struct ThetaRho {
    pub rho: f64,
    pub value: f64,
    /// Unit directions of the worst tuple found.
    pub worst: Option<Vec<Point>>,
    pub tuples: usize,
    pub capped: bool,
}

pub(crate) fn tuples_for(ctx: &Ctx) -> Vec<Vec<Point>> {
    let sc = ctx.scene;
    let mut rng = rng_for(ctx.p.seed, "theta-directions");
    let dirs = unit_directions(&sc.norm, ctx.p.perturbation_samples, &mut rng);
    direction_tuples(sc.m(), sc.dim(), &dirs, TUPLE_CAP, &mut rng)
}

struct Bisector<'c, 'a> {
    ctx: &'c Ctx<'a>,
    rho: f64,
    tol: f64,
}

impl Bisector<'_, '_> {
    fn feasible(&self, dirs: &[Point], r: f64) -> bool {
        let sc = self.ctx.scene;
        let shifts: Vec<Point> = dirs.iter().map(|d| scale(d, r)).collect();
        if let Some(c) = self.ctx.cap_dist(&sc.xbar, &shifts) {
            return matches!(c, Some(d) if d <= self.rho + self.tol);
        }
        let f = |y: &[f64]| sc.max_dist_shifted(y, &shifts);
        self.ctx.search.within(&f, &sc.xbar, self.rho, &sc.norm, self.tol)
    }

    /// Largest r in [0, hi) found feasible; hi is known infeasible.
    fn bisect(&self, dirs: &[Point], hi: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, hi);
        while hi - lo > 1e-4 * self.rho {
            let mid = 0.5 * (lo + hi);
            if self.feasible(dirs, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

pub(crate) fn theta_rho_detail(ctx: &Ctx, rho: f64, tuples: &[Vec<Point>]) -> ThetaRho {
    let b = Bisector { ctx, rho, tol: ctx.tol(rho) };
    let mut best = THETA_CAP * rho;
    let mut worst: Option<Vec<Point>> = None;
    let mut count = 0;
    for t in tuples {
        count += 1;
        if b.feasible(t, best) {
            continue;
        }
        best = b.bisect(t, best);
        worst = Some(t.clone());
    }
    let capped = worst.is_none();
    // pattern search on the directions of the worst tuple
    if let Some(w) = worst.clone() {
        let norm = &ctx.scene.norm;
        let mut z = w;
        let mut h = 0.25;
        for _level in 0..7 {
            let mut moved = 0;
            'scan: loop {
                for i in 0..z.len() {
                    for k in 0..z[i].len() {
                        for s in [1.0, -1.0] {
                            let mut zz = z.clone();
                            zz[i][k] += s * h;
                            let Some(u) = unit_in(norm, &zz[i]) else { continue };
                            zz[i] = u;
                            count += 1;
                            if !b.feasible(&zz, best) {
                                best = b.bisect(&zz, best);
                                z = zz;
                                worst = Some(z.clone());
                                moved += 1;
                                if moved < 4 {
                                    continue 'scan;
                                }
                                break 'scan;
                            }
                        }
                    }
                }
                break;
            }
            if moved == 0 {
                h *= 0.5;
            }
        }
    }
    ThetaRho { rho, value: best, worst, tuples: count, capped }
}

/// theta_rho for one radius rho.
pub fn theta_rho(scene: &Scene, rho: f64, p: &EstimatorParams) -> Result<f64> {
    let scene = &scene.centered()?;
    if !(rho > 0.0) {
        return Err(crate::Error::Precondition("rho must be positive".into()));
    }
    let ctx = Ctx::new(scene, p)?;
    let tuples = tuples_for(&ctx);
    Ok(theta_rho_detail(&ctx, rho, &tuples).value)
}

/// Metric-form ratio max|x_i| / d(xbar, cap(Omega_i - x_i)) over tuples of
/// radius rho; empty translated intersections give ratio 0.
pub(crate) fn metric_form_at(ctx: &Ctx, rho: f64, tuples: &[Vec<Point>]) -> (f64, Option<Vec<Point>>, usize) {
    let sc = ctx.scene;
    let tol = ctx.tol(rho);
    let mut best = f64::INFINITY;
    let mut worst = None;
    let mut empties = 0;
    for t in tuples {
        if best == 0.0 {
            break;
        }
        let shifts: Vec<Point> = t.iter().map(|d| scale(d, rho)).collect();
        let all_equal = shifts.windows(2).all(|w| w[0] == w[1]);
        let d = match (&sc.intersection, all_equal, ctx.cap_dist(&sc.xbar, &shifts)) {
            (_, _, Some(c)) => c,
            (Some(int), true, None) => Some(int.dist_in(&add(&sc.xbar, &shifts[0]), &sc.norm)),
            _ => {
                let f = |y: &[f64]| sc.max_dist_shifted(y, &shifts);
                if best.is_finite() && ctx.search.within(&f, &sc.xbar, rho / best, &sc.norm, tol) {
                    continue;
                }
                ctx.search.distance(&f, &sc.xbar, SEARCH_FACTOR * rho, &sc.norm, tol, None)
            }
        };
        let ratio = match d {
            None => {
                empties += 1;
                0.0
            }
            Some(d) if d <= tol => continue,
            Some(d) => rho / d,
        };
        if ratio < best {
            best = ratio;
            worst = Some(shifts);
        }
    }
    (best, worst, empties)
}

/// Result of the semiregularity estimator with the tuples that attained
/// the per-rho minima.
#[derive(Debug, Clone)]
pub struct ThetaOutcome {
    pub estimate: ModulusEstimate,
    /// Per rho: perturbation tuples (already scaled) worth re-using.
    pub witnesses: Vec<(f64, Vec<Vec<Point>>)>,
}

pub(crate) fn theta_outcome(ctx: &Ctx) -> ThetaOutcome {
    let tuples = tuples_for(ctx);
    let sched = ctx.p.schedule.values();
    let per: Vec<(ThetaRho, (f64, Option<Vec<Point>>, usize))> = sched
        .par_iter()
        .map(|&rho| {
            let tr = theta_rho_detail(ctx, rho, &tuples);
            let mut mt = tuples.clone();
            if let Some(w) = &tr.worst {
                mt.insert(0, w.clone());
            }
            let mf = metric_form_at(ctx, rho, &mt);
            (tr, mf)
        })
        .collect();
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    let mut metric = f64::INFINITY;
    let mut empties = 0;
    let mut all_capped = true;
    for (tr, (mval, mworst, me)) in &per {
        rows.push(RhoRow { rho: tr.rho, ratio: tr.value / tr.rho, samples: tr.tuples, excluded: 0 });
        metric = metric.min(*mval);
        empties += me;
        all_capped &= tr.capped;
        let mut w = Vec::new();
        if let Some(t) = &tr.worst {
            w.push(t.iter().map(|d| scale(d, tr.value)).collect());
        }
        if let Some(t) = mworst {
            w.push(t.clone());
        }
        witnesses.push((tr.rho, w));
    }
    let mut est = ModulusEstimate::from_rows(ModulusKind::Theta, rows, ctx.p, Bias::UpperBiased, false);
    est.diagnostics.capped = all_capped;
    est.diagnostics.empty_translated = empties;
    est.diagnostics.metric_form = Some(metric);
    let (a, b) = (est.value, metric);
    let scale_ab = a.max(b);
    est.diagnostics.metric_disagreement = scale_ab > 1e-12 && (a - b).abs() > 0.2 * scale_ab;
    ThetaOutcome { estimate: est, witnesses }
}

/// Semiregularity constant: min over the schedule of theta_rho / rho.
pub fn theta(scene: &Scene, p: &EstimatorParams) -> Result<ModulusEstimate> {
    let scene = &scene.centered()?;
    let ctx = Ctx::new(scene, p)?;
    Ok(theta_outcome(&ctx).estimate)
}

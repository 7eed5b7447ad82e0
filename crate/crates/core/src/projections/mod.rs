//! Cyclic projections and empirical convergence rates.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::linalg::{check_dim, Point};
use crate::moduli::{zeta, Ctx, EstimatorParams};
use crate::report::{csv_string, fmt_f64, real};

/// Residuals below this are treated as exact convergence.
pub const RESIDUAL_FLOOR: f64 = 1e-13;
/// Fits with R^2 below this, or q above `SUBLINEAR_Q`, are flagged sublinear.
pub const SUBLINEAR_R2: f64 = 0.9;
pub const SUBLINEAR_Q: f64 = 0.99;

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    /// Fitted contraction factor of the residual per sweep through all sets.
    pub q: f64,
    pub r2: f64,
    /// Number of sweep-end residuals used by the fit.
    pub tail_window: usize,
    pub sublinear: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub points: Vec<Point>,
    /// d(x_k, intersection) for every iterate.
    #[serde(serialize_with = "reals")]
    pub residuals: Vec<f64>,
    pub rate_fit: RateFit,
}

fn reals<S: serde::Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&crate::report::Real(*x))?;
    }
    seq.end()
}

impl Trajectory {
    /// iter, x_1..x_n, residual.
    pub fn to_csv(&self) -> Result<String> {
        let dim = self.points.first().map_or(0, |p| p.len());
        let mut header = vec!["iter".to_string()];
        header.extend((1..=dim).map(|k| format!("x{k}")));
        header.push("residual".into());
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .zip(&self.residuals)
            .enumerate()
            .map(|(k, (p, r))| {
                let mut row = vec![k.to_string()];
                row.extend(p.iter().map(|v| fmt_f64(*v)));
                row.push(fmt_f64(*r));
                row
            })
            .collect();
        let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        csv_string(&h, &rows)
    }
}

/// Least squares fit of log r_k = a + k log q over the second half of the
/// sweep-end residuals, ignoring residuals under `RESIDUAL_FLOOR`.
pub fn fit_rate(sweep_residuals: &[f64]) -> RateFit {
    let start = sweep_residuals.len() / 2;
    let pts: Vec<(f64, f64)> = sweep_residuals[start..]
        .iter()
        .enumerate()
        .filter(|(_, r)| **r >= RESIDUAL_FLOOR)
        .map(|(k, r)| (k as f64, r.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return RateFit { q: 0.0, r2: 1.0, tail_window: n, sublinear: false };
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy <= 1e-300 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let q = slope.exp().min(1.0);
    RateFit { q, r2, tail_window: n, sublinear: r2 < SUBLINEAR_R2 || q > SUBLINEAR_Q }
}

/// x_{k+1} = P_{k mod m}(x_k) for `iters` steps. Ties between nearest
/// points of a union go to the first child.
pub fn cyclic_project(scene: &Scene, start: &[f64], iters: usize) -> Result<Trajectory> {
    check_dim(scene.dim(), start)?;
    if iters == 0 {
        return Err(Error::Precondition("iters must be at least 1".into()));
    }
    if start.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("start has non-finite entries".into()));
    }
    let p = EstimatorParams::default();
    let ctx = Ctx::new(scene, &p)?;
    let m = scene.m();
    let mut points = vec![start.to_vec()];
    for k in 0..iters {
        let x = scene.sets[k % m].project(&points[k])?;
        points.push(x);
    }
    let residuals: Vec<f64> = points.iter().map(|x| residual(&ctx, x)).collect();
    let sweeps: Vec<f64> = residuals.iter().step_by(m).copied().collect();
    let rate_fit = fit_rate(&sweeps);
    Ok(Trajectory { points, residuals, rate_fit })
}

fn residual(ctx: &Ctx, x: &[f64]) -> f64 {
    let sc = ctx.scene;
    if let Some(d) = sc.intersection_dist(x) {
        return d;
    }
    let zero = vec![vec![0.0; sc.dim()]; sc.m()];
    if let Some(Some(d)) = ctx.cap_dist(x, &zero) {
        return d;
    }
    ctx.intersection_dist(x, RESIDUAL_FLOOR)
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub start: Point,
    pub rate_fit: RateFit,
    #[serde(serialize_with = "real")]
    pub final_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    #[serde(serialize_with = "real")]
    pub zeta: f64,
    pub threshold: f64,
    /// 1 - 0.1 zeta^2.
    pub q_bound: f64,
    /// True when zeta exceeds the threshold on a convex scene.
    pub asserted: bool,
    /// Whether every fitted q is below `q_bound`; None when not asserted.
    pub holds: Option<bool>,
    pub runs: Vec<RateRow>,
}

/// Pairs the zeta estimate with the fitted rates from each start. Only the
/// implication zeta > threshold => q < 1 - 0.1 zeta^2 on convex scenes is
/// checked.
pub fn rate_vs_zeta(
    scene: &Scene,
    p: &EstimatorParams,
    starts: &[Point],
    iters: usize,
    threshold: f64,
) -> Result<RateReport> {
    if starts.is_empty() {
        return Err(Error::Precondition("no start points".into()));
    }
    let z = zeta(scene, p)?.value;
    let runs = starts
        .par_iter()
        .map(|s| {
            let t = cyclic_project(scene, s, iters)?;
            Ok(RateRow {
                start: s.clone(),
                final_residual: *t.residuals.last().unwrap(),
                rate_fit: t.rate_fit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let q_bound = 1.0 - 0.1 * z * z;
    let asserted = z > threshold && scene.is_convex();
    let holds = asserted.then(|| runs.iter().all(|r| r.rate_fit.q < q_bound));
    Ok(RateReport { zeta: z, threshold, q_bound, asserted, holds, runs })
}

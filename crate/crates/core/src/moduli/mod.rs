//! Estimators of the primal regularity constants.

mod configs;
mod params;
mod search;
mod slope;
mod theta;
mod theta_hat;
mod zeta;

use serde::Serialize;

pub use configs::{sample_configs, Config};
pub use params::{
    Bias, Diagnostics, EstimatorParams, ModulusEstimate, ModulusKind, RhoRow, Schedule, SEARCH_FACTOR, THETA_CAP,
};
pub use slope::{config_slope, slope_zeta_hat};
pub use theta::{theta, theta_rho, ThetaRho};
pub use zeta::{zeta, zeta_rho_delta, zeta_rho_delta_on};

pub(crate) use params::Ctx;

use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::report::{csv_string, fmt_f64};
use theta_hat::Seeds;

/// theta, zeta, theta_hat and (for Euclidean scenes) the slope constant.
#[derive(Debug, Clone, Serialize)]
pub struct Estimates {
    pub theta: ModulusEstimate,
    pub zeta: ModulusEstimate,
    pub theta_hat: ModulusEstimate,
    pub zeta_hat_slope: Option<ModulusEstimate>,
}

impl Estimates {
    pub fn all(&self) -> Vec<&ModulusEstimate> {
        let mut v = vec![&self.theta, &self.zeta, &self.theta_hat];
        v.extend(self.zeta_hat_slope.as_ref());
        v
    }
}

fn primal(ctx: &Ctx) -> (ModulusEstimate, ModulusEstimate, ModulusEstimate) {
    let th = theta::theta_outcome(ctx);
    let zr = zeta::zeta_rows(ctx);
    let seeds: Vec<Seeds> = zr
        .iter()
        .zip(&th.witnesses)
        .map(|(z, (_, w))| Seeds { zeta_ratio: Some(z.row.ratio), tuples: w.clone() })
        .collect();
    let hat = theta_hat::theta_hat_estimate(ctx, &seeds);
    let rows = zr.into_iter().map(|z| z.row).collect();
    let ze = ModulusEstimate::from_rows(ModulusKind::Zeta, rows, ctx.p, Bias::UpperBiased, true);
    (th.estimate, ze, hat)
}

/// Uniform regularity constant, clamped to [0, 1]. The sample set includes
/// the subregularity samples and the worst semiregularity perturbations.
pub fn theta_hat(scene: &Scene, p: &EstimatorParams) -> Result<ModulusEstimate> {
    let scene = &scene.centered()?;
    let ctx = Ctx::new(scene, p)?;
    Ok(primal(&ctx).2)
}

/// theta, zeta and theta_hat from one shared run.
pub fn primal_moduli(scene: &Scene, p: &EstimatorParams) -> Result<(ModulusEstimate, ModulusEstimate, ModulusEstimate)> {
    let scene = &scene.centered()?;
    let ctx = Ctx::new(scene, p)?;
    Ok(primal(&ctx))
}

/// Runs every estimator on the scene. All estimators work in coordinates
/// centred at xbar.
pub fn estimate_all(scene: &Scene, p: &EstimatorParams) -> Result<Estimates> {
    let scene = &scene.centered()?;
    let ctx = Ctx::new(scene, p)?;
    let (theta, zeta, theta_hat) = primal(&ctx);
    let zeta_hat_slope = if scene.norm.is_euclidean() { Some(slope::slope_zeta_hat(scene, p)?) } else { None };
    Ok(Estimates { theta, zeta, theta_hat, zeta_hat_slope })
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub threshold: f64,
    pub semiregular: bool,
    pub subregular: bool,
    pub uniformly_regular: bool,
    pub theta: ModulusEstimate,
    pub zeta: ModulusEstimate,
    pub theta_hat: ModulusEstimate,
}

/// Each property holds when its constant exceeds `threshold`.
pub fn classify(scene: &Scene, p: &EstimatorParams, threshold: f64) -> Result<Classification> {
    let scene = &scene.centered()?;
    if !(threshold > 0.0) {
        return Err(Error::Precondition("threshold must be positive".into()));
    }
    let ctx = Ctx::new(scene, p)?;
    let (theta, zeta, theta_hat) = primal(&ctx);
    Ok(Classification {
        threshold,
        semiregular: theta.value > threshold,
        subregular: zeta.value > threshold,
        uniformly_regular: theta_hat.value > threshold,
        theta,
        zeta,
        theta_hat,
    })
}

/// Per-rho table with columns kind, rho, ratio, samples, excluded.
pub fn per_rho_csv(estimates: &[&ModulusEstimate]) -> Result<String> {
    let mut rows = Vec::new();
    for e in estimates {
        for r in &e.per_rho {
            rows.push(vec![
                e.kind.name().to_string(),
                fmt_f64(r.rho),
                fmt_f64(r.ratio),
                r.samples.to_string(),
                r.excluded.to_string(),
            ]);
        }
    }
    csv_string(&["kind", "rho", "ratio", "samples", "excluded"], &rows)
}

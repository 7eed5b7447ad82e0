//! Checks relating the moduli of a scene to those of a mapping.

use serde::Serialize;

use super::{graph_scene, product_mapping, reg_modulus, semireg_modulus, subreg_modulus, SvMapping};
use crate::error::Result;
use crate::geometry::Scene;
use crate::moduli::{primal_moduli, EstimatorParams, ModulusEstimate};
use crate::report::real;

/// Tolerance of the equalities, relative to max(1, scene value).
pub const EQUALITY_TOL: f64 = 0.1;
/// Additive tolerance of the sandwich inequalities.
pub const SANDWICH_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    SetsToMapping,
    MappingToSets,
}

#[derive(Debug, Clone, Serialize)]
pub struct Triple {
    pub theta: ModulusEstimate,
    pub zeta: ModulusEstimate,
    pub theta_hat: ModulusEstimate,
}

impl Triple {
    fn values(&self) -> [f64; 3] {
        [self.theta.value, self.zeta.value, self.theta_hat.value]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Inequality {
    pub name: String,
    pub satisfied: bool,
    /// Margin left by the check; negative means violated by that much.
    #[serde(serialize_with = "real")]
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BridgeReport {
    pub direction: Direction,
    /// Scene moduli.
    pub lhs: Triple,
    /// Mapping moduli.
    pub rhs: Triple,
    pub inequalities: Vec<Inequality>,
}

impl BridgeReport {
    pub fn passed(&self) -> bool {
        self.inequalities.iter().all(|i| i.satisfied)
    }
}

fn scene_triple(scene: &Scene, p: &EstimatorParams) -> Result<Triple> {
    let (theta, zeta, theta_hat) = primal_moduli(scene, p)?;
    Ok(Triple { theta, zeta, theta_hat })
}

fn mapping_triple(f: &SvMapping, p: &EstimatorParams) -> Result<Triple> {
    Ok(Triple { theta: semireg_modulus(f, p)?, zeta: subreg_modulus(f, p)?, theta_hat: reg_modulus(f, p)? })
}

const NAMES: [&str; 3] = ["theta", "zeta", "theta_hat"];

fn equality(name: &str, a: f64, b: f64) -> Inequality {
    let slack = if a == b {
        EQUALITY_TOL * a.abs().max(1.0)
    } else {
        EQUALITY_TOL * a.abs().max(1.0) - (a - b).abs()
    };
    Inequality { name: name.into(), satisfied: slack >= 0.0, slack }
}

/// Compares theta, zeta and theta_hat of the scene with the semiregularity,
/// subregularity and regularity moduli of its product mapping. The mapping
/// zeta and theta_hat are compared after the same clamping to [0, 1] that
/// the scene estimators apply.
pub fn verify_bridge_prop8(scene: &Scene, p: &EstimatorParams) -> Result<BridgeReport> {
    let f = product_mapping(scene)?;
    let lhs = scene_triple(scene, p)?;
    let rhs = mapping_triple(&f, p)?;
    let mut mapped = rhs.values();
    for v in &mut mapped[1..] {
        *v = v.min(1.0);
    }
    let inequalities = NAMES
        .iter()
        .zip(lhs.values().into_iter().zip(mapped))
        .map(|(n, (a, b))| equality(&format!("{n}[Omega] = {n}[F]"), a, b))
        .collect();
    Ok(BridgeReport { direction: Direction::SetsToMapping, lhs, rhs, inequalities })
}

fn bounds(name: &str, k: f64, omega: f64, cap_one: bool) -> [Inequality; 2] {
    let lower = if k.is_finite() { k / (k + 2.0) } else { 1.0 };
    let mut upper = k / 2.0;
    if cap_one {
        upper = upper.min(1.0);
    }
    let lo_slack = omega - lower + SANDWICH_TOL;
    let hi_slack = upper - omega + SANDWICH_TOL;
    [
        Inequality {
            name: format!("{name}[F]/({name}[F]+2) <= {name}[Omega]"),
            satisfied: lo_slack >= 0.0,
            slack: lo_slack,
        },
        Inequality {
            name: if cap_one {
                format!("{name}[Omega] <= min({name}[F]/2, 1)")
            } else {
                format!("{name}[Omega] <= {name}[F]/2")
            },
            satisfied: hi_slack >= 0.0,
            slack: hi_slack,
        },
    ]
}

/// Checks the two-sided bounds between the moduli of F and those of the
/// pair {gph F, X x {ybar}} under the maximum norm. Slacks include the
/// additive tolerance `SANDWICH_TOL`.
pub fn verify_bridge_thm5(f: &SvMapping, p: &EstimatorParams) -> Result<BridgeReport> {
    let sc = graph_scene(f)?;
    let lhs = scene_triple(&sc, p)?;
    let rhs = mapping_triple(f, p)?;
    let [t, z, h] = lhs.values();
    let [tf, zf, hf] = rhs.values();
    let mut inequalities = Vec::new();
    inequalities.extend(bounds("theta", tf, t, false));
    inequalities.extend(bounds("zeta", zf, z, true));
    inequalities.extend(bounds("theta_hat", hf, h, true));
    Ok(BridgeReport { direction: Direction::MappingToSets, lhs, rhs, inequalities })
}

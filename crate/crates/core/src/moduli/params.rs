use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, Polyhedron, RegionSearch, Scene};
use crate::linalg::{dist2, dot, Point};
use crate::report::real;
use crate::sampling::geometric_schedule;

/// Geometric sequence of radii standing in for rho -> 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub rho_max: f64,
    pub factor: f64,
    pub rho_min: f64,
}

impl Schedule {
    pub fn values(&self) -> Vec<f64> {
        geometric_schedule(self.rho_max, self.factor, self.rho_min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub schedule: Schedule,
    /// Directions sampled per sphere, on top of the signed axes.
    pub perturbation_samples: usize,
    /// Outer sampling grid; `radius` is a multiple of the radius in use.
    pub ball_samples: GridSpec,
    /// Residual threshold of the inner searches, relative to rho.
    pub bisection_tol: f64,
    pub seed: u64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            schedule: Schedule { rho_max: 0.5, factor: 0.5, rho_min: 1e-3 },
            perturbation_samples: 12,
            ball_samples: GridSpec { radius: 1.0, points_per_axis: 9, refinement_levels: 6 },
            bisection_tol: 1e-7,
            seed: 7,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        let s = &self.schedule;
        if !(s.rho_min > 0.0) || !(s.rho_max >= s.rho_min) || !s.rho_max.is_finite() {
            return Err(Error::Precondition("need 0 < rho_min <= rho_max".into()));
        }
        if !(s.factor > 0.0 && s.factor < 1.0) {
            return Err(Error::Precondition("rho factor must lie in (0, 1)".into()));
        }
        if !(self.bisection_tol > 0.0) || self.bisection_tol >= s.rho_min {
            return Err(Error::Precondition("need 0 < bisection_tol < rho_min".into()));
        }
        if self.ball_samples.points_per_axis < 3 || !(self.ball_samples.radius > 0.0) {
            return Err(Error::Precondition("ball grid needs >= 3 points per axis".into()));
        }
        if self.perturbation_samples == 0 {
            return Err(Error::Precondition("perturbation_samples must be positive".into()));
        }
        Ok(())
    }

    pub fn with_rho_min(mut self, rho_min: f64) -> Self {
        self.schedule.rho_min = rho_min;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusKind {
    Theta,
    Zeta,
    ThetaHat,
    ZetaHatSlope,
}

impl ModulusKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModulusKind::Theta => "theta",
            ModulusKind::Zeta => "zeta",
            ModulusKind::ThetaHat => "theta_hat",
            ModulusKind::ZetaHatSlope => "zeta_hat_slope",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bias {
    UpperBiased,
    LowerBiased,
    PointEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoRow {
    pub rho: f64,
    #[serde(serialize_with = "real")]
    pub ratio: f64,
    pub samples: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    /// No admissible sample near xbar; the value is the vacuous bound 1.
    pub vacuous: bool,
    /// The raw minimum exceeded 1 and was clamped.
    pub clamped: bool,
    /// theta_rho reached the search cap for every sampled tuple.
    pub capped: bool,
    /// Samples whose translated intersection was empty in the search ball.
    pub empty_translated: usize,
    /// Second estimate from the metric form, when computed.
    #[serde(serialize_with = "crate::report::opt_real")]
    pub metric_form: Option<f64>,
    pub metric_disagreement: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusEstimate {
    pub kind: ModulusKind,
    #[serde(serialize_with = "real")]
    pub value: f64,
    pub rho_schedule: Schedule,
    pub grid: GridSpec,
    pub per_rho: Vec<RhoRow>,
    pub direction: Bias,
    pub diagnostics: Diagnostics,
}

impl ModulusEstimate {
    pub(crate) fn from_rows(
        kind: ModulusKind,
        rows: Vec<RhoRow>,
        p: &EstimatorParams,
        direction: Bias,
        clamp_unit: bool,
    ) -> Self {
        let raw = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let mut diagnostics = Diagnostics::default();
        let value = if clamp_unit {
            if raw == f64::INFINITY {
                diagnostics.vacuous = true;
                1.0
            } else if raw > 1.0 {
                diagnostics.clamped = true;
                1.0
            } else {
                raw.max(0.0)
            }
        } else {
            raw
        };
        ModulusEstimate {
            kind,
            value,
            rho_schedule: p.schedule,
            grid: p.ball_samples,
            per_rho: rows,
            direction,
            diagnostics,
        }
    }
}

/// Shared state of one estimator run.
pub(crate) struct Ctx<'a> {
    pub scene: &'a Scene,
    pub p: &'a EstimatorParams,
    pub search: RegionSearch,
    /// Inequality rows of every set when the whole scene is polyhedral.
    rows: Option<Vec<Vec<(Point, f64)>>>,
}

impl<'a> Ctx<'a> {
    pub fn new(scene: &'a Scene, p: &'a EstimatorParams) -> Result<Self> {
        p.validate()?;
        let sup_ok = scene.norm.is_euclidean() || scene.norm.block_sizes().iter().all(|&b| b == 1);
        let rows = if sup_ok && scene.dim() <= Polyhedron::MAX_DIM {
            scene.sets.iter().map(|s| s.polyhedral_rows()).collect()
        } else {
            None
        };
        Ok(Ctx { scene, p, search: RegionSearch::for_dim(scene.dim()), rows })
    }

    /// Exact d(x, cap_i (Omega_i - shifts[i])) for polyhedral scenes in the
    /// Euclidean or maximum norm: None
    /// when unavailable, Some(None) when the intersection is empty.
    pub fn cap_dist(&self, x: &[f64], shifts: &[Point]) -> Option<Option<f64>> {
        let rows = self.rows.as_ref()?;
        let mut all = Vec::new();
        for (set_rows, s) in rows.iter().zip(shifts) {
            for (a, b) in set_rows {
                all.push((a.clone(), b - dot(a, s)));
            }
        }
        if all.is_empty() {
            return Some(Some(0.0));
        }
        match Polyhedron::new(self.scene.dim(), all) {
            Ok(p) if self.scene.norm.is_euclidean() => Some(Some(dist2(x, &p.project(x)?))),
            Ok(p) => Some(Some(p.sup_distance(x))),
            Err(Error::InfeasiblePolyhedron) => Some(None),
            Err(_) => None,
        }
    }

    pub fn tol(&self, rho: f64) -> f64 {
        self.p.bisection_tol * rho
    }

    pub fn grid_n(&self) -> usize {
        self.p.ball_samples.points_per_axis
    }

    /// Distance from x to the intersection of the sets: exact when declared,
    /// otherwise by grid search with xbar as a known member.
    pub fn intersection_dist(&self, x: &[f64], tol: f64) -> f64 {
        if let Some(d) = self.scene.intersection_dist(x) {
            return d;
        }
        let sc = self.scene;
        let f = |y: &[f64]| sc.max_dist(y);
        let upper = sc.norm.dist(x, &sc.xbar);
        self.search
            .distance(&f, x, upper, &sc.norm, tol, Some(upper))
            .unwrap_or(upper)
    }
}

/// Multiplier of rho bounding the perturbation size searched for theta_rho.
pub const THETA_CAP: f64 = 4.0;

/// Search radius, in multiples of rho, for translated intersections.
pub const SEARCH_FACTOR: f64 = 64.0;

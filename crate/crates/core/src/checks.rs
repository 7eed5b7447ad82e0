//! The bundled regression suite: classifications and values of the worked
//! examples, ordering and chain invariants, dual certificates, both bridges
//! and the projection harness.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bundled;
use crate::dual::{subreg_dual_certificate, uniform_dual_constant};
use crate::error::Result;
use crate::mappings::{verify_bridge_prop8, verify_bridge_thm5};
use crate::moduli::{estimate_all, Estimates, EstimatorParams};
use crate::projections::cyclic_project;
use crate::report::Real;

/// Classification threshold used throughout the suite.
pub const THRESHOLD: f64 = 0.05;
pub const CERT_ALPHA: f64 = 0.5;
pub const CERT_DELTA: f64 = 0.3;
pub const DUAL_DELTA: f64 = 0.1;

pub const CHECKS: &[(&str, &str)] = &[
    ("ex3_1_classification", "two copies of a line: not semiregular, subregular, not uniformly regular"),
    ("ex3_2_classification", "tangent parabola: semiregular, not subregular, not uniformly regular"),
    ("ex3_3_classification", "half-plane with a ray: semiregular, subregular, not uniformly regular"),
    ("ex3_4_classification", "plane and wedge: regular in all three senses"),
    ("ex3_4_theta", "theta = 2 for the plane and wedge"),
    ("ex3_2_theta", "theta = 1 for the tangent parabola"),
    ("ex3_2_zeta_small_rho", "zeta <= 0.05 for the tangent parabola at rho_min = 1e-4"),
    ("ordering", "theta_hat <= min(theta, zeta) and zeta, theta_hat in [0, 1] on every bundled scene"),
    ("dual_equivalence", "uniform dual constant > 0.05 exactly when theta_hat > 0.05"),
    ("dual_certificate", "subregularity certificate passes for two copies of a line, alpha 0.5, delta 0.3"),
    ("chain", "dual constant <= slope constant <= zeta on every bundled scene"),
    ("product_mapping", "scene moduli equal the moduli of the product mapping"),
    ("graph_scene", "sandwich bounds for F(x) = x and F(x) = 2x, degenerate parabola graph"),
    ("projections", "two lines at pi/6 converge at q ~ 0.75, tangent parabola is sublinear"),
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub values: BTreeMap<String, Real>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub params: EstimatorParams,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

struct Run<'a> {
    p: &'a EstimatorParams,
    cache: BTreeMap<&'static str, Estimates>,
}

impl<'a> Run<'a> {
    fn est(&mut self, name: &'static str) -> Result<&Estimates> {
        if !self.cache.contains_key(name) {
            let e = estimate_all(&bundled::scene(name)?, self.p)?;
            self.cache.insert(name, e);
        }
        Ok(&self.cache[name])
    }
}

struct Out {
    passed: bool,
    notes: Vec<String>,
    values: BTreeMap<String, Real>,
}

impl Out {
    fn new() -> Self {
        Out { passed: true, notes: Vec::new(), values: BTreeMap::new() }
    }
    fn value(&mut self, key: impl Into<String>, v: f64) {
        self.values.insert(key.into(), Real(v));
    }
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.notes.push(what.into());
        }
    }
}

fn classification(run: &mut Run, out: &mut Out, name: &'static str, expect: [bool; 3]) -> Result<()> {
    let e = run.est(name)?;
    let vals = [e.theta.value, e.zeta.value, e.theta_hat.value];
    for ((label, v), want) in ["theta", "zeta", "theta_hat"].into_iter().zip(vals).zip(expect) {
        out.value(label, v);
        out.require((v > THRESHOLD) == want, format!("{label} above threshold: {}", v > THRESHOLD));
    }
    Ok(())
}

fn run_one(run: &mut Run, name: &str) -> Result<Out> {
    let p = run.p;
    let mut out = Out::new();
    match name {
        "ex3_1_classification" => {
            classification(run, &mut out, "ex3_1", [false, true, false])?;
            let e = run.est("ex3_1")?;
            let (t, z) = (e.theta.value, e.zeta.value);
            out.require(t <= 0.02, "theta above 0.02");
            out.require(z >= 0.95, "zeta below 0.95");
        }
        "ex3_2_classification" => classification(run, &mut out, "ex3_2", [true, false, false])?,
        "ex3_3_classification" => {
            classification(run, &mut out, "ex3_3", [true, true, false])?;
            let h = run.est("ex3_3")?.theta_hat.value;
            out.require(h <= 0.05, "theta_hat above 0.05");
        }
        "ex3_4_classification" => classification(run, &mut out, "ex3_4", [true, true, true])?,
        "ex3_4_theta" => {
            let t = run.est("ex3_4")?.theta.value;
            out.value("theta", t);
            out.require((1.85..=2.05).contains(&t), "theta outside [1.85, 2.05]");
        }
        "ex3_2_theta" => {
            let t = run.est("ex3_2")?.theta.value;
            out.value("theta", t);
            out.require((0.9..=1.1).contains(&t), "theta outside [0.9, 1.1]");
        }
        "ex3_2_zeta_small_rho" => {
            let q = p.clone().with_rho_min(1e-4);
            let z = crate::moduli::zeta(&bundled::scene("ex3_2")?, &q)?.value;
            out.value("zeta", z);
            out.require(z <= 0.05, "zeta above 0.05");
        }
        "ordering" => {
            for n in bundled::scene_names() {
                let e = run.est(n)?;
                let (t, z, h) = (e.theta.value, e.zeta.value, e.theta_hat.value);
                out.value(format!("{n}.theta_hat"), h);
                out.require(h <= t.min(z) + 0.05, format!("{n}: theta_hat above min(theta, zeta)"));
                out.require((0.0..=1.001).contains(&z), format!("{n}: zeta out of range"));
                out.require((0.0..=1.001).contains(&h), format!("{n}: theta_hat out of range"));
            }
        }
        "dual_equivalence" => {
            for n in bundled::scene_names() {
                let h = run.est(n)?.theta_hat.value;
                let d = uniform_dual_constant(&bundled::scene(n)?, DUAL_DELTA, p)?.value;
                out.value(format!("{n}.uniform_dual"), d);
                out.require((d > THRESHOLD) == (h > THRESHOLD), format!("{n}: dual {d} vs theta_hat {h}"));
            }
        }
        "dual_certificate" => {
            let r = subreg_dual_certificate(&bundled::scene("ex3_1")?, CERT_ALPHA, CERT_DELTA, p)?;
            out.value("value", r.value);
            out.require(r.pass == Some(true), "certificate did not pass");
        }
        "chain" => {
            for n in bundled::scene_names() {
                let e = run.est(n)?;
                let z = e.zeta.value;
                let s = e.zeta_hat_slope.as_ref().map_or(z, |m| m.value);
                let d = subreg_dual_certificate(&bundled::scene(n)?, CERT_ALPHA, CERT_DELTA, p)?.value;
                out.value(format!("{n}.dual"), d);
                out.value(format!("{n}.slope"), s);
                out.require(d <= s + 0.05, format!("{n}: dual above slope"));
                out.require(s + 0.05 <= z + 0.1, format!("{n}: slope above zeta"));
            }
        }
        "product_mapping" => {
            for n in ["ex3_1", "ex3_2", "ex3_3", "ex3_4"] {
                let r = verify_bridge_prop8(&bundled::scene(n)?, p)?;
                for i in &r.inequalities {
                    out.value(format!("{n}.{}.slack", i.name), i.slack);
                    out.require(i.satisfied, format!("{n}: {}", i.name));
                }
            }
        }
        "graph_scene" => {
            for n in ["linear_x", "linear_2x"] {
                let r = verify_bridge_thm5(&bundled::mapping(n)?, p)?;
                for i in &r.inequalities {
                    out.value(format!("{n}.{}.slack", i.name), i.slack);
                    out.require(i.satisfied, format!("{n}: {}", i.name));
                }
            }
            let r = verify_bridge_thm5(&bundled::mapping("parabola")?, p)?;
            let (zf, zo) = (r.rhs.zeta.value, r.lhs.zeta.value);
            out.value("parabola.zeta_F", zf);
            out.value("parabola.zeta_Omega", zo);
            out.require(zf <= 0.05 && zo <= 0.05, "parabola zeta not degenerate on both sides");
        }
        "projections" => {
            let t = cyclic_project(&bundled::scene("lines_pi6")?, &[1.0, 0.3], 200)?;
            out.value("lines_pi6.q", t.rate_fit.q);
            out.require((0.70..=0.80).contains(&t.rate_fit.q), "q outside [0.70, 0.80]");
            let t = cyclic_project(&bundled::scene("ex3_2")?, &[0.1, 0.005], 200)?;
            out.value("ex3_2.q", t.rate_fit.q);
            out.value("ex3_2.r2", t.rate_fit.r2);
            out.require(t.rate_fit.sublinear, "tangent parabola not flagged sublinear");
        }
        other => return Err(crate::error::Error::Schema(format!("unknown check {other:?}"))),
    }
    Ok(out)
}

/// Runs the named checks, or all of them when `only` is empty.
pub fn run_checks(p: &EstimatorParams, only: &[String]) -> Result<SuiteReport> {
    let mut run = Run { p, cache: BTreeMap::new() };
    let mut checks = Vec::new();
    for (name, _) in CHECKS {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let out = run_one(&mut run, name)?;
        let detail = if out.passed { "ok".to_string() } else { out.notes.join("; ") };
        checks.push(CheckResult { name: name.to_string(), passed: out.passed, detail, values: out.values });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { seed: p.seed, params: p.clone(), passed, checks })
}

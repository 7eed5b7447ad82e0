//! Dual constants: the uniform regularity constant over normal cones near
//! xbar and the subregularity certificate over approximate normals.

use rayon::prelude::*;
use serde::Serialize;

use super::cone::Cone;
use super::normal::normal_cone;
use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::linalg::{axpy, dist2, dot, norm2, normalized, scale, sub, Point};
use crate::moduli::{sample_configs, EstimatorParams};
use crate::report::real;
use crate::sampling::{ball_grid, rng_for, signed_axes};

const SECTION_SAMPLES: usize = 32;
const MAX_TUPLES: usize = 4096;

/// Fraction of max_i |x - omega_i| used as epsilon in the certificate.
pub const EPS_FRAC: f64 = 0.01;

/// min |sum t_i u_i| over sum t_i = 1, 0 <= t_i <= caps[i].
pub(crate) fn min_capped(us: &[Point], caps: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = us.len();
    if m == 0 || caps.iter().map(|c| c.min(1.0)).sum::<f64>() < 1.0 - 1e-12 {
        return None;
    }
    let combo = |t: &[f64]| -> Point {
        let dim = us[0].len();
        t.iter().zip(us).fold(vec![0.0; dim], |acc, (ti, u)| axpy(&acc, *ti, u))
    };
    if m == 1 {
        return Some((norm2(&us[0]), vec![1.0]));
    }
    if m == 2 {
        let d = sub(&us[0], &us[1]);
        let dd = dot(&d, &d);
        let lo = (1.0 - caps[1]).max(0.0);
        let hi = caps[0].min(1.0);
        let t = if dd > 0.0 { (-dot(&us[1], &d) / dd).clamp(lo, hi) } else { lo };
        let w = vec![t, 1.0 - t];
        return Some((norm2(&combo(&w)), w));
    }
    // projected gradient on the capped simplex
    let project = |y: &[f64]| -> Vec<f64> {
        let (mut lo, mut hi) = (-2.0, 2.0 + y.iter().copied().fold(0.0, f64::max));
        lo += y.iter().copied().fold(0.0, f64::min) - 2.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let s: f64 = y.iter().zip(caps).map(|(v, c)| (v - mid).clamp(0.0, c.min(1.0))).sum();
            if s > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mid = 0.5 * (lo + hi);
        y.iter().zip(caps).map(|(v, c)| (v - mid).clamp(0.0, c.min(1.0))).collect()
    };
    let mut t = project(&vec![1.0 / m as f64; m]);
    let step = 1.0 / (2.0 * m as f64);
    for _ in 0..400 {
        let s = combo(&t);
        let g: Vec<f64> = us.iter().map(|u| 2.0 * dot(u, &s)).collect();
        let y: Vec<f64> = t.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        t = project(&y);
    }
    Some((norm2(&combo(&t)), t))
}

/// Evaluates a set of per-index candidate lists; returns the best value and
/// the chosen candidate indices with weights.
fn best_over_candidates(
    cands: &[Vec<(Point, f64)>],
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Option<(f64, Vec<Point>)> {
    use rand::Rng;
    let total: f64 = cands.iter().map(|c| c.len() as f64).product();
    if total == 0.0 {
        return None;
    }
    let mut best: Option<(f64, Vec<Point>)> = None;
    let mut consider = |pick: &[usize]| {
        let us: Vec<Point> = pick.iter().enumerate().map(|(i, &j)| cands[i][j].0.clone()).collect();
        let caps: Vec<f64> = pick.iter().enumerate().map(|(i, &j)| cands[i][j].1).collect();
        if let Some((v, t)) = min_capped(&us, &caps) {
            if best.as_ref().map_or(true, |b| v < b.0) {
                let xs = us.iter().zip(&t).map(|(u, ti)| scale(u, *ti)).collect();
                best = Some((v, xs));
            }
        }
    };
    if total <= MAX_TUPLES as f64 {
        let mut idx = vec![0usize; cands.len()];
        'outer: loop {
            consider(&idx);
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break 'outer;
                }
                idx[k] += 1;
                if idx[k] < cands[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    } else {
        for _ in 0..MAX_TUPLES {
            let pick: Vec<usize> = cands.iter().map(|c| rng.gen_range(0..c.len())).collect();
            consider(&pick);
        }
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct DualWitness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Point>,
    pub omega: Vec<Point>,
    pub xstars: Vec<Point>,
    pub norm_of_sum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualReport {
    pub constant_kind: String,
    #[serde(serialize_with = "real")]
    pub value: f64,
    #[serde(serialize_with = "crate::report::opt_real")]
    pub alpha: Option<f64>,
    pub delta: f64,
    pub pass: Option<bool>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_frac: Option<f64>,
    pub flags: Vec<String>,
    pub note: String,
    pub witnesses: Vec<DualWitness>,
}

fn require_euclidean(scene: &Scene) -> Result<()> {
    if scene.norm.is_euclidean() {
        Ok(())
    } else {
        Err(Error::Unsupported("dual constants need the Euclidean norm".into()))
    }
}

/// Local improvement of a unit-section tuple by perturbing one direction at
/// a time inside its cone.
fn refine_sections(cones: &[&Cone], start: Vec<Point>, value: f64) -> (f64, Vec<Point>) {
    let eval = |us: &[Point]| -> Option<(f64, Vec<Point>)> {
        let active: Vec<usize> = (0..us.len()).filter(|&i| norm2(&us[i]) > 0.0).collect();
        let vs: Vec<Point> = active.iter().map(|&i| us[i].clone()).collect();
        let caps = vec![f64::INFINITY; vs.len()];
        let (v, t) = min_capped(&vs, &caps)?;
        let mut xs: Vec<Point> = us.iter().map(|u| vec![0.0; u.len()]).collect();
        for (k, &i) in active.iter().enumerate() {
            xs[i] = scale(&us[i], t[k]);
        }
        Some((v, xs))
    };
    let mut dirs: Vec<Point> = start.iter().map(|x| normalized(x).unwrap_or_else(|| vec![0.0; x.len()])).collect();
    let mut best = (value, start);
    let Some(dim) = dirs.first().map(|d| d.len()) else { return best };
    let axes = signed_axes(dim);
    let mut h = 0.2;
    for _ in 0..30 {
        let mut improved = false;
        for i in 0..dirs.len() {
            if norm2(&dirs[i]) == 0.0 {
                continue;
            }
            for e in &axes {
                let Some(u) = normalized(&cones[i].project(&axpy(&dirs[i], h, e))) else { continue };
                let mut trial = dirs.clone();
                trial[i] = u;
                if let Some((v, xs)) = eval(&trial) {
                    if v < best.0 - 1e-15 {
                        best = (v, xs);
                        dirs = trial;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best
}

/// inf |sum x_i*| over x_i* in the cones with sum |x_i*| = 1.
pub fn min_normal_sum(cones: &[&Cone], seed: u64) -> Option<(f64, Vec<Point>)> {
    let mut rng = rng_for(seed, "cone-sections");
    let cands: Vec<Vec<(Point, f64)>> = cones
        .iter()
        .map(|c| {
            let mut v: Vec<(Point, f64)> = c.section_samples(SECTION_SAMPLES).into_iter().map(|u| (u, f64::INFINITY)).collect();
            // weight zero on this index
            v.push((vec![0.0; c.dim], 0.0));
            v
        })
        .collect();
    let (v, xs) = best_over_candidates(&cands, &mut rng)?;
    Some(refine_sections(cones, xs, v))
}

/// Minimum of |sum x_i*| over x_i* in N(omega_i) with sum |x_i*| = 1, for
/// omega_i in Omega_i within delta of xbar. Infinite when every sampled
/// normal cone is trivial.
pub fn uniform_dual_constant(scene: &Scene, delta: f64, p: &EstimatorParams) -> Result<DualReport> {
    require_euclidean(scene)?;
    if !(delta > 0.0) {
        return Err(Error::Precondition("delta must be positive".into()));
    }
    p.validate()?;
    let mut rng = rng_for(p.seed, "uniform-dual");
    let n = p.ball_samples.points_per_axis.max(9);
    let mut grid = vec![scene.xbar.clone()];
    for frac in [1.0, 0.1, 0.01] {
        grid.extend(ball_grid(&scene.xbar, frac * delta, &scene.norm, n, &mut rng));
    }
    // distinct cones per set with a representative point
    let mut per_set: Vec<Vec<(Point, Cone)>> = Vec::new();
    for s in &scene.sets {
        let mut list: Vec<(Point, Cone)> = Vec::new();
        for g in &grid {
            let w = s.proj(g);
            if dist2(&w, &scene.xbar) > delta {
                continue;
            }
            let c = normal_cone(s, &w)?;
            if !list.iter().any(|(_, k)| k == &c || same_cone(k, &c)) {
                list.push((w, c));
            }
        }
        per_set.push(list);
    }
    let combos: usize = per_set.iter().map(|l| l.len()).product();
    let mut best: Option<(f64, Vec<Point>, Vec<Point>)> = None;
    let mut idx = vec![0usize; per_set.len()];
    let mut count = 0;
    'outer: loop {
        let cones: Vec<&Cone> = idx.iter().enumerate().map(|(i, &j)| &per_set[i][j].1).collect();
        if cones.iter().any(|c| !c.is_zero()) {
            count += 1;
            if let Some((v, xs)) = min_normal_sum(&cones, p.seed) {
                if best.as_ref().map_or(true, |b| v < b.0) {
                    let omega = idx.iter().enumerate().map(|(i, &j)| per_set[i][j].0.clone()).collect();
                    best = Some((v, omega, xs));
                }
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() || combos == 0 {
                break 'outer;
            }
            idx[k] += 1;
            if idx[k] < per_set[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
    let mut flags = Vec::new();
    let (value, witnesses) = match best {
        Some((v, omega, xs)) => {
            let w = DualWitness { rho: None, x: None, omega, norm_of_sum: v, xstars: xs };
            (v, vec![w])
        }
        None => {
            flags.push("no nonzero normals".to_string());
            (f64::INFINITY, Vec::new())
        }
    };
    Ok(DualReport {
        constant_kind: "uniform_dual".into(),
        value,
        alpha: None,
        delta,
        pass: None,
        samples: count,
        eps_frac: None,
        flags,
        note: "necessary and sufficient for uniform regularity".into(),
        witnesses,
    })
}

fn same_cone(a: &Cone, b: &Cone) -> bool {
    let (ga, gb) = (a.generators(), b.generators());
    ga.iter().all(|g| b.contains(g, 1e-9)) && gb.iter().all(|g| a.contains(g, 1e-9))
}

/// Candidate unit directions for x_i* in the cap around v_i of half-angle
/// acos(1 - eps/|v_i|), each with the largest weight keeping t u within
/// rho of the normal cone.
fn cap_candidates(v: &[f64], eps: f64, cone: &Cone, rho: f64) -> Vec<(Point, f64)> {
    let nv = norm2(v);
    let vh = scale(v, 1.0 / nv);
    let cos_cap = (1.0 - eps / nv).clamp(-1.0, 1.0);
    let angle = cos_cap.acos();
    let mut dirs = vec![vh.clone()];
    let dim = v.len();
    let perps: Vec<Point> = crate::linalg::orthogonal_complement(&[vh.clone()], dim);
    for frac in [0.25, 0.5, 0.75, 1.0] {
        let a = angle * frac;
        for q in &perps {
            for s in [1.0, -1.0] {
                dirs.push(axpy(&scale(&vh, a.cos()), s * a.sin(), q));
            }
        }
    }
    if let Some(u) = normalized(&cone.project(&vh)) {
        dirs.push(u);
    }
    dirs.extend(cone.section_samples(SECTION_SAMPLES));
    let mut out = Vec::new();
    for u in dirs {
        if dot(&u, &vh) < cos_cap - 1e-12 {
            continue;
        }
        let d = cone.dist(&u);
        let cap = if d <= 1e-14 { f64::INFINITY } else { rho / d };
        out.push((u, cap));
    }
    out
}

/// The certificate's inner minimum at one configuration; None when no
/// tuple satisfies the constraints.
pub fn certificate_value(
    scene: &Scene,
    x: &[f64],
    omega: &[Point],
    rho: f64,
    eps: f64,
    seed: u64,
) -> Result<Option<(f64, Vec<Point>)>> {
    let v: Vec<Point> = omega.iter().map(|w| sub(x, w)).collect();
    let norms: Vec<f64> = v.iter().map(|a| norm2(a)).collect();
    let vmax = norms.iter().copied().fold(0.0, f64::max);
    if vmax == 0.0 {
        return Ok(None);
    }
    let mut cands = Vec::new();
    let mut active = Vec::new();
    for i in 0..v.len() {
        if norms[i] < vmax * (1.0 - super::duality::ATTAIN_TOL) {
            continue;
        }
        let cone = normal_cone(&scene.sets[i], &omega[i])?;
        cands.push(cap_candidates(&v[i], eps, &cone, rho));
        active.push(i);
    }
    let mut rng = rng_for(seed, "certificate");
    Ok(best_over_candidates(&cands, &mut rng).map(|(val, xs)| {
        let mut full: Vec<Point> = v.iter().map(|a| vec![0.0; a.len()]).collect();
        for (k, &i) in active.iter().enumerate() {
            full[i] = xs[k].clone();
        }
        (val, full)
    }))
}

/// Sufficient condition for subregularity: every sampled configuration
/// (rho < delta, x near xbar, omega near the projections of x) must have
/// inner minimum above alpha. The reported value estimates the dual
/// constant from above only through sampling; a failure does not show that
/// the collection is not subregular.
pub fn subreg_dual_certificate(scene: &Scene, alpha: f64, delta: f64, p: &EstimatorParams) -> Result<DualReport> {
    require_euclidean(scene)?;
    if !(alpha > 0.0 && delta > 0.0) {
        return Err(Error::Precondition("alpha and delta must be positive".into()));
    }
    p.validate()?;
    let rhos: Vec<f64> = p.schedule.values().into_iter().filter(|&r| r < delta).collect();
    if rhos.is_empty() {
        return Err(Error::Precondition("no rho of the schedule lies below delta".into()));
    }
    let n = p.ball_samples.points_per_axis;
    let dim = scene.dim();
    let per: Vec<Result<(usize, Option<DualWitness>)>> = rhos
        .par_iter()
        .enumerate()
        .map(|(k, &rho)| {
            let configs = sample_configs(scene, rho, n, p.seed, &format!("certificate-{k}"));
            let mut best: Option<DualWitness> = None;
            let mut count = 0;
            for c in &configs {
                let eps = EPS_FRAC * c.spread();
                let mut trials: Vec<(Point, Vec<Point>)> = vec![(c.x.clone(), c.omega.clone())];
                for d in signed_axes(dim) {
                    let x2 = axpy(&c.x, 0.5 * eps, &d);
                    let w2: Vec<Point> = scene.sets.iter().map(|s| s.proj(&x2)).collect();
                    if w2.iter().zip(&c.omega).all(|(a, b)| dist2(a, b) < eps) {
                        trials.push((x2, w2));
                    }
                    for i in 0..scene.m() {
                        let wi = scene.sets[i].proj(&axpy(&c.omega[i], 0.5 * eps, &d));
                        if dist2(&wi, &c.omega[i]) < eps {
                            let mut w2 = c.omega.clone();
                            w2[i] = wi;
                            trials.push((c.x.clone(), w2));
                        }
                    }
                }
                for (x, w) in trials {
                    count += 1;
                    if let Some((v, xs)) = certificate_value(scene, &x, &w, rho, eps, p.seed)? {
                        if best.as_ref().map_or(true, |b| v < b.norm_of_sum) {
                            best = Some(DualWitness { rho: Some(rho), x: Some(x), omega: w, xstars: xs, norm_of_sum: v });
                        }
                    }
                }
            }
            Ok((count, best))
        })
        .collect();
    let mut samples = 0;
    let mut witnesses = Vec::new();
    for r in per {
        let (c, w) = r?;
        samples += c;
        witnesses.extend(w);
    }
    let raw = witnesses.iter().map(|w| w.norm_of_sum).fold(f64::INFINITY, f64::min);
    let mut flags = Vec::new();
    let value = if raw.is_finite() {
        raw.min(1.0)
    } else {
        flags.push("vacuous: no admissible configuration".to_string());
        1.0
    };
    Ok(DualReport {
        constant_kind: "zeta_hat_star_2".into(),
        value,
        alpha: Some(alpha),
        delta,
        pass: Some(value > alpha),
        samples,
        eps_frac: Some(EPS_FRAC),
        flags,
        note: "sufficient condition only: a failing certificate does not prove that the collection is not subregular".into(),
        witnesses,
    })
}

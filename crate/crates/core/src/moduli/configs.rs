//! Sampled pairs (x, omega) with omega_i in Omega_i near xbar, shared by the
//! slope estimator and the dual certificate.

use crate::geometry::Scene;
use crate::linalg::{dist2, dot, norm2, sub, Point};
use crate::sampling::{ball_grid, rng_for};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub x: Point,
    pub omega: Vec<Point>,
}

impl Config {
    /// max_i |x - omega_i|.
    pub fn spread(&self) -> f64 {
        self.omega.iter().map(|w| dist2(&self.x, w)).fold(0.0, f64::max)
    }
}

fn projected(scene: &Scene, x: &[f64]) -> Config {
    Config { x: x.to_vec(), omega: scene.sets.iter().map(|s| s.proj(x)).collect() }
}

/// Moves x onto {d_i = d_j} by Newton steps along grad d_i - grad d_j.
fn balance(scene: &Scene, x0: &[f64], i: usize, j: usize) -> Option<Point> {
    let mut x = x0.to_vec();
    for _ in 0..40 {
        let (pi, pj) = (scene.sets[i].proj(&x), scene.sets[j].proj(&x));
        let (di, dj) = (dist2(&x, &pi), dist2(&x, &pj));
        if di <= 0.0 || dj <= 0.0 {
            return None;
        }
        let g = di - dj;
        if g.abs() <= 1e-13 * (di + dj) {
            return Some(x);
        }
        let ni = sub(&x, &pi);
        let nj = sub(&x, &pj);
        let grad: Point = ni.iter().zip(&nj).map(|(a, b)| a / di - b / dj).collect();
        let gg = dot(&grad, &grad);
        if gg < 1e-20 {
            return None;
        }
        let t = g / gg;
        for (xk, gk) in x.iter_mut().zip(&grad) {
            *xk -= t * gk;
        }
        if !norm2(&x).is_finite() {
            return None;
        }
    }
    None
}

/// Grid points of the open ball B_rho(xbar) with their projections, plus
/// points moved onto the surfaces where two distances tie. Keeps only
/// configurations with 0 < max_i |x - omega_i| < rho.
pub fn sample_configs(scene: &Scene, rho: f64, n: usize, seed: u64, key: &str) -> Vec<Config> {
    let mut rng = rng_for(seed, key);
    let r = rho * (1.0 - 1e-9);
    let grid = ball_grid(&scene.xbar, r, &scene.norm, n, &mut rng);
    let ok = |c: &Config| {
        let s = c.spread();
        s > 0.0 && s < rho && dist2(&c.x, &scene.xbar) < rho
    };
    let mut out = Vec::new();
    for g in &grid {
        let c = projected(scene, g);
        if ok(&c) {
            out.push(c);
        }
        for i in 0..scene.m() {
            for j in i + 1..scene.m() {
                if let Some(b) = balance(scene, g, i, j) {
                    let c = projected(scene, &b);
                    if ok(&c) {
                        out.push(c);
                    }
                }
            }
        }
    }
    out
}

//! Seeded sample generators shared by the estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{norm2, scale, Norm, Point};

/// Generator keyed by the run seed and a call-site label.
pub fn rng_for(seed: u64, key: &str) -> ChaCha8Rng {
    // FNV-1a keeps keys stable across builds and platforms
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(h ^ seed.rotate_left(17))
}

/// Geometric sequence rho_max, rho_max*factor, ... down to rho_min.
pub fn geometric_schedule(rho_max: f64, factor: f64, rho_min: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = rho_max;
    while r >= rho_min * (1.0 - 1e-12) {
        out.push(r);
        r *= factor;
        if out.len() > 200 {
            break;
        }
    }
    out
}

fn axis(dim: usize, k: usize, s: f64) -> Point {
    let mut e = vec![0.0; dim];
    e[k] = s;
    e
}

/// The 2n signed coordinate vectors.
pub fn signed_axes(dim: usize) -> Vec<Point> {
    (0..dim).flat_map(|k| [axis(dim, k, 1.0), axis(dim, k, -1.0)]).collect()
}

/// Jittered cube grid restricted to the ball, plus points on the axes.
pub fn ball_grid(center: &[f64], radius: f64, norm: &Norm, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let dim = center.len();
    let h = 2.0 * radius / (n - 1) as f64;
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    'outer: loop {
        let p: Point = (0..dim)
            .map(|k| center[k] - radius + h * idx[k] as f64 + rng.gen_range(-0.3..0.3) * h)
            .collect();
        if norm.dist(&p, center) <= radius {
            out.push(p);
        }
        let mut k = 0;
        loop {
            if k == dim {
                break 'outer;
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
    for f in [1.0, 0.5, 0.25] {
        for e in signed_axes(dim) {
            out.push(center.iter().zip(&e).map(|(c, v)| c + f * radius * v).collect());
        }
    }
    out
}

fn euclidean_directions(dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut out = signed_axes(dim);
    match dim {
        1 => {}
        2 => {
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            for j in 0..k {
                let a = phase + std::f64::consts::TAU * j as f64 / k as f64;
                out.push(vec![a.cos(), a.sin()]);
            }
        }
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            for j in 0..k {
                let z = 1.0 - 2.0 * (j as f64 + 0.5) / k as f64;
                let r = (1.0 - z * z).sqrt();
                let a = phase + golden * j as f64;
                out.push(vec![r * a.cos(), r * a.sin(), z]);
            }
        }
        _ => {
            for _ in 0..k {
                let v: Point = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = norm2(&v);
                if n > 1e-3 {
                    out.push(scale(&v, 1.0 / n));
                }
            }
        }
    }
    out
}

/// Unit vectors of `norm`: signed axes, roughly uniform directions and,
/// for block norms, corner-type vectors with every block at unit length.
pub fn unit_directions(norm: &Norm, k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let dim = norm.dim();
    if norm.is_euclidean() {
        return euclidean_directions(dim, k, rng);
    }
    let ranges = norm.ranges();
    let per_block: Vec<Vec<Point>> = ranges
        .iter()
        .map(|r| euclidean_directions(r.len(), (k / ranges.len()).max(4), rng))
        .collect();
    let mut out = Vec::new();
    for (b, dirs) in per_block.iter().enumerate() {
        for d in dirs {
            let mut v = vec![0.0; dim];
            v[ranges[b].clone()].copy_from_slice(d);
            out.push(v);
        }
    }
    let total: usize = per_block.iter().map(|d| d.len()).product();
    let cap = 4 * k.max(4);
    if total <= cap {
        let mut idx = vec![0usize; per_block.len()];
        'outer: loop {
            let mut v = vec![0.0; dim];
            for (b, &i) in idx.iter().enumerate() {
                v[ranges[b].clone()].copy_from_slice(&per_block[b][i]);
            }
            out.push(v);
            let mut b = 0;
            loop {
                if b == idx.len() {
                    break 'outer;
                }
                idx[b] += 1;
                if idx[b] < per_block[b].len() {
                    break;
                }
                idx[b] = 0;
                b += 1;
            }
        }
    } else {
        for _ in 0..cap {
            let mut v = vec![0.0; dim];
            for (b, dirs) in per_block.iter().enumerate() {
                let d = &dirs[rng.gen_range(0..dirs.len())];
                v[ranges[b].clone()].copy_from_slice(d);
            }
            out.push(v);
        }
    }
    out
}

/// Rescales v to unit length in `norm` (None for the zero vector).
pub fn unit_in(norm: &Norm, v: &[f64]) -> Option<Point> {
    let n = norm.norm(v);
    (n > 1e-300 && n.is_finite()).then(|| scale(v, 1.0 / n))
}

/// Tuples of m unit directions: the canonical all-equal and alternating
/// tuples on the axes, then the full product of `dirs` when it has at most
/// `cap` elements and a random selection of `cap` tuples otherwise.
pub fn direction_tuples(m: usize, dim: usize, dirs: &[Point], cap: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Point>> {
    let mut out: Vec<Vec<Point>> = Vec::new();
    for e in signed_axes(dim) {
        out.push(vec![e.clone(); m]);
        let neg = scale(&e, -1.0);
        out.push((0..m).map(|i| if i % 2 == 0 { e.clone() } else { neg.clone() }).collect());
    }
    let q = dirs.len();
    let total = (q as f64).powi(m as i32);
    if total <= cap as f64 {
        let mut idx = vec![0usize; m];
        'outer: loop {
            out.push(idx.iter().map(|&i| dirs[i].clone()).collect());
            let mut k = 0;
            loop {
                if k == m {
                    break 'outer;
                }
                idx[k] += 1;
                if idx[k] < q {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    } else {
        for _ in 0..cap {
            out.push((0..m).map(|_| dirs[rng.gen_range(0..q)].clone()).collect());
        }
    }
    out
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, scale, Point};

/// A tuple (x_1*, ..., x_m*) of dual vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualTuple {
    pub xstars: Vec<Point>,
    pub norm_sum: f64,
}

impl DualTuple {
    pub fn new(xstars: Vec<Point>) -> Self {
        let norm_sum = xstars.iter().map(|v| norm2(v)).sum();
        DualTuple { xstars, norm_sum }
    }

    /// |sum_i x_i*|.
    pub fn norm_of_sum(&self) -> f64 {
        let dim = self.xstars.first().map_or(0, |v| v.len());
        let mut s = vec![0.0; dim];
        for v in &self.xstars {
            for (a, b) in s.iter_mut().zip(v) {
                *a += b;
            }
        }
        norm2(&s)
    }
}

/// The duality mapping at a tuple v of the product space with the maximum
/// of Euclidean norms: unit-sum tuples supported on the components of
/// largest norm, each aligned with its component.
#[derive(Debug, Clone)]
pub struct DualityMap {
    v: Vec<Point>,
    vmax: f64,
    pub attaining: Vec<usize>,
}

/// Relative tolerance for ties in max_i |v_i|.
pub const ATTAIN_TOL: f64 = 1e-12;

impl DualityMap {
    /// The canonical element puts equal weight on every attaining index.
    pub fn canonical(&self) -> DualTuple {
        let w = 1.0 / self.attaining.len() as f64;
        let xs = self
            .v
            .iter()
            .enumerate()
            .map(|(i, vi)| {
                if self.attaining.contains(&i) {
                    scale(vi, w / norm2(vi))
                } else {
                    vec![0.0; vi.len()]
                }
            })
            .collect();
        DualTuple::new(xs)
    }

    /// Membership of an arbitrary tuple, to tolerance tol.
    pub fn contains(&self, t: &DualTuple, tol: f64) -> bool {
        if t.xstars.len() != self.v.len() || (t.norm_sum - 1.0).abs() > tol {
            return false;
        }
        t.xstars.iter().zip(&self.v).enumerate().all(|(i, (xs, vi))| {
            let n = norm2(xs);
            if n <= tol {
                return true;
            }
            self.attaining.contains(&i) && (dot(xs, vi) - n * norm2(vi)).abs() <= tol * (1.0 + self.vmax)
        })
    }

    pub fn vmax(&self) -> f64 {
        self.vmax
    }
}

/// Duality mapping at a nonzero tuple.
pub fn duality_map(v: &[Point]) -> Result<DualityMap> {
    if v.is_empty() {
        return Err(Error::Precondition("empty tuple".into()));
    }
    let norms: Vec<f64> = v.iter().map(|x| norm2(x)).collect();
    let vmax = norms.iter().copied().fold(0.0, f64::max);
    if vmax == 0.0 {
        return Err(Error::Precondition("duality mapping of the zero tuple".into()));
    }
    let attaining = (0..v.len()).filter(|&i| norms[i] >= vmax * (1.0 - ATTAIN_TOL)).collect();
    Ok(DualityMap { v: v.to_vec(), vmax, attaining })
}

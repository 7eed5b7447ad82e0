//! Small dense vector helpers and the block maximum norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vec<f64>;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], t: f64) -> Point {
    a.iter().map(|x| x * t).collect()
}

/// a + t*b
#[inline]
pub fn axpy(a: &[f64], t: f64, b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn normalized(a: &[f64]) -> Option<Point> {
    let n = norm2(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Dimension { expected, got: x.len() });
    }
    Ok(())
}

/// Modified Gram-Schmidt. Fails if the vectors are (numerically) dependent.
pub fn orthonormalize(vs: &[Point]) -> Option<Vec<Point>> {
    let mut out: Vec<Point> = Vec::with_capacity(vs.len());
    for v in vs {
        let scale0 = norm2(v);
        if scale0 == 0.0 || !scale0.is_finite() {
            return None;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(&w, q);
                w = axpy(&w, -c, q);
            }
        }
        let n = norm2(&w);
        if n <= 1e-10 * scale0 {
            return None;
        }
        out.push(scale(&w, 1.0 / n));
    }
    Some(out)
}

/// Unit vectors completing `basis` (orthonormal) to a basis of R^dim.
pub fn orthogonal_complement(basis: &[Point], dim: usize) -> Vec<Point> {
    let mut all: Vec<Point> = basis.to_vec();
    let mut out = Vec::new();
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        for q in &all {
            let c = dot(&e, q);
            e = axpy(&e, -c, q);
        }
        for q in &all {
            let c = dot(&e, q);
            e = axpy(&e, -c, q);
        }
        let n = norm2(&e);
        if n > 1e-8 {
            let u = scale(&e, 1.0 / n);
            all.push(u.clone());
            out.push(u);
        }
        if all.len() == dim {
            break;
        }
    }
    out
}

/// Maximum of Euclidean norms over consecutive coordinate blocks.
///
/// A single block is the plain Euclidean norm; blocks of size one give
/// the sup norm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Norm {
    blocks: Vec<usize>,
}

impl Norm {
    pub fn euclidean(dim: usize) -> Self {
        Norm { blocks: vec![dim] }
    }

    pub fn blocks(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|&b| b == 0) {
            return Err(Error::Schema("norm blocks must be positive".into()));
        }
        Ok(Norm { blocks })
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn is_euclidean(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Coordinate ranges of the blocks.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|&b| {
                let r = start..start + b;
                start += b;
                r
            })
            .collect()
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        if self.is_euclidean() {
            return norm2(v);
        }
        self.ranges()
            .into_iter()
            .map(|r| norm2(&v[r]))
            .fold(0.0, f64::max)
    }

    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.is_euclidean() {
            return dist2(a, b);
        }
        self.norm(&sub(a, b))
    }

    /// Dual norm: sum of blockwise Euclidean norms.
    pub fn dual_norm(&self, v: &[f64]) -> f64 {
        if self.is_euclidean() {
            return norm2(v);
        }
        self.ranges().into_iter().map(|r| norm2(&v[r])).sum()
    }

    /// Nearest point of the closed ball of radius `r` about `c`.
    pub fn clip_to_ball(&self, c: &[f64], r: f64, x: &[f64]) -> Point {
        let mut out = x.to_vec();
        for rg in self.ranges() {
            let d = dist2(&x[rg.clone()], &c[rg.clone()]);
            if d > r {
                let t = r / d;
                for k in rg {
                    out[k] = c[k] + t * (x[k] - c[k]);
                }
            }
        }
        out
    }

    /// Norm of the vector with every coordinate equal to `h`.
    pub fn uniform_vector_norm(&self, h: f64) -> f64 {
        let maxb = *self.blocks.iter().max().unwrap_or(&1);
        if self.is_euclidean() {
            h.abs() * (self.blocks[0] as f64).sqrt()
        } else {
            h.abs() * (maxb as f64).sqrt()
        }
    }
}

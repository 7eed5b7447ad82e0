use crate::linalg::{axpy, normalized, Point};

/// Unit stencil directions: every nonzero vector of {-1, 0, 1}^dim up to
/// dimension 3, the signed axes above that.
pub(crate) fn stencil(dim: usize) -> Vec<Point> {
    if dim > 3 {
        return crate::sampling::signed_axes(dim);
    }
    let mut out = Vec::new();
    let total = 3usize.pow(dim as u32);
    for code in 0..total {
        let mut c = code;
        let v: Point = (0..dim)
            .map(|_| {
                let d = (c % 3) as f64 - 1.0;
                c /= 3;
                d
            })
            .collect();
        if let Some(u) = normalized(&v) {
            out.push(u);
        }
    }
    out
}

/// Compass search minimizing `eval`, which returns None where the point is
/// not admissible. The step halves after a sweep without progress.
pub(crate) fn pattern_min(
    x0: &[f64],
    v0: f64,
    step: f64,
    levels: usize,
    eval: &mut dyn FnMut(&[f64]) -> Option<f64>,
) -> (Point, f64) {
    let dirs = stencil(x0.len());
    let mut x = x0.to_vec();
    let mut v = v0;
    let mut h = step;
    for _ in 0..levels {
        let mut moves = 0;
        loop {
            let mut best: Option<(Point, f64)> = None;
            for d in &dirs {
                let y = axpy(&x, h, d);
                if let Some(fy) = eval(&y) {
                    if fy < best.as_ref().map_or(v, |b| b.1) {
                        best = Some((y, fy));
                    }
                }
            }
            match best {
                Some((y, fy)) if moves < 16 => {
                    x = y;
                    v = fy;
                    moves += 1;
                }
                _ => break,
            }
        }
        h *= 0.5;
    }
    (x, v)
}

//! Nearest points on the epigraph {(u, v) : v >= c u^2}.

/// Real roots of u^3 + p u + q = 0.
fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc >= 0.0 {
        let s = disc.sqrt();
        // stable form avoids cancellation in the sum of cube roots
        let a = if q > 0.0 { -(q / 2.0 + s).cbrt() } else { (-q / 2.0 + s).cbrt() };
        if a == 0.0 {
            return vec![0.0];
        }
        vec![a - p / (3.0 * a)]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    }
}

/// Nearest point of the epigraph to (p, q). Ties between the two
/// symmetric minimizers go to the one with nonnegative first coordinate.
pub(crate) fn project(c: f64, x: &[f64]) -> [f64; 2] {
    let (p, q) = (x[0], x[1]);
    if q >= c * p * p {
        return [p, q];
    }
    // stationarity of (u-p)^2 + (c u^2 - q)^2
    let a = 2.0 * c * c;
    let pp = (1.0 - 2.0 * c * q) / a;
    let qq = -p / a;
    let mut best: Option<([f64; 2], f64)> = None;
    for mut u in depressed_cubic_roots(pp, qq) {
        for _ in 0..3 {
            let g = u * u * u + pp * u + qq;
            let dg = 3.0 * u * u + pp;
            if dg.abs() > 1e-300 {
                let step = g / dg;
                if step.is_finite() {
                    u -= step;
                }
            }
        }
        let pt = [u, c * u * u];
        let d2 = (pt[0] - p).powi(2) + (pt[1] - q).powi(2);
        best = match best {
            None => Some((pt, d2)),
            Some((bp, bd)) => {
                let tie = (d2 - bd).abs() <= 1e-14 * bd.max(1e-300);
                if d2 < bd && !tie || tie && pt[0] >= 0.0 && bp[0] < 0.0 {
                    Some((pt, d2))
                } else {
                    Some((bp, bd))
                }
            }
        };
    }
    best.map(|b| b.0).unwrap_or([p, q])
}

/// Distance under max(|du|, |dv|).
pub(crate) fn sup_distance(c: f64, x: &[f64]) -> f64 {
    let (p, q) = (x[0], x[1]);
    let ok = |t: f64| q + t >= c * (p.abs() - t).max(0.0).powi(2);
    if ok(0.0) {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = p.abs().max(c * p * p - q).max(1e-300);
    while !ok(hi) {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

mod common;

use approx::assert_abs_diff_eq;
use rand::Rng;

use setreg::bundled;
use setreg::dual::{duality_map, normal_cone, subreg_dual_certificate, uniform_dual_constant, Cone, DualTuple};
use setreg::geometry::{Scene, SetExpr};
use setreg::linalg::{Norm, Point};
use setreg::moduli::EstimatorParams;
use setreg::Error;

fn p() -> EstimatorParams {
    EstimatorParams::default()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axis() -> SetExpr {
    SetExpr::affine(vec![0.0, 0.0], vec![vec![1.0, 0.0]]).unwrap()
}

/// Points of s within r of x: projections of a small grid around x.
fn nearby_members(s: &SetExpr, x: &[f64], r: f64) -> Vec<Point> {
    let n = 41;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let g = [
                x[0] + r * (2.0 * i as f64 / (n - 1) as f64 - 1.0),
                x[1] + r * (2.0 * j as f64 / (n - 1) as f64 - 1.0),
            ];
            let u = s.proj(&g);
            let d = norm(&[u[0] - x[0], u[1] - x[1]]);
            if d > 1e-9 && d <= r {
                out.push(u);
            }
        }
    }
    out
}

fn frechet_ok(s: &SetExpr, x: &[f64], g: &[f64]) -> bool {
    nearby_members(s, x, 0.01).iter().all(|u| {
        let v = [u[0] - x[0], u[1] - x[1]];
        dot(g, &v) <= 0.01 * norm(&v)
    })
}

#[test]
fn axis_has_vertical_line_as_normal_cone() {
    for t in [-0.7, 0.0, 2.5] {
        let c = normal_cone(&axis(), &[t, 0.0]).unwrap();
        assert!(c.contains(&[0.0, 1.0], 1e-12) && c.contains(&[0.0, -3.0], 1e-12));
        assert!(!c.contains(&[1.0, 0.0], 1e-6));
        assert_abs_diff_eq!(c.dist(&[0.4, 0.2]), 0.4, epsilon = 1e-12);
    }
}

#[test]
fn interior_point_of_halfspace_has_zero_cone() {
    let h = SetExpr::halfspace(vec![0.0, 1.0], 0.0).unwrap();
    assert!(normal_cone(&h, &[0.0, -1.0]).unwrap().is_zero());
    let b = normal_cone(&h, &[3.0, 0.0]).unwrap();
    assert!(b.contains(&[0.0, 2.0], 1e-12) && !b.contains(&[0.0, -1.0], 1e-6));
}

#[test]
fn normal_cone_rejects_outside_points() {
    let h = SetExpr::halfspace(vec![0.0, 1.0], 0.0).unwrap();
    assert!(matches!(normal_cone(&h, &[0.0, 0.1]), Err(Error::Precondition(_))));
}

#[test]
fn union_of_halfplane_and_axis_has_zero_cone_at_origin() {
    let sc = bundled::scene("ex3_3").unwrap();
    let s = &sc.sets[0];
    assert!(normal_cone(s, &[0.0, 0.0]).unwrap().is_zero());
    // no unit vector passes the sampled Frechet inequality
    for k in 0..72 {
        let a = k as f64 * std::f64::consts::PI / 36.0;
        assert!(!frechet_ok(s, &[0.0, 0.0], &[a.cos(), a.sin()]), "direction {a}");
    }
}

#[test]
fn generators_satisfy_sampled_frechet_inequality() {
    let sets = vec![
        (SetExpr::halfspace(vec![1.0, 2.0], 1.0).unwrap(), vec![1.0, 0.0]),
        (SetExpr::ball(vec![0.5, -0.5], 2.0).unwrap(), vec![0.5, 1.5]),
        (SetExpr::boxed(vec![-1.0, -1.0], vec![1.0, 2.0]).unwrap(), vec![1.0, 2.0]),
        (SetExpr::boxed(vec![-1.0, -1.0], vec![1.0, 2.0]).unwrap(), vec![0.3, -1.0]),
        (SetExpr::parabola_epi(1.5).unwrap(), vec![0.4, 0.24]),
        (SetExpr::parabola_epi(1.0).unwrap(), vec![-1.0, 1.0]),
        (axis(), vec![0.2, 0.0]),
        (bundled::scene("ex3_2").unwrap().sets[1].clone(), vec![0.0, 0.0]),
        (bundled::scene("ex3_2").unwrap().sets[1].clone(), vec![0.0, -0.5]),
    ];
    for (s, x) in &sets {
        let c: Cone = normal_cone(s, x).unwrap();
        for g in c.generators() {
            assert!(frechet_ok(s, x, &g), "generator {g:?} at {x:?}");
        }
    }
}

#[test]
fn parabola_normal_points_along_gradient() {
    let c = normal_cone(&SetExpr::parabola_epi(1.0).unwrap(), &[0.5, 0.25]).unwrap();
    let g = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()];
    assert!(c.contains(&g, 1e-12));
    assert!(normal_cone(&SetExpr::parabola_epi(1.0).unwrap(), &[0.0, 1.0]).unwrap().is_zero());
}

#[test]
fn duality_map_of_orthogonal_pair() {
    let j = duality_map(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert_eq!(j.attaining, vec![0, 1]);
    let c = j.canonical();
    assert_eq!(c.xstars, vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
    assert!(j.contains(&DualTuple::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]), 1e-12));
    assert!(!j.contains(&DualTuple::new(vec![vec![0.0, 1.0], vec![0.0, 0.0]]), 1e-9));
}

#[test]
fn duality_map_drops_short_components() {
    let j = duality_map(&[vec![2.0, 0.0], vec![1.0, 0.0]]).unwrap();
    assert_eq!(j.attaining, vec![0]);
    assert!(j.contains(&DualTuple::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]), 1e-12));
    assert!(!j.contains(&DualTuple::new(vec![vec![0.9, 0.0], vec![0.1, 0.0]]), 1e-9));
    assert!(matches!(duality_map(&[vec![0.0, 0.0]]), Err(Error::Precondition(_))));
}

#[test]
fn accepted_tuples_attain_the_norm() {
    let mut rng = common::rng(11);
    let mut accepted = 0;
    for _ in 0..2000 {
        let m = rng.gen_range(2..=3);
        let tie = rng.gen_bool(0.5);
        let v: Vec<Point> = (0..m)
            .map(|i| {
                let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = if tie && i < 2 { 1.0 } else { rng.gen_range(0.2..1.0) };
                vec![r * a.cos(), r * a.sin()]
            })
            .collect();
        let j = duality_map(&v).unwrap();
        // random candidate: weights on a random subset, each either aligned or perturbed
        let w: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.7) { rng.gen_range(0.0..1.0) } else { 0.0 }).collect();
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            continue;
        }
        let xs: Vec<Point> = v
            .iter()
            .zip(&w)
            .map(|(vi, wi)| {
                let t: f64 = if rng.gen_bool(0.8) { 0.0 } else { rng.gen_range(-0.3..0.3) };
                let (c, s) = (t.cos(), t.sin());
                let n = norm(vi);
                let u = [(c * vi[0] - s * vi[1]) / n, (s * vi[0] + c * vi[1]) / n];
                vec![wi / total * u[0], wi / total * u[1]]
            })
            .collect();
        let t = DualTuple::new(xs.clone());
        let vmax = v.iter().map(|a| norm(a)).fold(0.0, f64::max);
        let pairing: f64 = xs.iter().zip(&v).map(|(a, b)| dot(a, b)).sum();
        let defining = (t.norm_sum - 1.0).abs() <= 1e-9 && (pairing - vmax).abs() <= 1e-9;
        assert_eq!(j.contains(&t, 1e-9), defining, "v={v:?} xs={xs:?}");
        accepted += defining as usize;
    }
    assert!(accepted > 100);
}

#[test]
fn uniform_dual_of_coincident_axes_vanishes() {
    let r = uniform_dual_constant(&bundled::scene("ex3_1").unwrap(), 0.3, &p()).unwrap();
    assert!(r.value <= 1e-9, "{}", r.value);
    let xs = &r.witnesses[0].xstars;
    assert_abs_diff_eq!(norm(&xs[0]) + norm(&xs[1]), 1.0, epsilon = 1e-9);
}

#[test]
fn uniform_dual_of_orthogonal_lines() {
    let r = uniform_dual_constant(&bundled::scene("orthogonal_lines").unwrap(), 0.3, &p()).unwrap();
    assert_abs_diff_eq!(r.value, 1.0 / 2f64.sqrt(), epsilon = 0.05);
}

#[test]
fn uniform_dual_with_interior_base_point_is_vacuous() {
    let r = uniform_dual_constant(&bundled::scene("interior_balls").unwrap(), 0.1, &p()).unwrap();
    assert_eq!(r.value, f64::INFINITY);
    assert!(r.flags.iter().any(|f| f == "no nonzero normals"));
}

#[test]
fn uniform_dual_is_scale_invariant() {
    for name in ["ex3_2", "ex3_4", "orthogonal_lines", "lines_pi6"] {
        let sc = bundled::scene(name).unwrap();
        let a = uniform_dual_constant(&sc, 0.3, &p()).unwrap().value;
        for t in [0.5, 2.0] {
            let b = uniform_dual_constant(&sc.scaled(t).unwrap(), 0.3 * t, &p()).unwrap().value;
            assert!((a - b).abs() <= 1e-9, "{name} t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn uniform_dual_needs_euclidean_norm() {
    let mut sc = bundled::scene("ex3_1").unwrap();
    sc.norm = Norm::blocks(vec![1, 1]).unwrap();
    assert!(uniform_dual_constant(&sc, 0.3, &p()).is_err());
}

#[test]
fn certificate_passes_on_coincident_axes() {
    let r = subreg_dual_certificate(&bundled::scene("ex3_1").unwrap(), 0.5, 0.3, &p()).unwrap();
    assert_eq!(r.pass, Some(true));
    // alpha^2 + 2 delta^2 < 1 leaves room: the minimum stays near 1
    assert!(r.value > 0.5 && r.value <= 1.0 + 1e-9, "{}", r.value);
}

#[test]
fn certificate_fails_on_sublinear_scene() {
    let r = subreg_dual_certificate(&bundled::scene("ex3_2").unwrap(), 0.5, 0.3, &p()).unwrap();
    assert_eq!(r.pass, Some(false));
    assert!(r.value < 0.5);
}

#[test]
fn aligned_halfspaces_have_certificate_minimum_one() {
    let h = SetExpr::halfspace(vec![0.0, 1.0], 0.0).unwrap();
    let g = SetExpr::polyhedron(2, vec![(vec![0.0, 1.0], 0.0), (vec![1.0, 0.0], 5.0)]).unwrap();
    let sc = Scene::new(vec![h, g], vec![0.0, 0.0], None, vec![], Norm::euclidean(2)).unwrap();
    let r = subreg_dual_certificate(&sc, 0.5, 0.3, &p()).unwrap();
    assert_eq!(r.pass, Some(true));
    assert_abs_diff_eq!(r.value, 1.0, epsilon = 0.05);
}

#[test]
fn certificate_rejects_bad_parameters() {
    let sc = bundled::scene("ex3_1").unwrap();
    assert!(matches!(subreg_dual_certificate(&sc, 0.0, 0.3, &p()), Err(Error::Precondition(_))));
    assert!(matches!(subreg_dual_certificate(&sc, 0.5, 1e-4, &p()), Err(Error::Precondition(_))));
}

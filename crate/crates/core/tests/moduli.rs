mod common;

use approx::assert_abs_diff_eq;

use setreg::bundled;
use setreg::geometry::{Scene, SetExpr};
use setreg::linalg::Norm;
use setreg::moduli::{
    classify, estimate_all, per_rho_csv, slope_zeta_hat, theta, theta_hat, theta_rho, zeta, zeta_rho_delta, Bias,
    EstimatorParams,
};
use setreg::Error;

fn p() -> EstimatorParams {
    EstimatorParams::default()
}

fn lines(phi: f64) -> Scene {
    let a = SetExpr::affine(vec![0.0, 0.0], vec![vec![1.0, 0.0]]).unwrap();
    let b = SetExpr::affine(vec![0.0, 0.0], vec![vec![phi.cos(), phi.sin()]]).unwrap();
    let int = SetExpr::ball(vec![0.0, 0.0], 0.0).unwrap();
    Scene::new(vec![a, b], vec![0.0, 0.0], Some(int), vec![], Norm::euclidean(2)).unwrap()
}

/// Worst intersection of the lines moved by at most r, from the 2x2 solves.
fn lines_theta_oracle(phi: f64) -> f64 {
    let (n1, n2) = ([0.0, 1.0], [-phi.sin(), phi.cos()]);
    let det = n1[0] * n2[1] - n1[1] * n2[0];
    let mut worst: f64 = 0.0;
    for (s1, s2) in [(1.0, 1.0), (1.0, -1.0)] {
        let y0 = (s1 * n2[1] - s2 * n1[1]) / det;
        let y1 = (n1[0] * s2 - n2[0] * s1) / det;
        worst = worst.max((y0 * y0 + y1 * y1).sqrt());
    }
    1.0 / worst
}

/// min over unit x of max_i d(x, L_i), by a dense angular scan.
fn lines_zeta_oracle(phi: f64) -> f64 {
    (0..200_000)
        .map(|k| {
            let a = std::f64::consts::PI * k as f64 / 200_000.0;
            a.sin().abs().max((a - phi).sin().abs())
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn two_lines_match_the_oracles() {
    for phi in [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_6, 1.0] {
        let sc = lines(phi);
        let e = estimate_all(&sc, &p()).unwrap();
        let (t, z) = (lines_theta_oracle(phi), lines_zeta_oracle(phi));
        assert_abs_diff_eq!(e.theta.value, t, epsilon = 0.01);
        assert_abs_diff_eq!(e.zeta.value, z, epsilon = 0.01);
        assert_abs_diff_eq!(e.theta_hat.value, t.min(z), epsilon = 0.01);
        assert_abs_diff_eq!(e.zeta_hat_slope.unwrap().value, z, epsilon = 0.01);
    }
}

#[test]
fn example_3_4_theta_is_two() {
    let e = theta(&bundled::scene("ex3_4").unwrap(), &p()).unwrap();
    assert!((1.85..=2.05).contains(&e.value), "theta {}", e.value);
    assert_eq!(e.direction, Bias::UpperBiased);
}

#[test]
fn example_3_2_is_semiregular_but_not_subregular() {
    let sc = bundled::scene("ex3_2").unwrap();
    let t = theta(&sc, &p()).unwrap().value;
    assert!((0.9..=1.1).contains(&t), "theta {t}");
    let z = zeta(&sc, &p().with_rho_min(1e-4)).unwrap().value;
    assert!(z <= 0.05, "zeta {z}");
}

#[test]
fn example_3_1_classification() {
    let c = classify(&bundled::scene("ex3_1").unwrap(), &p(), 0.05).unwrap();
    assert!(!c.semiregular && c.subregular && !c.uniformly_regular);
    assert!(c.theta.value <= 0.02);
    assert!(c.zeta.value >= 0.95);
}

#[test]
fn example_3_3_classification() {
    let c = classify(&bundled::scene("ex3_3").unwrap(), &p(), 0.05).unwrap();
    assert!(c.semiregular && c.subregular && !c.uniformly_regular);
    assert!(c.theta_hat.value <= 0.05);
}

// no declared intersection, so d_cap comes from the region search (relative precision 1e-4)
#[test]
fn identical_convex_sets_have_zeta_one() {
    let s = SetExpr::ball(vec![0.0, 1.0], 1.0).unwrap();
    let sc = Scene::new(vec![s.clone(), s], vec![0.0, 0.0], None, vec![], Norm::euclidean(2)).unwrap();
    assert_abs_diff_eq!(zeta(&sc, &p()).unwrap().value, 1.0, epsilon = 2e-4);
}

#[test]
fn ordering_holds_on_bundled_and_random_convex_scenes() {
    let mut scenes: Vec<Scene> = bundled::scene_names().into_iter().map(|n| bundled::scene(n).unwrap()).collect();
    let mut r = common::rng(5);
    scenes.extend((0..20).map(|_| common::random_convex_scene(&mut r)));
    for sc in &scenes {
        let e = estimate_all(sc, &p()).unwrap();
        let (t, z, h) = (e.theta.value, e.zeta.value, e.theta_hat.value);
        assert!(h <= t.min(z) + 0.05, "{:?}: theta_hat {h} theta {t} zeta {z}", sc.name);
        assert!((0.0..=1.001).contains(&z) && (0.0..=1.001).contains(&h));
    }
}

#[test]
fn estimates_are_translation_invariant() {
    for name in ["ex3_2", "ex3_4", "orthogonal_lines"] {
        let sc = bundled::scene(name).unwrap();
        let moved = sc.translated(&[0.75, -0.25]).unwrap();
        let (a, b) = (estimate_all(&sc, &p()).unwrap(), estimate_all(&moved, &p()).unwrap());
        for (x, y) in a.all().iter().zip(b.all()) {
            assert!((x.value - y.value).abs() <= 1e-9, "{name} {:?}: {} vs {}", x.kind, x.value, y.value);
        }
    }
}

#[test]
fn estimates_are_deterministic() {
    let sc = bundled::scene("ex3_3").unwrap();
    let (a, b) = (theta_hat(&sc, &p()).unwrap(), theta_hat(&sc, &p()).unwrap());
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

#[test]
fn theta_rho_of_orthogonal_lines_is_linear_in_rho() {
    let sc = bundled::scene("orthogonal_lines").unwrap();
    let v = theta_rho(&sc, 0.1, &p()).unwrap();
    assert_abs_diff_eq!(v, 0.1 / 2f64.sqrt(), epsilon = 1e-4);
}

#[test]
fn zeta_rho_delta_needs_rho_below_delta() {
    let sc = bundled::scene("ex3_1").unwrap();
    assert!(matches!(zeta_rho_delta(&sc, 0.2, 0.1, &p()), Err(Error::Precondition(_))));
    let v = zeta_rho_delta(&sc, 0.01, 0.1, &p()).unwrap();
    assert_abs_diff_eq!(v, 0.01, epsilon = 1e-6);
}

#[test]
fn vacuous_interior_point_reports_one() {
    let e = zeta(&bundled::scene("interior_balls").unwrap(), &p()).unwrap();
    assert_eq!(e.value, 1.0);
    assert!(e.diagnostics.vacuous);
}

#[test]
fn slope_needs_the_euclidean_norm() {
    let a = SetExpr::affine(vec![0.0, 0.0], vec![vec![1.0, 0.0]]).unwrap();
    let sc = Scene::new(vec![a.clone(), a], vec![0.0, 0.0], None, vec![], Norm::blocks(vec![1, 1]).unwrap()).unwrap();
    assert!(matches!(slope_zeta_hat(&sc, &p()), Err(Error::Unsupported(_))));
}

#[test]
fn bad_parameters_are_rejected() {
    let mut q = p();
    q.schedule.factor = 1.5;
    assert!(matches!(theta(&bundled::scene("ex3_1").unwrap(), &q), Err(Error::Precondition(_))));
    assert!(classify(&bundled::scene("ex3_1").unwrap(), &p(), 0.0).is_err());
}

#[test]
fn per_rho_table_has_one_row_per_radius() {
    let e = zeta(&bundled::scene("ex3_1").unwrap(), &p()).unwrap();
    let csv = per_rho_csv(&[&e]).unwrap();
    assert!(csv.starts_with("kind,rho,ratio,samples,excluded\n"));
    assert_eq!(csv.lines().count(), 1 + p().schedule.values().len());
}

mod common;

use approx::assert_abs_diff_eq;
use rand::Rng;

use setreg::bundled;
use setreg::geometry::SetExpr;
use setreg::mappings::{
    graph_scene, parse_mapping, product_mapping, reg_modulus, semireg_modulus, subreg_modulus, verify_bridge_prop8,
    verify_bridge_thm5, Direction, SvMapping,
};
use setreg::moduli::EstimatorParams;
use setreg::Error;

fn p() -> EstimatorParams {
    EstimatorParams::default()
}

/// min over the unit sphere of the max norm of
/// max(|v|, |v - k u| / (1 + |k|)) / max(|u|, |v|): the subregularity ratio
/// of {line v = k u, u-axis} at the origin.
fn line_pair_zeta_oracle(k: f64) -> f64 {
    let n = 200_000;
    (0..n)
        .map(|i| {
            let a = i as f64 * std::f64::consts::TAU / n as f64;
            let (u, v) = (a.cos(), a.sin());
            let num = v.abs().max((v - k * u).abs() / (1.0 + k.abs()));
            num / u.abs().max(v.abs())
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn product_graph_contains_base_point() {
    for name in bundled::scene_names() {
        let sc = bundled::scene(name).unwrap();
        let f = product_mapping(&sc).unwrap();
        assert_eq!(f.dim_y, sc.dim() * sc.m());
        assert!(f.contains(&sc.xbar, &f.ybar, 1e-12).unwrap(), "{name}");
    }
}

#[test]
fn zero_in_image_exactly_on_intersection() {
    let sc = bundled::scene("ex3_3").unwrap();
    let f = product_mapping(&sc).unwrap();
    let mut rng = common::rng(3);
    let mut inside = 0;
    for _ in 0..400 {
        let x = vec![rng.gen_range(-1.0..1.0), if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-1.0..1.0) }];
        // the ex3_3 sets are both {u <= 0} or {v = 0}
        let member = x[0] <= 0.0 || x[1] == 0.0;
        inside += member as usize;
        assert_eq!(f.contains(&x, &f.ybar, 1e-12).unwrap(), member, "{x:?}");
    }
    assert!(inside > 50);
}

#[test]
fn inverse_of_opposite_vertical_shifts_is_empty() {
    let f = product_mapping(&bundled::scene("ex3_1").unwrap()).unwrap();
    let eps = 0.01;
    assert_eq!(f.inverse_dist(&[0.0, 0.0], &[0.0, eps, 0.0, -eps], 1.0, 1e-9), None);
    let same = f.inverse_dist(&[0.0, 0.0], &[0.0, eps, 0.0, eps], 1.0, 1e-9).unwrap();
    assert_abs_diff_eq!(same, eps, epsilon = 1e-9);
}

#[test]
fn image_distance_is_largest_set_distance() {
    // orthogonal lines {v = 0} and {u = 0}: d(x, Omega_1) = |x_2|, d(x, Omega_2) = |x_1|
    let f = product_mapping(&bundled::scene("orthogonal_lines").unwrap()).unwrap();
    let mut rng = common::rng(5);
    for _ in 0..200 {
        let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let d = f.image_dist(&x, &f.ybar, 4.0, 1e-9).unwrap();
        assert_abs_diff_eq!(d, x[0].abs().max(x[1].abs()), epsilon = 1e-12);
    }
}

#[test]
fn doubling_map_has_moduli_two() {
    let f = bundled::mapping("linear_2x").unwrap();
    for m in [semireg_modulus(&f, &p()), subreg_modulus(&f, &p()), reg_modulus(&f, &p())] {
        assert_abs_diff_eq!(m.unwrap().value, 2.0, epsilon = 0.1);
    }
}

#[test]
fn map_into_a_line_of_the_plane_is_not_semiregular() {
    // gph F = {(x, x, 0)}: F(x) = (x, 0) misses every y off the first axis
    let g = SetExpr::affine(vec![0.0; 3], vec![vec![1.0, 1.0, 0.0]]).unwrap();
    let f = SvMapping::new(1, 2, g, vec![0.0], vec![0.0, 0.0]).unwrap();
    let m = semireg_modulus(&f, &p()).unwrap();
    assert_eq!(m.value, 0.0);
    assert!(m.diagnostics.empty_translated > 0);
}

#[test]
fn product_of_coincident_axes_has_subreg_one() {
    let f = product_mapping(&bundled::scene("ex3_1").unwrap()).unwrap();
    assert_abs_diff_eq!(subreg_modulus(&f, &p()).unwrap().value, 1.0, epsilon = 0.05);
}

#[test]
fn product_of_sublinear_scene_is_not_subregular() {
    let f = product_mapping(&bundled::scene("ex3_2").unwrap()).unwrap();
    assert!(subreg_modulus(&f, &p().with_rho_min(1e-4)).unwrap().value <= 0.05);
}

#[test]
fn prop8_on_example_3_4() {
    let r = verify_bridge_prop8(&bundled::scene("ex3_4").unwrap(), &p()).unwrap();
    assert_eq!(r.direction, Direction::SetsToMapping);
    assert!(r.passed(), "{:?}", r.inequalities);
    assert_abs_diff_eq!(r.lhs.theta.value, 2.0, epsilon = 0.15);
    assert_abs_diff_eq!(r.rhs.theta.value, 2.0, epsilon = 0.15);
}

#[test]
fn prop8_on_example_3_1() {
    let r = verify_bridge_prop8(&bundled::scene("ex3_1").unwrap(), &p()).unwrap();
    assert!(r.passed(), "{:?}", r.inequalities);
    for (t, want) in [(&r.lhs, [0.0, 1.0, 0.0]), (&r.rhs, [0.0, 1.0, 0.0])] {
        assert_abs_diff_eq!(t.theta.value, want[0], epsilon = 0.05);
        assert_abs_diff_eq!(t.zeta.value.min(1.0), want[1], epsilon = 0.05);
        assert_abs_diff_eq!(t.theta_hat.value, want[2], epsilon = 0.05);
    }
}

#[test]
fn prop8_on_example_3_3() {
    let r = verify_bridge_prop8(&bundled::scene("ex3_3").unwrap(), &p()).unwrap();
    assert!(r.passed(), "{:?}", r.inequalities);
    assert!(r.lhs.theta_hat.value <= 0.05 && r.rhs.theta_hat.value <= 0.05);
}

#[test]
fn prop8_uniform_moduli_of_orthogonal_lines() {
    let sc = bundled::scene("orthogonal_lines").unwrap();
    let f = product_mapping(&sc).unwrap();
    let reg = reg_modulus(&f, &p()).unwrap().value;
    let hat = setreg::moduli::theta_hat(&sc, &p()).unwrap().value;
    assert_abs_diff_eq!(reg.min(1.0), hat, epsilon = 0.05);
}

#[test]
fn prop8_report_names_every_pair() {
    let r = verify_bridge_prop8(&bundled::scene("orthogonal_lines").unwrap(), &p()).unwrap();
    let names: Vec<&str> = r.inequalities.iter().map(|i| i.name.as_str()).collect();
    assert_eq!(names, ["theta[Omega] = theta[F]", "zeta[Omega] = zeta[F]", "theta_hat[Omega] = theta_hat[F]"]);
    assert!(r.inequalities.iter().all(|i| i.satisfied == (i.slack >= 0.0)));
}

#[test]
fn thm5_identity_map() {
    let f = bundled::mapping("linear_x").unwrap();
    let r = verify_bridge_thm5(&f, &p()).unwrap();
    assert_eq!(r.direction, Direction::MappingToSets);
    assert!(r.passed(), "{:?}", r.inequalities);
    for m in [&r.rhs.theta, &r.rhs.zeta, &r.rhs.theta_hat] {
        assert_abs_diff_eq!(m.value, 1.0, epsilon = 0.05);
    }
    let oracle = line_pair_zeta_oracle(1.0);
    assert_abs_diff_eq!(oracle, 1.0 / 3.0, epsilon = 1e-4);
    assert_abs_diff_eq!(r.lhs.zeta.value, oracle, epsilon = 0.02);
    assert!(r.inequalities.iter().all(|i| i.slack >= -0.05));
}

#[test]
fn thm5_doubling_map() {
    let f = bundled::mapping("linear_2x").unwrap();
    let r = verify_bridge_thm5(&f, &p()).unwrap();
    assert!(r.passed(), "{:?}", r.inequalities);
    let z = r.lhs.zeta.value;
    assert!((0.5 - 0.05..=1.0 + 0.05).contains(&z), "{z}");
    assert_abs_diff_eq!(z, line_pair_zeta_oracle(2.0), epsilon = 0.02);
}

#[test]
fn thm5_parabola_degenerates_on_both_sides() {
    let f = bundled::mapping("parabola").unwrap();
    let r = verify_bridge_thm5(&f, &p()).unwrap();
    assert!(r.rhs.zeta.value <= 0.05, "{}", r.rhs.zeta.value);
    assert!(r.lhs.zeta.value <= 0.05, "{}", r.lhs.zeta.value);
}

#[test]
fn graph_scene_of_doubling_map() {
    let f = bundled::mapping("linear_2x").unwrap();
    let sc = graph_scene(&f).unwrap();
    assert_eq!(sc.norm.block_sizes(), &[1, 1]);
    assert_eq!(sc.max_dist(&[0.0, 0.0]), 0.0);
    // intersection {0} in the max norm
    assert_abs_diff_eq!(sc.intersection_dist(&[1.0, -0.5]).unwrap(), 1.0, epsilon = 1e-12);
    // sup distance to v = 2u is |v - 2u| / 3
    assert_abs_diff_eq!(sc.dist_to(0, &[1.0, 0.0]), 2.0 / 3.0, epsilon = 1e-9);
    assert_abs_diff_eq!(sc.dist_to(1, &[1.0, 0.4]), 0.4, epsilon = 1e-12);
}

#[test]
fn graph_scene_rejects_product_mapping() {
    let f = product_mapping(&bundled::scene("ex3_1").unwrap()).unwrap();
    assert!(matches!(graph_scene(&f), Err(Error::Unsupported(_))));
}

#[test]
fn parse_mapping_round_trip_and_errors() {
    let f = parse_mapping(bundled::mapping_text("linear_2x").unwrap()).unwrap();
    assert_eq!((f.dim_x, f.dim_y), (1, 1));
    assert!(f.contains(&[0.5], &[1.0], 1e-12).unwrap());
    let g = parse_mapping(&f.to_json().to_string()).unwrap();
    assert!(g.contains(&[0.5], &[1.0], 1e-12).unwrap());

    let bad_field = r#"{"dim_x":1,"dim_y":1,"graph":{"type":"parabola_epi","c":1.0},"xbar":[0],"ybar":[0],"extra":1}"#;
    assert!(matches!(parse_mapping(bad_field), Err(Error::Schema(_))));
    let off_graph = r#"{"dim_x":1,"dim_y":1,"graph":{"type":"parabola_epi","c":1.0},"xbar":[1],"ybar":[0]}"#;
    assert!(matches!(parse_mapping(off_graph), Err(Error::NotInIntersection { .. })));
    let bad_dim = r#"{"dim_x":2,"dim_y":1,"graph":{"type":"parabola_epi","c":1.0},"xbar":[0,0],"ybar":[0]}"#;
    assert!(parse_mapping(bad_dim).is_err());
}

#[test]
fn block_norm_scene_has_no_product_mapping() {
    let mut sc = bundled::scene("ex3_1").unwrap();
    sc.norm = setreg::linalg::Norm::blocks(vec![1, 1]).unwrap();
    assert!(matches!(product_mapping(&sc), Err(Error::Unsupported(_))));
}

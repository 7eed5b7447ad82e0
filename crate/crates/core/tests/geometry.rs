mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::Rng;

use common::{random_shape, rng, Shape};
use setreg::geometry::{brute_distance, parse_scene, GridSpec, SetExpr};
use setreg::linalg::{dist2, Norm};
use setreg::Error;

#[test]
fn brute_oracle_agrees_on_500_random_pairs() {
    let mut r = rng(11);
    let g = GridSpec::new(4.0, 9, 8).unwrap();
    for k in 0..500 {
        let dim = if k % 3 == 0 { 3 } else { 2 };
        let shape = random_shape(&mut r, dim, 1);
        let s = shape.build();
        let x: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.5..1.5)).collect();
        let d = s.distance(&x).unwrap();
        if d > 3.5 {
            continue;
        }
        let b = brute_distance(&s, &x, &g).unwrap();
        assert!(b.found, "pair {k}: brute search found nothing for {shape:?}");
        assert!((b.value - d).abs() <= b.cell_diagonal, "pair {k}: exact {d} brute {} cell {} {shape:?} {x:?}", b.value, b.cell_diagonal);

        let p = s.project(&x).unwrap();
        assert!(dist2(&x, &p) - d <= 1e-10, "pair {k}: projection farther than the distance");
        assert!(shape.member(&p, 1e-8), "pair {k}: projection {p:?} not in {shape:?}");
    }
}

#[test]
fn distance_never_exceeds_distance_to_sampled_members() {
    let mut r = rng(12);
    for _ in 0..200 {
        let shape = random_shape(&mut r, 2, 1);
        let s = shape.build();
        let x: Vec<f64> = (0..2).map(|_| r.gen_range(-1.5..1.5)).collect();
        let d = s.distance(&x).unwrap();
        let mut hits = 0;
        for _ in 0..4000 {
            let q: Vec<f64> = (0..2).map(|_| r.gen_range(-2.5..2.5)).collect();
            if shape.member(&q, 0.0) {
                hits += 1;
                assert!(d <= dist2(&x, &q) + 1e-12);
            }
        }
        if hits == 0 {
            // thin sets: their projection is checked in the oracle test
            continue;
        }
    }
}

#[test]
fn halfspace_distance_is_the_positive_part_of_the_offset() {
    let s = SetExpr::halfspace(vec![3.0, 4.0], 5.0).unwrap();
    assert_abs_diff_eq!(s.distance(&[3.0, 4.0]).unwrap(), 4.0, epsilon = 1e-14);
    assert_eq!(s.distance(&[0.0, 0.0]).unwrap(), 0.0);
}

#[test]
fn degenerate_ball_is_a_point() {
    let s = SetExpr::ball(vec![1.0, 1.0], 0.0).unwrap();
    assert_abs_diff_eq!(s.distance(&[4.0, 5.0]).unwrap(), 5.0, epsilon = 1e-14);
    assert_eq!(s.project(&[4.0, 5.0]).unwrap(), vec![1.0, 1.0]);
}

#[test]
fn parabola_projection_satisfies_the_normal_equation() {
    let s = SetExpr::parabola_epi(1.0).unwrap();
    for x in [[1.0, -1.0], [0.3, 0.0], [-2.0, 1.0], [0.0, -0.5]] {
        let p = s.project(&x).unwrap();
        assert_abs_diff_eq!(p[1], p[0] * p[0], epsilon = 1e-12);
        // x - p is parallel to the normal (2u, -1)
        let cross = (x[0] - p[0]) * -1.0 - (x[1] - p[1]) * 2.0 * p[0];
        assert_abs_diff_eq!(cross, 0.0, epsilon = 1e-10);
    }
}

#[test]
fn union_takes_the_nearest_child() {
    let a = SetExpr::ball(vec![0.0, 0.0], 1.0).unwrap();
    let b = SetExpr::ball(vec![5.0, 0.0], 1.0).unwrap();
    let u = SetExpr::union(vec![a, b]).unwrap();
    assert_abs_diff_eq!(u.distance(&[3.5, 0.0]).unwrap(), 0.5, epsilon = 1e-14);
}

#[test]
fn sup_norm_distance_to_a_line() {
    // v = 2u under max(|du|, |dv|): the nearest point of (1, 0) is (1/3, 2/3)
    let s = SetExpr::affine(vec![0.0, 0.0], vec![vec![1.0, 2.0]]).unwrap();
    let norm = Norm::blocks(vec![1, 1]).unwrap();
    s.check_norm(&norm).unwrap();
    assert_abs_diff_eq!(s.dist_in(&[1.0, 0.0], &norm), 2.0 / 3.0, epsilon = 1e-12);
    let p = SetExpr::polyhedron(2, vec![(vec![-2.0, 1.0], 0.0), (vec![2.0, -1.0], 0.0)]).unwrap();
    assert_abs_diff_eq!(p.dist_in(&[1.0, 0.0], &norm), 2.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn invalid_sets_are_rejected() {
    assert!(matches!(SetExpr::halfspace(vec![0.0, 0.0], 1.0), Err(Error::InvalidSet(_))));
    assert!(matches!(SetExpr::ball(vec![0.0], -1.0), Err(Error::InvalidSet(_))));
    assert!(matches!(SetExpr::boxed(vec![1.0], vec![0.0]), Err(Error::InvalidSet(_))));
    assert!(matches!(
        SetExpr::polyhedron(2, vec![(vec![1.0, 0.0], -1.0), (vec![-1.0, 0.0], -1.0)]),
        Err(Error::InfeasiblePolyhedron)
    ));
    assert!(SetExpr::affine(vec![0.0, 0.0], vec![vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
}

#[test]
fn scene_rejects_xbar_off_a_set() {
    let text = r#"{"dim": 2, "xbar": [1.0, 1.0],
        "sets": [{"type": "ball", "c": [0.0, 0.0], "r": 1.0}, {"type": "halfspace", "a": [1.0, 0.0], "b": 5.0}]}"#;
    assert!(matches!(parse_scene(text), Err(Error::NotInIntersection { set: 0, .. })));
}

#[test]
fn scene_rejects_unknown_fields() {
    let text = r#"{"dim": 1, "xbar": [0.0], "bogus": 1,
        "sets": [{"type": "ball", "c": [0.0], "r": 1.0}, {"type": "ball", "c": [0.0], "r": 1.0}]}"#;
    assert!(matches!(parse_scene(text), Err(Error::Schema(_))));
}

fn small() -> impl Strategy<Value = f64> {
    (-300i32..=300).prop_map(|v| f64::from(v) / 100.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_idempotent(seed in 0u64..10_000, x in proptest::array::uniform2(small())) {
        let mut r = rng(seed);
        let s = random_shape(&mut r, 2, 1).build();
        let p = s.project(&x).unwrap();
        let pp = s.project(&p).unwrap();
        prop_assert!(dist2(&p, &pp) <= 1e-9);
        prop_assert!(s.distance(&p).unwrap() <= 1e-9);
    }

    #[test]
    fn distance_is_one_lipschitz(seed in 0u64..10_000, x in proptest::array::uniform3(small()), y in proptest::array::uniform3(small())) {
        let mut r = rng(seed);
        let s = random_shape(&mut r, 3, 1).build();
        let gap = (s.distance(&x).unwrap() - s.distance(&y).unwrap()).abs();
        prop_assert!(gap <= dist2(&x, &y) + 1e-10);
    }

    #[test]
    fn translation_moves_distances_rigidly(seed in 0u64..10_000, x in proptest::array::uniform2(small()), v in proptest::array::uniform2(small())) {
        let mut r = rng(seed);
        let shape = random_shape(&mut r, 2, 1);
        let s = shape.build();
        let moved = Shape::Shift(Box::new(shape), v.to_vec()).build();
        let xv = [x[0] + v[0], x[1] + v[1]];
        prop_assert!((s.distance(&x).unwrap() - moved.distance(&xv).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn membership_matches_the_reference_predicate(seed in 0u64..10_000, x in proptest::array::uniform2(small())) {
        let mut r = rng(seed);
        let shape = random_shape(&mut r, 2, 1);
        let s = shape.build();
        let d = s.distance(&x).unwrap();
        if d > 1e-6 {
            prop_assert!(!shape.member(&x, 0.0));
        }
        if shape.member(&x, 0.0) {
            prop_assert!(d <= 1e-9);
        }
    }
}

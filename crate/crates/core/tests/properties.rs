use monocone::calculus::laplacian;
use monocone::cone::cone_distance;
use monocone::field::Field;
use monocone::monotone::u_beta_radial;
use monocone::potential::solve_obstacle;
use monocone::space::{build_lattice, build_path, ConePoint};
use monocone::{RadialField, RadialSpace};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cone_distance_is_a_metric(
        r in proptest::array::uniform3(0.01f64..20.0),
        z in proptest::array::uniform3(0.0f64..1.0),
    ) {
        let s = RadialSpace::euclidean(3);
        let pts: Vec<ConePoint> = r.iter().zip(&z).map(|(&r, &a)| {
            let th = a * std::f64::consts::TAU;
            ConePoint { r, z: vec![th.cos(), th.sin(), 0.0] }
        }).collect();
        let d = |i: usize, j: usize| s.distance(&pts[i], &pts[j]).unwrap();
        prop_assert!(d(0, 0).abs() < 1e-12);
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
    }

    #[test]
    fn cone_distance_scales_linearly(t in 0.01f64..10.0, s in 0.01f64..10.0, dz in 0.0f64..4.0, k in 0.1f64..10.0) {
        let a = cone_distance(k * t, k * s, dz);
        prop_assert!((a - k * cone_distance(t, s, dz)).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(a >= (k * t - k * s).abs() - 1e-12);
        prop_assert!(a <= k * (t + s) + 1e-12);
    }

    #[test]
    fn functional_scales_with_the_potential(lambda in 0.2f64..5.0, beta in 0.1f64..4.0, t in 0.05f64..0.95) {
        let space = RadialSpace::euclidean(3);
        let base = RadialField::exterior_potential(3.0, 1.0, 4.0);
        let scaled = RadialField::exterior_potential(3.0, lambda, 4.0 * lambda);
        let u1 = u_beta_radial(&space, &base, beta, t).unwrap();
        let ul = u_beta_radial(&space, &scaled, beta, t).unwrap();
        prop_assert!((ul / u1 / lambda.powf(1.0 - beta) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn capacity_grows_with_the_obstacle(lo in 2usize..6, len in 0usize..4, extra in 1usize..3) {
        let p = build_path(14).unwrap();
        let all: Vec<usize> = (0..14).collect();
        let small: Vec<usize> = (lo..=lo + len).collect();
        let big: Vec<usize> = (lo..=(lo + len + extra).min(12)).collect();
        let a = solve_obstacle(&p, &small, &all, 1e-11).unwrap().capacity;
        let b = solve_obstacle(&p, &big, &all, 1e-11).unwrap().capacity;
        prop_assert!(a <= b + 1e-9);
        // Two linear ramps from the ends of the path.
        let exact = 1.0 / lo as f64 + 1.0 / (13 - lo - len) as f64;
        prop_assert!((a - exact).abs() < 1e-8);
    }

    #[test]
    fn capacity_shrinks_with_the_container(shrink in 1usize..4) {
        let p = build_path(16).unwrap();
        let wide: Vec<usize> = (0..16).collect();
        let narrow: Vec<usize> = (shrink..16 - shrink).collect();
        let a = solve_obstacle(&p, &[7, 8], &wide, 1e-11).unwrap().capacity;
        let b = solve_obstacle(&p, &[7, 8], &narrow, 1e-11).unwrap().capacity;
        prop_assert!(a <= b + 1e-9);
    }

    #[test]
    fn laplacian_is_linear(
        c in -3.0f64..3.0,
        f in proptest::collection::vec(-1.0f64..1.0, 49),
        g in proptest::collection::vec(-1.0f64..1.0, 49),
    ) {
        let space = build_lattice(2, 1.5, 0.5).unwrap();
        let (ff, gg) = (Field::full(f.clone()), Field::full(g.clone()));
        let sum = Field::full(f.iter().zip(&g).map(|(a, b)| a + c * b).collect());
        let (lf, lg, ls) = (laplacian(&space, &ff), laplacian(&space, &gg), laplacian(&space, &sum));
        for x in 0..space.len() {
            if ls.defined(x) {
                prop_assert!((ls.value(x) - lf.value(x) - c * lg.value(x)).abs() < 1e-9);
            }
        }
    }
}

use nssl::sims::{admissible_pair, convex_hull, NumericalRangeHull};
use nssl::Complex64;
use proptest::prelude::*;

fn cloud() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Complex64::new(x, y)), 3..60)
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

fn hull_of(points: Vec<Complex64>) -> NumericalRangeHull {
    NumericalRangeHull {
        vertices: convex_hull(&points),
        samples: points,
        ray_directions: Vec::new(),
        x_grid: Vec::new(),
        r_grid: Vec::new(),
    }
}

proptest! {
    #[test]
    fn hull_is_convex_and_counterclockwise(pts in cloud()) {
        let v = convex_hull(&pts);
        prop_assume!(v.len() >= 3);
        for i in 0..v.len() {
            let (a, b, c) = (v[i], v[(i + 1) % v.len()], v[(i + 2) % v.len()]);
            prop_assert!(cross(a, b, c) > 0.0);
        }
    }

    #[test]
    fn hull_holds_every_point_and_is_idempotent(pts in cloud()) {
        let h = hull_of(pts.clone());
        for p in &pts {
            prop_assert!(h.contains(*p, 1e-12));
        }
        prop_assert_eq!(convex_hull(&h.vertices), h.vertices.clone());
    }

    #[test]
    fn outside_points_are_separated(pts in cloud(), x in -30.0..30.0f64, y in -30.0..30.0f64) {
        let h = hull_of(pts);
        let z = Complex64::new(x, y);
        prop_assume!(!h.contains(z, 1e-9));
        let pair = admissible_pair(&h, z).unwrap();
        prop_assert!(pair.separates);
        prop_assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&pair.eta));
        // every sample lies in the closed half-plane facing away from z
        prop_assert_eq!(pair.half_plane_fraction, 1.0);
    }
}

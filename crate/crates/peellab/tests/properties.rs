//! Randomized property tests for the structural invariants: hull
//! combinatorics, peeling label structure, sampling support, the corner
//! scaling transform and Macbeath symmetry.

use std::collections::HashSet;

use peellab::geom::{self, PointSet};
use peellab::macbeath::macbeath_region;
use peellab::peeling::peel;
use peellab::polytope::cube;
use peellab::rescaled::{
    grain_g, inverse_transform, scaling_transform, Grain, RescaledPoint,
};
use peellab::sampling::{self, Seed};
use proptest::collection::vec;
use proptest::prelude::*;

fn coords(d: usize, n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    vec(vec(0.0f64..1.0, d), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Euler characteristic of the boundary complex: f_0 - f_1 + ... equals
    // 0 for even d and 2 for odd face count parity (d=2 -> 0, d=3 -> 2).
    #[test]
    fn hull_euler_characteristic_2d(rows in coords(2, 3..40)) {
        let ps = PointSet::from_coords(2, &rows);
        if let Ok(h) = geom::convex_hull(&ps) {
            prop_assert_eq!(h.euler_characteristic(), 0);
            prop_assert_eq!(h.f(0), h.f(1)); // polygon: as many edges as vertices
            prop_assert!(h.volume >= 0.0 && h.volume <= 1.0);
        }
    }

    #[test]
    fn hull_euler_characteristic_3d(rows in coords(3, 4..25)) {
        let ps = PointSet::from_coords(3, &rows);
        if let Ok(h) = geom::convex_hull(&ps) {
            prop_assert_eq!(h.euler_characteristic(), 2);
            prop_assert!(h.volume >= 0.0 && h.volume <= 1.0);
        }
    }

    // translation leaves the face lattice untouched and the volume equal
    #[test]
    fn hull_translation_invariant(rows in coords(2, 3..25), tx in -5.0f64..5.0, ty in -5.0f64..5.0) {
        let ps = PointSet::from_coords(2, &rows);
        let moved: Vec<Vec<f64>> =
            rows.iter().map(|r| vec![r[0] + tx, r[1] + ty]).collect();
        let qs = PointSet::from_coords(2, &moved);
        match (geom::convex_hull(&ps), geom::convex_hull(&qs)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.f_vector(), b.f_vector());
                prop_assert_eq!(&a.vertex_ids, &b.vertex_ids);
                prop_assert!((a.volume - b.volume).abs() < 1e-9);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "degeneracy must be translation invariant"),
        }
    }

    // peeling labels: contiguous 1..=L, covering every id; layer 1 is the
    // hull boundary of the full set
    #[test]
    fn peel_labels_partition_and_start_at_hull(rows in coords(2, 1..60)) {
        let ps = PointSet::from_coords(2, &rows);
        let pr = peel(&ps, None);
        prop_assert_eq!(pr.label.len(), rows.len());
        let top = pr.total_layers();
        prop_assert!(top >= 1);
        let seen: HashSet<u32> = pr.label.values().copied().collect();
        for l in 1..=top {
            prop_assert!(seen.contains(&l), "layer {} skipped", l);
        }
        let (verts, bnd) = geom::hull_boundary(&ps).unwrap();
        for id in verts.iter().chain(&bnd) {
            prop_assert_eq!(pr.label[id], 1);
        }
    }

    // truncation keeps the labels of the layers it did produce
    #[test]
    fn peel_truncation_is_a_prefix(rows in coords(2, 5..40), cap in 1usize..4) {
        let ps = PointSet::from_coords(2, &rows);
        let full = peel(&ps, None);
        let part = peel(&ps, Some(cap));
        for (id, l) in &part.label {
            prop_assert_eq!(full.label[id], *l);
        }
        for (id, l) in &full.label {
            if (*l as usize) <= cap {
                prop_assert_eq!(part.label.get(id), Some(l));
            }
        }
    }

    // Poisson samples live in the window and are seed-reproducible
    #[test]
    fn sampling_support_and_determinism(master in 0u64..1000, stream in 0u64..8) {
        let k = cube(2, 1.0);
        let a = sampling::sample_poisson(&k, 80.0, Seed::new(master, stream));
        let b = sampling::sample_poisson(&k, 80.0, Seed::new(master, stream));
        prop_assert_eq!(a.len(), b.len());
        for i in 0..a.len() {
            prop_assert_eq!(a.coords(i), b.coords(i));
            prop_assert!(k.contains(a.coords(i)));
        }
    }

    // scaling transform round trip on the positive orthant
    #[test]
    fn transform_round_trip(
        z in vec(0.01f64..10.0, 2..5),
        lam in 0.1f64..100.0,
    ) {
        let w = scaling_transform(&z, lam).unwrap();
        let back = inverse_transform(&w, lam);
        for (a, b) in z.iter().zip(&back) {
            prop_assert!((a - b).abs() / a < 1e-9, "{} vs {}", a, b);
        }
    }

    // grain boundary duality: w' strictly inside the down grain of w iff
    // w strictly inside the up grain of w'
    #[test]
    fn grain_duality(
        v1 in -3.0f64..3.0, h1 in -3.0f64..3.0,
        v2 in -3.0f64..3.0, h2 in -3.0f64..3.0,
    ) {
        let d = 2;
        let w = RescaledPoint::new(vec![v1], h1);
        let wp = RescaledPoint::new(vec![v2], h2);
        let down = Grain::down(w.clone());
        let up = Grain::up(wp.clone());
        prop_assert_eq!(down.contains(d, &wp), up.contains(d, &w));
    }

    // G is nonnegative, 1-Lipschitz and zero at the origin
    #[test]
    fn grain_function_lipschitz(
        a in vec(-4.0f64..4.0, 2),
        b in vec(-4.0f64..4.0, 2),
    ) {
        let d = 3;
        let ga = grain_g(d, &a);
        let gb = grain_g(d, &b);
        let dist: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        prop_assert!(ga >= 0.0 && gb >= 0.0);
        prop_assert!((ga - gb).abs() <= dist + 1e-12);
        prop_assert!(grain_g(d, &vec![0.0, 0.0]).abs() < 1e-12);
    }

    // Macbeath regions are centrally symmetric about their center and
    // contained in the body for factor <= 1
    #[test]
    fn macbeath_region_symmetry(
        zx in 0.05f64..0.95, zy in 0.05f64..0.95, f in 0.1f64..1.0,
    ) {
        let k = cube(2, 1.0);
        let z = vec![zx, zy];
        let m = macbeath_region(&k, &z, f).unwrap();
        for v in m.polytope.vertices() {
            // pull the reflection marginally toward the center before the
            // containment check to absorb boundary roundoff
            let refl: Vec<f64> = v
                .iter()
                .zip(&z)
                .map(|(a, c)| c + (1.0 - 1e-9) * (c - a))
                .collect();
            prop_assert!(m.polytope.contains(&refl));
            prop_assert!(k.contains(v) || f > 1.0);
        }
    }
}

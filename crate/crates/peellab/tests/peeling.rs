//! Peeling semantics against a definition-level oracle: a point leaves at
//! layer n exactly when it is not in the relative interior of the hull of
//! the points still alive, decided by linear programming.

use std::collections::HashMap;

use peellab::geom::PointSet;
use peellab::linprog::{simplex, LpOutcome};
use peellab::peeling::{self, layer_label, peel};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// max t s.t. x = sum mu_i y_i, sum mu = 1, mu_i >= t: positive optimum
/// means x lies in the relative interior of conv{y_i}.
fn in_relative_interior(points: &[Vec<f64>], alive: &[usize], x: &[f64]) -> bool {
    let n = alive.len();
    let d = x.len();
    // variables: mu_1..mu_n, t
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut a_eq: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut b_eq = Vec::with_capacity(d + 1);
    for coord in 0..d {
        let mut row = vec![0.0; n + 1];
        for (j, &i) in alive.iter().enumerate() {
            row[j] = points[i][coord];
        }
        a_eq.push(row);
        b_eq.push(x[coord]);
    }
    let mut ones = vec![1.0; n + 1];
    ones[n] = 0.0;
    a_eq.push(ones);
    b_eq.push(1.0);
    // t - mu_i <= 0
    let mut a_ub = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = vec![0.0; n + 1];
        row[j] = -1.0;
        row[n] = 1.0;
        a_ub.push(row);
    }
    let b_ub = vec![0.0; n];
    match simplex(&c, &a_eq, &b_eq, &a_ub, &b_ub) {
        LpOutcome::Optimal { value, .. } => value > 1e-9,
        _ => false,
    }
}

fn oracle_labels(points: &[Vec<f64>]) -> HashMap<u64, u32> {
    let mut alive: Vec<usize> = (0..points.len()).collect();
    let mut label = HashMap::new();
    let mut layer = 1;
    while !alive.is_empty() {
        // a 0-dimensional hull is its own boundary: everything leaves
        let all_coincide =
            alive.iter().all(|&i| points[i] == points[alive[0]]);
        let removed: Vec<usize> = if all_coincide {
            alive.clone()
        } else {
            alive
                .iter()
                .copied()
                .filter(|&i| !in_relative_interior(points, &alive, &points[i]))
                .collect()
        };
        assert!(!removed.is_empty(), "oracle made no progress");
        for &i in &removed {
            label.insert(i as u64, layer);
        }
        alive.retain(|i| !removed.contains(i));
        layer += 1;
    }
    label
}

#[test]
fn labels_match_oracle_random_2d() {
    let mut rng = StdRng::seed_from_u64(101);
    for trial in 0..40 {
        let n = rng.gen_range(5..13);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let p = PointSet::from_coords(2, &rows);
        let pr = peel(&p, None);
        let want = oracle_labels(&rows);
        for (id, l) in &want {
            assert_eq!(pr.label[id], *l, "trial {trial} id {id}");
        }
    }
}

#[test]
fn labels_match_oracle_random_3d() {
    let mut rng = StdRng::seed_from_u64(103);
    for trial in 0..20 {
        let n = rng.gen_range(6..14);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..3).map(|_| rng.gen::<f64>()).collect()).collect();
        let p = PointSet::from_coords(3, &rows);
        let pr = peel(&p, None);
        let want = oracle_labels(&rows);
        for (id, l) in &want {
            assert_eq!(pr.label[id], *l, "trial {trial} id {id}");
        }
    }
}

#[test]
fn labels_match_oracle_degenerate_configs() {
    // grid points: many collinear groups
    let mut rows = Vec::new();
    for x in 0..4 {
        for y in 0..4 {
            rows.push(vec![x as f64, y as f64]);
        }
    }
    let p = PointSet::from_coords(2, &rows);
    let pr = peel(&p, None);
    let want = oracle_labels(&rows);
    for (id, l) in &want {
        assert_eq!(pr.label[id], *l, "id {id}");
    }
}

#[test]
fn layer_label_matches_full_recomputation() {
    let mut rng = StdRng::seed_from_u64(107);
    for _ in 0..100 {
        let n = rng.gen_range(5..20);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let p = PointSet::from_coords(2, &rows);
        let x = vec![rng.gen::<f64>() * 1.2 - 0.1, rng.gen::<f64>() * 1.2 - 0.1];
        // definition: peel ps with x appended under a fresh id
        let mut aug_rows = rows.clone();
        aug_rows.push(x.clone());
        let aug = PointSet::from_coords(2, &aug_rows);
        let want = peel(&aug, None).label[&(n as u64)];
        assert_eq!(layer_label(&p, &x), want);
    }
}

#[test]
fn label_monotone_under_set_growth() {
    // adding points can only push a test point deeper
    let mut rng = StdRng::seed_from_u64(109);
    for _ in 0..250 {
        let n = rng.gen_range(4..12);
        let extra = rng.gen_range(1..6);
        let rows: Vec<Vec<f64>> =
            (0..n + extra).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let x: Vec<f64> = vec![rng.gen::<f64>(), rng.gen::<f64>()];
        let small = PointSet::from_coords(2, &rows[..n].to_vec());
        let big = PointSet::from_coords(2, &rows);
        assert!(layer_label(&small, &x) <= layer_label(&big, &x));
    }
}

#[test]
fn labels_affine_invariant() {
    let mut rng = StdRng::seed_from_u64(113);
    // volume-preserving shear
    let map = |p: &[f64]| vec![p[0] + 0.7 * p[1], p[1]];
    for _ in 0..20 {
        let rows: Vec<Vec<f64>> =
            (0..30).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let mapped: Vec<Vec<f64>> = rows.iter().map(|r| map(r)).collect();
        let l1 = peel(&PointSet::from_coords(2, &rows), None).label;
        let l2 = peel(&PointSet::from_coords(2, &mapped), None).label;
        assert_eq!(l1, l2);
    }
}

#[test]
fn layer_stats_square_and_nesting() {
    use peellab::polytope::cube;
    let k = cube(2, 1.0);
    let p = PointSet::from_coords(
        2,
        &[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ],
    );
    let pr = peel(&p, None);
    let s = peeling::layer_stats(&pr, &k, 1).unwrap();
    assert_eq!(s.f, vec![4, 4]);
    assert!(s.defect_volume.abs() < 1e-12);
    assert!(peeling::layer_stats(&pr, &k, 2).is_err());
}

#[test]
fn defect_volume_nondecreasing_poisson() {
    use peellab::polytope::cube;
    use peellab::sampling::{sample_poisson, Seed};
    let k = cube(2, 1.0);
    for s in 0..5 {
        let ps = sample_poisson(&k, 10_000.0, Seed::new(55, s));
        let pr = peel(&ps, Some(8));
        let mut prev = -1.0;
        for n in 1..=pr.layers.len() {
            let st = peeling::layer_stats(&pr, &k, n).unwrap();
            assert!(st.defect_volume >= prev - 1e-12);
            assert!(st.defect_volume <= k.volume() + 1e-12);
            prev = st.defect_volume;
        }
    }
}

#[test]
fn total_layers_small_inputs() {
    let mut rng = StdRng::seed_from_u64(127);
    for d in [2usize, 3] {
        for _ in 0..5 {
            let n = rng.gen_range(1..=d + 1);
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
            let p = PointSet::from_coords(d, &rows);
            assert_eq!(peeling::total_layers(&p), 1);
        }
    }
}

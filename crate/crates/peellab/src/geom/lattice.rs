//! Face lattice reconstruction from facet vertex sets.
//!
//! Every proper face of a polytope is the intersection of the facets
//! containing it, and the vertex set of an intersection of faces is the
//! intersection of their vertex sets. Closing the facet vertex sets under
//! pairwise intersection therefore enumerates all proper faces; faces are
//! then bucketed by the affine dimension of their vertex sets.

use std::collections::{HashMap, HashSet};

use num_rational::BigRational;
use num_traits::Zero;

use super::predicates::rational_of;

/// Exact affine dimension of a small point set.
fn affine_dim(pts: &[&[f64]]) -> usize {
    if pts.len() <= 1 {
        return 0;
    }
    let d = pts[0].len();
    let base: Vec<BigRational> = pts[0].iter().map(|&x| rational_of(x)).collect();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for p in &pts[1..] {
        let mut row: Vec<BigRational> =
            p.iter().zip(&base).map(|(&x, b)| rational_of(x) - b).collect();
        for (r, &pc) in rows.iter().zip(&pivots) {
            if !row[pc].is_zero() {
                let factor = &row[pc] / &r[pc];
                for c in 0..d {
                    let t = &factor * &r[c];
                    row[c] -= t;
                }
            }
        }
        if let Some(pc) = (0..d).find(|&c| !row[c].is_zero()) {
            pivots.push(pc);
            rows.push(row);
        }
    }
    rows.len()
}

/// faces[k] for 0 <= k <= dim-1, each face a sorted vertex id set.
pub fn face_lattice(
    dim: usize,
    facet_sets: &[Vec<u64>],
    vertex_ids: &[u64],
    coords_of: &HashMap<u64, Vec<f64>>,
) -> Vec<Vec<Vec<u64>>> {
    let mut all: HashSet<Vec<u64>> = facet_sets.iter().cloned().collect();
    let mut frontier: Vec<Vec<u64>> = all.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in facet_sets {
                let inter: Vec<u64> =
                    f.iter().copied().filter(|id| g.binary_search(id).is_ok()).collect();
                if !inter.is_empty() && !all.contains(&inter) {
                    all.insert(inter.clone());
                    next.push(inter);
                }
            }
        }
        frontier = next;
    }
    for &v in vertex_ids {
        all.insert(vec![v]);
    }

    let mut faces: Vec<Vec<Vec<u64>>> = vec![Vec::new(); dim];
    for f in all {
        let pts: Vec<&[f64]> = f.iter().map(|id| coords_of[id].as_slice()).collect();
        let k = affine_dim(&pts);
        if k < dim {
            faces[k].push(f);
        }
    }
    for level in faces.iter_mut() {
        level.sort();
    }
    faces
}

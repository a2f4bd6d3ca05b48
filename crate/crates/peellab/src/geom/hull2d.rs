//! Planar convex hulls by monotone chain, with exact predicates.
//!
//! Two chain passes classify every point: a strict pass yields the hull
//! vertices, a non-strict pass additionally keeps collinear points lying on
//! hull edges (the "boundary but not vertex" class the peeling removes).

use super::predicates::{orient2d, Sign};
use super::{GeomError, HullComplex, HullOutput, PointSet};

#[inline]
fn pt(coords: &[f64], i: u32) -> &[f64] {
    &coords[i as usize * 2..i as usize * 2 + 2]
}

/// Andrew's monotone chain over indices already sorted lexicographically.
/// `strict` pops collinear points (vertices only); non-strict keeps them.
/// Returns the closed hull walk in counterclockwise order, first point not
/// repeated. Input must contain no duplicate coordinates and >= 2 distinct
/// points that are not all equal.
pub fn chain(coords: &[f64], sorted: &[u32], strict: bool) -> Vec<u32> {
    let n = sorted.len();
    if n <= 2 {
        return sorted.to_vec();
    }
    let keep = |o: Sign| -> bool {
        match o {
            Sign::Pos => true,
            Sign::Zero => !strict,
            Sign::Neg => false,
        }
    };
    let mut lower: Vec<u32> = Vec::with_capacity(16);
    for &i in sorted {
        while lower.len() >= 2 {
            let o = orient2d(
                pt(coords, lower[lower.len() - 2]),
                pt(coords, lower[lower.len() - 1]),
                pt(coords, i),
            );
            if keep(o) {
                break;
            }
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<u32> = Vec::with_capacity(16);
    for &i in sorted.iter().rev() {
        while upper.len() >= 2 {
            let o = orient2d(
                pt(coords, upper[upper.len() - 2]),
                pt(coords, upper[upper.len() - 1]),
                pt(coords, i),
            );
            if keep(o) {
                break;
            }
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend_from_slice(&upper);
    lower
}

/// True if the (deduplicated, sorted) points are all on one line.
pub fn all_collinear(coords: &[f64], sorted: &[u32]) -> bool {
    if sorted.len() <= 2 {
        return true;
    }
    let a = pt(coords, sorted[0]);
    let b = pt(coords, *sorted.last().unwrap());
    sorted[1..sorted.len() - 1]
        .iter()
        .all(|&i| orient2d(a, b, pt(coords, i)) == Sign::Zero)
}

/// Classification of one peeling pass over the alive points.
pub struct Layer2d {
    /// hull vertices, counterclockwise
    pub vertices: Vec<u32>,
    /// on the hull boundary, not vertices
    pub on_edges: Vec<u32>,
    /// true when the alive points were collinear (degenerate layer)
    pub degenerate: bool,
}

/// One peeling layer over `sorted` (lexicographically sorted, deduplicated
/// alive indices). Degenerate (collinear) input yields the two endpoints as
/// vertices, the rest stays alive.
pub fn layer2d(coords: &[f64], sorted: &[u32]) -> Layer2d {
    if sorted.len() <= 2 {
        return Layer2d { vertices: sorted.to_vec(), on_edges: Vec::new(), degenerate: true };
    }
    if all_collinear(coords, sorted) {
        return Layer2d {
            vertices: vec![sorted[0], *sorted.last().unwrap()],
            on_edges: Vec::new(),
            degenerate: true,
        };
    }
    let verts = chain(coords, sorted, true);
    let walk = chain(coords, sorted, false);
    let mut on_edges = Vec::new();
    if walk.len() > verts.len() {
        let vset: Vec<u32> = {
            let mut v = verts.clone();
            v.sort_unstable();
            v
        };
        for &i in &walk {
            if vset.binary_search(&i).is_err() {
                on_edges.push(i);
            }
        }
    }
    Layer2d { vertices: verts, on_edges, degenerate: false }
}

/// Shoelace-free area: fan of triangles from the vertex centroid.
pub fn polygon_area(coords: &[f64], ccw: &[u32]) -> f64 {
    let n = ccw.len();
    if n < 3 {
        return 0.0;
    }
    let mut cx = 0.0;
    let mut cy = 0.0;
    for &i in ccw {
        cx += pt(coords, i)[0];
        cy += pt(coords, i)[1];
    }
    cx /= n as f64;
    cy /= n as f64;
    let mut area = 0.0;
    for k in 0..n {
        let a = pt(coords, ccw[k]);
        let b = pt(coords, ccw[(k + 1) % n]);
        area += (a[0] - cx) * (b[1] - cy) - (a[1] - cy) * (b[0] - cx);
    }
    area / 2.0
}

/// Deduplicate by exact coordinates: returns (sorted unique representative
/// indices, and for every input index the representative it maps to).
/// The representative of a coordinate-identical group is its lowest id.
pub fn dedup_sorted(ps: &PointSet) -> (Vec<u32>, Vec<u32>) {
    let n = ps.len();
    let mut idx: Vec<u32> = (0..n as u32).collect();
    idx.sort_unstable_by(|&a, &b| {
        let pa = ps.coords(a as usize);
        let pb = ps.coords(b as usize);
        (pa[0], pa[1], ps.id(a as usize))
            .partial_cmp(&(pb[0], pb[1], ps.id(b as usize)))
            .unwrap()
    });
    let mut unique = Vec::with_capacity(n);
    let mut rep_of = vec![0u32; n];
    let mut k = 0;
    while k < n {
        let rep = idx[k];
        let rc = ps.coords(rep as usize);
        unique.push(rep);
        let mut j = k;
        while j < n && ps.coords(idx[j] as usize) == rc {
            rep_of[idx[j] as usize] = rep;
            j += 1;
        }
        k = j;
    }
    (unique, rep_of)
}

pub fn convex_hull_2d(ps: &PointSet) -> Result<HullOutput, GeomError> {
    if ps.dim() != 2 {
        return Err(GeomError::DimensionMismatch { expected: 2, got: ps.dim() });
    }
    if ps.is_empty() {
        return Err(GeomError::EmptyInput);
    }
    let (unique, rep_of) = dedup_sorted(ps);
    if unique.len() <= 2 || all_collinear(flat(ps), &unique) {
        let affine_dim = if unique.len() == 1 { 0 } else { 1 };
        return Err(GeomError::DegenerateInput { dim: 2, affine_dim });
    }
    let coords = flat(ps);
    let verts = chain(coords, &unique, true);
    let walk = chain(coords, &unique, false);

    let mut vertex_ids: Vec<u64> = verts.iter().map(|&i| ps.id(i as usize)).collect();
    let mut vset: Vec<u32> = verts.clone();
    vset.sort_unstable();
    let wset: Vec<u32> = {
        let mut w = walk.clone();
        w.sort_unstable();
        w
    };

    let mut boundary_ids = Vec::new();
    let mut interior_ids = Vec::new();
    for i in 0..ps.len() {
        let rep = rep_of[i];
        let is_rep = rep as usize == i;
        let rep_is_vertex = vset.binary_search(&rep).is_ok();
        let rep_on_walk = wset.binary_search(&rep).is_ok();
        if is_rep && rep_is_vertex {
            continue; // vertex, already collected
        }
        if rep_on_walk {
            boundary_ids.push(ps.id(i)); // on an edge, or duplicate of a boundary point
        } else {
            interior_ids.push(ps.id(i));
        }
    }
    boundary_ids.sort_unstable();
    interior_ids.sort_unstable();

    let faces0: Vec<Vec<u64>> = {
        let mut v: Vec<Vec<u64>> = vertex_ids.iter().map(|&id| vec![id]).collect();
        v.sort();
        v
    };
    let n = verts.len();
    let mut faces1 = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for k in 0..n {
        let a = verts[k];
        let b = verts[(k + 1) % n];
        let mut f = vec![ps.id(a as usize), ps.id(b as usize)];
        f.sort_unstable();
        faces1.push(f);
        let pa = pt(coords, a);
        let pb = pt(coords, b);
        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
        let len = (dx * dx + dy * dy).sqrt();
        normals.push(vec![dy / len, -dx / len]);
    }
    let volume = polygon_area(coords, &verts);
    vertex_ids.sort_unstable();
    Ok(HullOutput {
        complex: HullComplex {
            dim: 2,
            vertex_ids,
            faces: vec![faces0, faces1],
            facet_normals: normals,
            volume,
            simple_position: true,
        },
        boundary_ids,
        interior_ids,
    })
}

#[inline]
fn flat(ps: &PointSet) -> &[f64] {
    ps.flat_coords()
}

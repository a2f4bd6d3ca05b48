//! Iterated convex hull peeling: layer labels, per-layer face counts and
//! defect volumes.
//!
//! A point belongs to layer n when it lies on the boundary of the n-th
//! hull — vertex or not — so collinear edge points leave with their layer.
//! When the remainder goes affinely flat, peeling continues inside the
//! affine span and labels keep counting; those trailing ids are reported
//! separately because flat layers carry no full-dimensional hull.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{self, GeomError, HullComplex, PointSet};
use crate::geom::hull2d;
use crate::polytope::HPolytope;

#[derive(Debug, Error)]
pub enum PeelError {
    #[error("layer {0} not present (only {1} full-dimensional layers)")]
    LayerMissing(usize, usize),
}

#[derive(Clone, Debug)]
pub struct PeelingResult {
    /// full-dimensional layer hulls, outermost first
    pub layers: Vec<HullComplex>,
    /// layer number (1-based) per input id; covers every id unless the
    /// peel was truncated by max_layers
    pub label: HashMap<u64, u32>,
    /// ids labeled during the trailing lower-dimensional phase
    pub leftover: Vec<u64>,
    /// true when max_layers stopped the peel before exhaustion
    pub truncated: bool,
}

impl PeelingResult {
    /// Total number of layers assigned, including degenerate trailing ones.
    pub fn total_layers(&self) -> u32 {
        self.label.values().copied().max().unwrap_or(0)
    }
}

/// Face counts and volume defect of one layer.
#[derive(Clone, Debug, Serialize)]
pub struct LayerStats {
    pub n: usize,
    /// (N_{n,0}, ..., N_{n,d-1})
    pub f: Vec<usize>,
    /// Vol_d(K) - Vol_d(conv_n)
    pub defect_volume: f64,
}

pub fn peel(ps: &PointSet, max_layers: Option<usize>) -> PeelingResult {
    if ps.dim() == 2 {
        peel2d(ps, max_layers)
    } else {
        peel_general(ps, max_layers)
    }
}

/// Planar fast path: one lexicographic sort up front, then each layer is a
/// linear monotone-chain pass over the surviving points.
fn peel2d(ps: &PointSet, max_layers: Option<usize>) -> PeelingResult {
    let mut label: HashMap<u64, u32> = HashMap::with_capacity(ps.len());
    let mut layers = Vec::new();
    let mut leftover = Vec::new();
    let mut truncated = false;
    if ps.is_empty() {
        return PeelingResult { layers, label, leftover, truncated };
    }
    let coords = ps.flat_coords();
    let (unique, rep_of) = hull2d::dedup_sorted(ps);
    let mut alive: Vec<u32> = unique;
    let mut layer_of_rep: HashMap<u32, u32> = HashMap::new();
    let mut next_layer: u32 = 1;
    let cap = max_layers.unwrap_or(usize::MAX).max(1) as u32;

    while !alive.is_empty() {
        if next_layer > cap {
            truncated = true;
            break;
        }
        let lay = hull2d::layer2d(coords, &alive);
        let mut removed: Vec<u32> = lay.vertices.clone();
        removed.extend_from_slice(&lay.on_edges);
        for &i in &removed {
            layer_of_rep.insert(i, next_layer);
        }
        if !lay.degenerate {
            layers.push(layer_complex_2d(ps, coords, &lay.vertices));
        } else {
            leftover.extend(removed.iter().map(|&i| ps.id(i as usize)));
        }
        let removed_set: std::collections::HashSet<u32> = removed.into_iter().collect();
        alive.retain(|i| !removed_set.contains(i));
        next_layer += 1;
    }

    for i in 0..ps.len() {
        let rep = rep_of[i];
        if let Some(&l) = layer_of_rep.get(&rep) {
            label.insert(ps.id(i), l);
            if rep as usize != i && leftover.contains(&ps.id(rep as usize)) {
                leftover.push(ps.id(i));
            }
        }
    }
    leftover.sort_unstable();
    leftover.dedup();
    PeelingResult { layers, label, leftover, truncated }
}

fn layer_complex_2d(ps: &PointSet, coords: &[f64], ccw: &[u32]) -> HullComplex {
    let n = ccw.len();
    let mut vertex_ids: Vec<u64> = ccw.iter().map(|&i| ps.id(i as usize)).collect();
    let faces0: Vec<Vec<u64>> = {
        let mut v: Vec<Vec<u64>> = vertex_ids.iter().map(|&id| vec![id]).collect();
        v.sort();
        v
    };
    let mut faces1 = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for k in 0..n {
        let a = ccw[k];
        let b = ccw[(k + 1) % n];
        let mut f = vec![ps.id(a as usize), ps.id(b as usize)];
        f.sort_unstable();
        faces1.push(f);
        let pa = &coords[a as usize * 2..a as usize * 2 + 2];
        let pb = &coords[b as usize * 2..b as usize * 2 + 2];
        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
        let len = (dx * dx + dy * dy).sqrt();
        normals.push(vec![dy / len, -dx / len]);
    }
    let volume = hull2d::polygon_area(coords, ccw);
    vertex_ids.sort_unstable();
    HullComplex {
        dim: 2,
        vertex_ids,
        faces: vec![faces0, faces1],
        facet_normals: normals,
        volume,
        simple_position: true,
    }
}

fn peel_general(ps: &PointSet, max_layers: Option<usize>) -> PeelingResult {
    let mut label: HashMap<u64, u32> = HashMap::with_capacity(ps.len());
    let mut layers = Vec::new();
    let mut leftover = Vec::new();
    let mut truncated = false;
    let mut alive: Vec<usize> = (0..ps.len()).collect();
    let mut next_layer: u32 = 1;
    let cap = max_layers.unwrap_or(usize::MAX).max(1) as u32;
    let mut degenerate_phase = false;

    while !alive.is_empty() {
        if next_layer > cap {
            truncated = true;
            break;
        }
        let sub = ps.subset(&alive);
        let removed_ids: Vec<u64> = if !degenerate_phase {
            match geom::convex_hull_full(&sub) {
                Ok(out) => {
                    let mut ids = out.complex.vertex_ids.clone();
                    ids.extend_from_slice(&out.boundary_ids);
                    layers.push(out.complex);
                    ids
                }
                Err(GeomError::DegenerateInput { .. }) => {
                    degenerate_phase = true;
                    continue;
                }
                Err(_) => break, // empty cannot happen: alive nonempty
            }
        } else {
            let (verts, boundary) = match geom::hull_boundary(&sub) {
                Ok(vb) => vb,
                Err(_) => break,
            };
            let mut ids = verts;
            ids.extend_from_slice(&boundary);
            leftover.extend_from_slice(&ids);
            ids
        };
        for &id in &removed_ids {
            label.insert(id, next_layer);
        }
        let removed: std::collections::HashSet<u64> = removed_ids.into_iter().collect();
        alive.retain(|&i| !removed.contains(&ps.id(i)));
        next_layer += 1;
    }
    leftover.sort_unstable();
    PeelingResult { layers, label, leftover, truncated }
}

/// Layer number of x within the peeling of ps with x added.
pub fn layer_label(ps: &PointSet, x: &[f64]) -> u32 {
    let fresh = ps.ids().iter().copied().max().map_or(0, |m| m + 1);
    let mut aug = ps.clone();
    aug.push(fresh, x);
    let pr = peel(&aug, None);
    pr.label[&fresh]
}

pub fn layer_stats(pr: &PeelingResult, k: &HPolytope, n: usize) -> Result<LayerStats, PeelError> {
    if n == 0 || n > pr.layers.len() {
        return Err(PeelError::LayerMissing(n, pr.layers.len()));
    }
    let h = &pr.layers[n - 1];
    Ok(LayerStats {
        n,
        f: h.f_vector(),
        defect_volume: (k.volume() - h.volume).max(0.0),
    })
}

pub fn total_layers(ps: &PointSet) -> u32 {
    peel(ps, None).total_layers()
}

/// CSV rows: id, layer.
pub fn labels_to_csv(pr: &PeelingResult) -> String {
    let mut rows: Vec<(u64, u32)> = pr.label.iter().map(|(&id, &l)| (id, l)).collect();
    rows.sort_unstable();
    let mut out = String::from("id,layer\n");
    for (id, l) in rows {
        out.push_str(&format!("{id},{l}\n"));
    }
    out
}

#[derive(Serialize)]
struct LayerJson {
    n: usize,
    f: Vec<usize>,
    volume: f64,
}

#[derive(Serialize)]
struct PeelJson {
    layers: Vec<LayerJson>,
    total_layers: u32,
    leftover: Vec<u64>,
    truncated: bool,
}

/// JSON summary: per-layer face counts and volumes.
pub fn to_json(pr: &PeelingResult) -> String {
    let doc = PeelJson {
        layers: pr
            .layers
            .iter()
            .enumerate()
            .map(|(i, h)| LayerJson { n: i + 1, f: h.f_vector(), volume: h.volume })
            .collect(),
        total_layers: pr.total_layers(),
        leftover: pr.leftover.clone(),
        truncated: pr.truncated,
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::PointSet;

    fn ps2(rows: &[[f64; 2]]) -> PointSet {
        PointSet::from_coords(2, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn triangle_single_layer() {
        let p = ps2(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let pr = peel(&p, None);
        assert_eq!(pr.total_layers(), 1);
        assert!(pr.label.values().all(|&l| l == 1));
        // three points are a degenerate-size layer only if collinear; here
        // they form a proper triangle
        assert_eq!(pr.layers.len(), 1);
    }

    #[test]
    fn nested_squares_two_layers() {
        let p = ps2(&[
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.25, 0.25],
            [0.75, 0.25],
            [0.75, 0.75],
            [0.25, 0.75],
        ]);
        let pr = peel(&p, None);
        assert_eq!(pr.total_layers(), 2);
        for id in 0..4 {
            assert_eq!(pr.label[&id], 1);
        }
        for id in 4..8 {
            assert_eq!(pr.label[&id], 2);
        }
        assert!(pr.layers[1].volume < pr.layers[0].volume);
    }

    #[test]
    fn edge_point_removed_with_its_layer() {
        let p = ps2(&[
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.0], // on the outer boundary
            [0.5, 0.5], // interior
        ]);
        let pr = peel(&p, None);
        assert_eq!(pr.label[&4], 1);
        assert_eq!(pr.label[&5], 2);
    }

    #[test]
    fn collinear_trailing_layers() {
        // square, then three collinear points inside
        let p = ps2(&[
            [0.0, 0.0],
            [10.0, 0.0],
            [10.0, 10.0],
            [0.0, 10.0],
            [2.0, 5.0],
            [5.0, 5.0],
            [8.0, 5.0],
        ]);
        let pr = peel(&p, None);
        assert_eq!(pr.label[&4], 2);
        assert_eq!(pr.label[&6], 2);
        assert_eq!(pr.label[&5], 3); // midpoint peels one layer later
        assert_eq!(pr.layers.len(), 1);
        assert_eq!(pr.leftover, vec![4, 5, 6]);
    }

    #[test]
    fn max_layers_truncates() {
        let p = ps2(&[
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.25, 0.25],
            [0.75, 0.25],
            [0.75, 0.75],
            [0.25, 0.75],
        ]);
        let pr = peel(&p, Some(1));
        assert!(pr.truncated);
        assert_eq!(pr.layers.len(), 1);
        assert_eq!(pr.label.len(), 4);
    }

    #[test]
    fn labels_partition_input() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(23);
        for d in [2usize, 3] {
            let rows: Vec<Vec<f64>> =
                (0..80).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
            let p = PointSet::from_coords(d, &rows);
            let pr = peel(&p, None);
            assert_eq!(pr.label.len(), p.len());
            // nesting of volumes
            for w in pr.layers.windows(2) {
                assert!(w[1].volume <= w[0].volume + 1e-12);
            }
        }
    }

    #[test]
    fn duplicates_inherit_representative_layer() {
        let p = {
            let mut q = ps2(&[
                [0.0, 0.0],
                [1.0, 0.0],
                [1.0, 1.0],
                [0.0, 1.0],
            ]);
            q.push(9, &[0.0, 0.0]); // duplicate of a layer-1 vertex
            q
        };
        let pr = peel(&p, None);
        assert_eq!(pr.label[&9], 1);
    }

    #[test]
    fn layer_label_outside_is_one() {
        let p = ps2(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]);
        assert_eq!(layer_label(&p, &[5.0, 5.0]), 1);
        assert_eq!(layer_label(&p, &[0.5, 0.4]), 2);
    }

    #[test]
    fn csv_and_json_export() {
        let p = ps2(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]);
        let pr = peel(&p, None);
        let csv = labels_to_csv(&pr);
        assert!(csv.starts_with("id,layer\n0,1\n"));
        let json = to_json(&pr);
        assert!(json.contains("\"total_layers\": 2"));
    }
}

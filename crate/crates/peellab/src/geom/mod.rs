//! Robust d-dimensional convex hulls with face lattice and volume.

pub mod hull2d;
pub mod hulld;
pub mod lattice;
pub mod predicates;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use predicates::Sign;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("input does not affinely span R^{dim}: affine dimension {affine_dim}")]
    DegenerateInput { dim: usize, affine_dim: usize },
    #[error("empty point set")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A labeled point in R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub id: u64,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(id: u64, coords: Vec<f64>) -> Self {
        assert!(coords.iter().all(|c| c.is_finite()), "non-finite coordinate");
        Point { id, coords }
    }
}

/// A finite labeled point configuration. Coordinates are stored flat
/// (row-major, stride = dim) so hulls over large inputs stay cache friendly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    ids: Vec<u64>,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        PointSet { dim, ids: Vec::new(), coords: Vec::new() }
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = Point>) -> Self {
        let mut ps = PointSet::new(dim);
        for p in points {
            ps.push(p.id, &p.coords);
        }
        ps
    }

    /// Points with ids assigned 0..n in order.
    pub fn from_coords(dim: usize, rows: &[Vec<f64>]) -> Self {
        let mut ps = PointSet::new(dim);
        for (i, row) in rows.iter().enumerate() {
            ps.push(i as u64, row);
        }
        ps
    }

    pub fn push(&mut self, id: u64, coords: &[f64]) {
        assert_eq!(coords.len(), self.dim, "dimension mismatch");
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        self.ids.push(id);
        self.coords.extend_from_slice(coords);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: usize) -> u64 {
        self.ids[i]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major flat coordinate storage (stride = dim).
    pub fn flat_coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> Point {
        Point { id: self.ids[i], coords: self.coords(i).to_vec() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &[f64])> + '_ {
        self.ids.iter().enumerate().map(|(i, &id)| (id, self.coords(i)))
    }

    /// Subset by positional indices, keeping ids.
    pub fn subset(&self, idx: &[usize]) -> PointSet {
        let mut ps = PointSet::new(self.dim);
        for &i in idx {
            ps.push(self.ids[i], self.coords(i));
        }
        ps
    }

    pub fn position_of_id(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }
}

/// Convex hull with full face lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HullComplex {
    pub dim: usize,
    /// ids of the hull vertices (0-faces), sorted
    pub vertex_ids: Vec<u64>,
    /// faces[k] lists the k-faces for 0 <= k <= dim-1, each a sorted id set
    pub faces: Vec<Vec<Vec<u64>>>,
    /// outward unit normals, parallel to faces[dim-1] entries
    pub facet_normals: Vec<Vec<f64>>,
    pub volume: f64,
    /// every vertex on >= d facets
    pub simple_position: bool,
}

impl HullComplex {
    pub fn f(&self, k: usize) -> usize {
        self.faces.get(k).map_or(0, |v| v.len())
    }

    pub fn f_vector(&self) -> Vec<usize> {
        (0..self.dim).map(|k| self.f(k)).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut chi = 0i64;
        for k in 0..self.dim {
            let c = self.f(k) as i64;
            if k % 2 == 0 {
                chi += c;
            } else {
                chi -= c;
            }
        }
        chi
    }
}

/// Full hull output: the complex plus input points that lie on the hull
/// boundary without being vertices (collinear/coplanar with a face).
#[derive(Clone, Debug)]
pub struct HullOutput {
    pub complex: HullComplex,
    /// ids on the boundary but not vertices
    pub boundary_ids: Vec<u64>,
    /// ids strictly inside
    pub interior_ids: Vec<u64>,
}

/// Exact vertex set of conv(ps); degenerate inputs fall back to the hull
/// inside their affine span.
pub fn extreme_points(ps: &PointSet) -> Result<Vec<u64>, GeomError> {
    Ok(hull_boundary(ps)?.0)
}

/// (vertex ids, boundary non-vertex ids) of conv(ps), handling degenerate
/// inputs by recursing in the affine span. Duplicates keep the lowest id.
pub fn hull_boundary(ps: &PointSet) -> Result<(Vec<u64>, Vec<u64>), GeomError> {
    if ps.is_empty() {
        return Err(GeomError::EmptyInput);
    }
    match convex_hull_full(ps) {
        Ok(out) => Ok((out.complex.vertex_ids, out.boundary_ids)),
        Err(GeomError::DegenerateInput { .. }) => hulld::degenerate_hull_boundary(ps),
        Err(e) => Err(e),
    }
}

/// Convex hull of a full-dimensional point set.
pub fn convex_hull(ps: &PointSet) -> Result<HullComplex, GeomError> {
    convex_hull_full(ps).map(|o| o.complex)
}

pub fn convex_hull_full(ps: &PointSet) -> Result<HullOutput, GeomError> {
    if ps.is_empty() {
        return Err(GeomError::EmptyInput);
    }
    if ps.dim() == 2 {
        hull2d::convex_hull_2d(ps)
    } else {
        hulld::convex_hull_nd(ps)
    }
}

pub fn hull_volume(h: &HullComplex) -> f64 {
    h.volume
}

//! Container polytopes in H-representation: vertex enumeration, simplicity,
//! volume-preserving corner frames and tower counting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, HullComplex, PointSet};
use crate::linprog::{self, LpOutcome};

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope has empty interior")]
    Empty,
    #[error("vertex {0} lies on more than {1} facets: polytope is not simple")]
    NotSimple(usize, usize),
    #[error("invalid polytope input: {0}")]
    BadInput(String),
}

const FEAS_TOL: f64 = 1e-9;

/// Bounded polytope { z : a_i . z <= b_i } with unit outward normals,
/// canonically ordered halfspaces, cached vertices and volume.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HPolytope {
    dim: usize,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    /// incident facet indices per vertex, sorted
    vertex_facets: Vec<Vec<usize>>,
    volume: f64,
    hull: HullComplex,
}

fn solve_dxd(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let d = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..d {
        let (piv, pv) = (col..d)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if pv < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..d {
                    m[r][c] -= f * m[col][c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    Some((0..d).map(|i| rhs[i] / m[i][i]).collect())
}

fn det_dense(a: &[Vec<f64>]) -> f64 {
    let d = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut det = 1.0;
    for col in 0..d {
        let (piv, pv) = (col..d)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pv == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..d {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..d {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    det
}

impl HPolytope {
    pub fn new(dim: usize, halfspaces: Vec<(Vec<f64>, f64)>) -> Result<Self, PolytopeError> {
        if dim < 2 {
            return Err(PolytopeError::BadInput("dimension must be >= 2".into()));
        }
        if halfspaces.len() <= dim {
            return Err(PolytopeError::Unbounded);
        }
        // normalize to unit normals
        let mut hs: Vec<(Vec<f64>, f64)> = Vec::with_capacity(halfspaces.len());
        for (a, b) in halfspaces {
            if a.len() != dim {
                return Err(PolytopeError::BadInput("normal length != dim".into()));
            }
            let nrm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm < 1e-14 {
                return Err(PolytopeError::BadInput("zero normal".into()));
            }
            hs.push((a.iter().map(|x| x / nrm).collect(), b / nrm));
        }
        // canonical order (lexicographic normals, then offset), drop exact repeats
        hs.sort_by(|x, y| {
            x.0.partial_cmp(&y.0).unwrap().then(x.1.partial_cmp(&y.1).unwrap())
        });
        hs.dedup_by(|x, y| {
            x.0.iter().zip(&y.0).all(|(a, b)| (a - b).abs() < 1e-12)
                && (x.1 - y.1).abs() < 1e-12
        });

        // unboundedness: a nonzero recession direction y with Ay <= 0 exists
        // iff max c.y over the recession cone is unbounded for some +-axis c
        for c in 0..dim {
            for s in [-1.0, 1.0] {
                // y = u - v, u,v >= 0
                let mut obj = vec![0.0; 2 * dim];
                obj[c] = s;
                obj[dim + c] = -s;
                let a_ub: Vec<Vec<f64>> = hs
                    .iter()
                    .map(|(a, _)| {
                        let mut row: Vec<f64> = a.clone();
                        row.extend(a.iter().map(|x| -x));
                        row
                    })
                    .collect();
                let b_ub = vec![0.0; hs.len()];
                if let LpOutcome::Unbounded = linprog::simplex(&obj, &[], &[], &a_ub, &b_ub) {
                    return Err(PolytopeError::Unbounded);
                }
            }
        }

        // vertex enumeration over d-subsets of facets
        let m = hs.len();
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        let mut subset = vec![0usize; dim];
        fn visit(
            hs: &[(Vec<f64>, f64)],
            dim: usize,
            m: usize,
            subset: &mut Vec<usize>,
            k: usize,
            start: usize,
            vertices: &mut Vec<Vec<f64>>,
        ) {
            if k == dim {
                let a: Vec<Vec<f64>> = subset.iter().map(|&i| hs[i].0.clone()).collect();
                let b: Vec<f64> = subset.iter().map(|&i| hs[i].1).collect();
                if let Some(x) = solve_dxd(&a, &b) {
                    let feasible = hs
                        .iter()
                        .all(|(ai, bi)| {
                            ai.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bi + FEAS_TOL
                        });
                    if feasible
                        && !vertices.iter().any(|v| {
                            v.iter()
                                .zip(&x)
                                .map(|(p, q)| (p - q) * (p - q))
                                .sum::<f64>()
                                .sqrt()
                                < 1e-8
                        })
                    {
                        vertices.push(x);
                    }
                }
                return;
            }
            for i in start..m {
                subset[k] = i;
                visit(hs, dim, m, subset, k + 1, i + 1, vertices);
            }
        }
        visit(&hs, dim, m, &mut subset, 0, 0, &mut vertices);
        if vertices.len() < dim + 1 {
            return Err(PolytopeError::Empty);
        }
        // deterministic vertex order
        vertices.sort_by(|x, y| x.partial_cmp(y).unwrap());

        let vertex_facets: Vec<Vec<usize>> = vertices
            .iter()
            .map(|v| {
                (0..m)
                    .filter(|&i| {
                        let s: f64 = hs[i].0.iter().zip(v).map(|(p, q)| p * q).sum();
                        (s - hs[i].1).abs() < FEAS_TOL
                    })
                    .collect()
            })
            .collect();

        // drop redundant halfspaces: a facet of a bounded d-polytope carries
        // at least d vertices
        let keep: Vec<usize> = (0..m)
            .filter(|&i| vertex_facets.iter().filter(|vf| vf.contains(&i)).count() >= dim)
            .collect();
        let normals: Vec<Vec<f64>> = keep.iter().map(|&i| hs[i].0.clone()).collect();
        let offsets: Vec<f64> = keep.iter().map(|&i| hs[i].1).collect();
        let reindex: Vec<Option<usize>> = {
            let mut r = vec![None; m];
            for (new, &old) in keep.iter().enumerate() {
                r[old] = Some(new);
            }
            r
        };
        let vertex_facets: Vec<Vec<usize>> = vertex_facets
            .iter()
            .map(|vf| vf.iter().filter_map(|&i| reindex[i]).collect())
            .collect();
        if vertex_facets.iter().any(|vf| vf.len() < dim) {
            return Err(PolytopeError::BadInput(
                "vertex on fewer than d facets after canonicalization".into(),
            ));
        }

        let ps = PointSet::from_coords(dim, &vertices);
        let hull = geom::convex_hull(&ps)
            .map_err(|e| PolytopeError::BadInput(format!("vertex hull failed: {e}")))?;
        let volume = hull.volume;
        if volume <= 0.0 {
            return Err(PolytopeError::Empty);
        }
        Ok(HPolytope { dim, normals, offsets, vertices, vertex_facets, volume, hull })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_facets(&self) -> usize {
        self.normals.len()
    }

    pub fn halfspaces(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.normals.iter().map(|n| n.as_slice()).zip(self.offsets.iter().copied())
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex_facets(&self) -> &[Vec<usize>] {
        &self.vertex_facets
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn hull(&self) -> &HullComplex {
        &self.hull
    }

    pub fn is_simple(&self) -> bool {
        self.vertex_facets.iter().all(|vf| vf.len() == self.dim)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(a, &b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() <= b)
    }

    /// Axis-aligned bounding box as (lower, upper).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for c in 0..self.dim {
                lo[c] = lo[c].min(v[c]);
                hi[c] = hi[c].max(v[c]);
            }
        }
        (lo, hi)
    }

    /// Uniform rescale about the origin by factor s.
    pub fn scaled(&self, s: f64) -> Result<HPolytope, PolytopeError> {
        assert!(s > 0.0);
        let hs: Vec<(Vec<f64>, f64)> = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, &b)| (a.clone(), b * s))
            .collect();
        HPolytope::new(self.dim, hs)
    }

    /// Number of towers: maximal chains F_0 c F_1 c ... c F_{d-1} in the
    /// face lattice, one face per dimension. Counted by dynamic programming
    /// over the lattice; for simple K this equals d! f_0.
    pub fn count_towers(&self) -> u64 {
        let faces = &self.hull.faces;
        let mut ways: Vec<u64> = vec![1; faces[0].len()];
        for k in 1..self.dim {
            let mut next = vec![0u64; faces[k].len()];
            for (j, f) in faces[k].iter().enumerate() {
                for (i, g) in faces[k - 1].iter().enumerate() {
                    if g.iter().all(|id| f.binary_search(id).is_ok()) {
                        next[j] += ways[i];
                    }
                }
            }
            ways = next;
        }
        ways.iter().sum()
    }

    /// Volume-preserving affine frame at vertex i: the vertex goes to 0,
    /// the d incident facets go into the coordinate hyperplanes, and the
    /// polytope interior goes into the positive orthant.
    pub fn corner_frame(&self, i: usize) -> Result<CornerFrame, PolytopeError> {
        let vf = &self.vertex_facets[i];
        if vf.len() != self.dim {
            return Err(PolytopeError::NotSimple(i, self.dim));
        }
        let d = self.dim;
        let a: Vec<Vec<f64>> = vf.iter().map(|&f| self.normals[f].clone()).collect();
        let det = det_dense(&a);
        if det.abs() < 1e-14 {
            return Err(PolytopeError::BadInput(format!(
                "degenerate facet normals at vertex {i}"
            )));
        }
        let c = det.abs().powf(-1.0 / d as f64);
        // rows of the forward matrix: -c a_f, so the interior maps to the
        // positive orthant and |det| = 1
        let matrix: Vec<Vec<f64>> =
            a.iter().map(|row| row.iter().map(|&x| -c * x).collect()).collect();
        // inverse by solving M X = I column by column
        let mut inverse = vec![vec![0.0; d]; d];
        for col in 0..d {
            let mut e = vec![0.0; d];
            e[col] = 1.0;
            let x = solve_dxd(&matrix, &e).ok_or_else(|| {
                PolytopeError::BadInput("corner frame not invertible".into())
            })?;
            for r in 0..d {
                inverse[r][col] = x[r];
            }
        }
        Ok(CornerFrame { vertex: self.vertices[i].clone(), matrix, inverse })
    }
}

/// Affine chart at a simple vertex: y = M (x - vertex), with M volume
/// preserving and the corner mapped onto the corner of the positive orthant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CornerFrame {
    pub vertex: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub inverse: Vec<Vec<f64>>,
}

impl CornerFrame {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(x).zip(&self.vertex).map(|((m, xi), vi)| m * (xi - vi)).sum())
            .collect()
    }

    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        self.inverse
            .iter()
            .zip(&self.vertex)
            .map(|(row, vi)| row.iter().zip(y).map(|(m, yi)| m * yi).sum::<f64>() + vi)
            .collect()
    }
}

/// [0, s]^d.
pub fn cube(dim: usize, s: f64) -> HPolytope {
    let mut hs = Vec::with_capacity(2 * dim);
    for c in 0..dim {
        let mut lo = vec![0.0; dim];
        lo[c] = -1.0;
        hs.push((lo, 0.0));
        let mut hi = vec![0.0; dim];
        hi[c] = 1.0;
        hs.push((hi, s));
    }
    HPolytope::new(dim, hs).expect("cube is a valid polytope")
}

/// s * conv{0, e_1, ..., e_d}.
pub fn simplex(dim: usize, s: f64) -> HPolytope {
    let mut hs = Vec::with_capacity(dim + 1);
    for c in 0..dim {
        let mut lo = vec![0.0; dim];
        lo[c] = -1.0;
        hs.push((lo, 0.0));
    }
    hs.push((vec![1.0; dim], s));
    HPolytope::new(dim, hs).expect("simplex is a valid polytope")
}

/// JSON polytope input: either explicit halfspaces or a named built-in.
#[derive(Deserialize)]
#[serde(untagged)]
enum PolytopeSpec {
    Builtin {
        builtin: String,
        dim: usize,
        #[serde(default)]
        scale: Option<f64>,
    },
    Explicit {
        dim: usize,
        halfspaces: Vec<(Vec<f64>, f64)>,
    },
}

pub fn from_json(text: &str) -> Result<HPolytope, PolytopeError> {
    let spec: PolytopeSpec =
        serde_json::from_str(text).map_err(|e| PolytopeError::BadInput(e.to_string()))?;
    match spec {
        PolytopeSpec::Builtin { builtin, dim, scale } => {
            let s = scale.unwrap_or(1.0);
            if s <= 0.0 {
                return Err(PolytopeError::BadInput("scale must be positive".into()));
            }
            match builtin.as_str() {
                "cube" => Ok(cube(dim, 1.0)),
                "scaled-cube" => Ok(cube(dim, s)),
                "simplex" => Ok(simplex(dim, s)),
                other => Err(PolytopeError::BadInput(format!("unknown builtin '{other}'"))),
            }
        }
        PolytopeSpec::Explicit { dim, halfspaces } => HPolytope::new(dim, halfspaces),
    }
}

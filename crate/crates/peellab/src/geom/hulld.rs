//! Incremental (beneath-beyond) convex hull in general dimension, with
//! conflict lists, coplanar facet merging and exact boundary handling.
//!
//! A point coplanar with a facet it is being tested against is treated as
//! visible during insertion, so degenerate facets are never created; the
//! resulting in-plane triangulations are merged back afterwards.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::lattice;
use super::predicates::{orient, rational_of, Sign};
use super::{GeomError, HullComplex, HullOutput, PointSet};

/// Above this input size, the final exact classification sweep is limited
/// to points that ever produced a coplanar test; random inputs never do.
const FULL_CLASSIFY_LIMIT: usize = 20_000;

struct Facet {
    /// d point indices, ordered so that orient(verts, interior) == Neg
    verts: Vec<u32>,
    /// neighbors[i] is the facet across the ridge opposite verts[i]
    neighbors: Vec<u32>,
    conflicts: Vec<u32>,
    alive: bool,
}

struct HullBuilder<'a> {
    ps: &'a PointSet,
    dim: usize,
    interior: Vec<f64>,
    facets: Vec<Facet>,
    processed: Vec<bool>,
    touched_boundary: Vec<bool>,
}

impl<'a> HullBuilder<'a> {
    fn coords(&self, i: u32) -> &'a [f64] {
        self.ps.coords(i as usize)
    }

    fn facet_sign(&self, f: &Facet, q: &[f64]) -> Sign {
        let simplex: Vec<&[f64]> = f.verts.iter().map(|&v| self.coords(v)).collect();
        orient(&simplex, q)
    }

    /// Numeric visibility value used only to pick the furthest conflict.
    fn facet_value(&self, f: &Facet, q: &[f64]) -> f64 {
        let d = self.dim;
        let s0 = self.coords(f.verts[0]);
        let mut m = vec![0.0; d * d];
        for (r, &v) in f.verts.iter().skip(1).enumerate() {
            let s = self.coords(v);
            for c in 0..d {
                m[r * d + c] = s[c] - s0[c];
            }
        }
        for c in 0..d {
            m[(d - 1) * d + c] = q[c] - s0[c];
        }
        det_f64(&m, d)
    }

    fn new_facet(&mut self, mut verts: Vec<u32>) -> u32 {
        let simplex: Vec<&[f64]> = verts.iter().map(|&v| self.coords(v)).collect();
        match orient(&simplex, &self.interior) {
            Sign::Neg => {}
            Sign::Pos => verts.swap(0, 1),
            Sign::Zero => unreachable!("degenerate facet creation"),
        }
        let d = self.dim;
        self.facets.push(Facet {
            verts,
            neighbors: vec![u32::MAX; d],
            conflicts: Vec::new(),
            alive: true,
        });
        (self.facets.len() - 1) as u32
    }

    fn assign_conflict(&mut self, fi: u32, p: u32) {
        let q = self.coords(p);
        match self.facet_sign(&self.facets[fi as usize], q) {
            Sign::Pos => self.facets[fi as usize].conflicts.push(p),
            Sign::Zero => self.touched_boundary[p as usize] = true,
            Sign::Neg => {}
        }
    }

    /// Insert point p, starting the visibility search from facet start.
    fn insert(&mut self, p: u32, start: u32) {
        let q = self.coords(p).to_vec();
        // BFS over the region visible from p; coplanar counts as visible
        let mut visible: Vec<u32> = vec![start];
        let mut seen: HashMap<u32, ()> = HashMap::new();
        seen.insert(start, ());
        let mut stack = vec![start];
        while let Some(fi) = stack.pop() {
            let nbrs = self.facets[fi as usize].neighbors.clone();
            for nb in nbrs {
                if nb == u32::MAX || seen.contains_key(&nb) {
                    continue;
                }
                seen.insert(nb, ());
                let s = self.facet_sign(&self.facets[nb as usize], &q);
                if s != Sign::Neg {
                    visible.push(nb);
                    stack.push(nb);
                }
            }
        }
        let is_visible = |fi: u32, vis: &[u32]| vis.contains(&fi);

        // horizon ridges: (visible facet, local index of vertex opposite
        // the invisible neighbor)
        let mut new_facets: Vec<u32> = Vec::new();
        let mut ridge_map: HashMap<Vec<u32>, (u32, usize)> = HashMap::new();
        for &fv in &visible {
            let nbrs = self.facets[fv as usize].neighbors.clone();
            for (opp, &fn_) in nbrs.iter().enumerate() {
                if fn_ == u32::MAX || is_visible(fn_, &visible) {
                    continue;
                }
                // ridge = verts(fv) minus verts(fv)[opp]
                let fv_verts = self.facets[fv as usize].verts.clone();
                let mut ridge: Vec<u32> = fv_verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != opp)
                    .map(|(_, &v)| v)
                    .collect();
                ridge.push(p);
                let nf = self.new_facet(ridge);
                new_facets.push(nf);

                // neighbor opposite p is the surviving facet fn_
                let p_pos = self.facets[nf as usize].verts.iter().position(|&v| v == p).unwrap();
                self.facets[nf as usize].neighbors[p_pos] = fn_;
                // fix fn_'s pointer from fv to nf
                let fn_f = &mut self.facets[fn_ as usize];
                for nb in fn_f.neighbors.iter_mut() {
                    if *nb == fv {
                        *nb = nf;
                    }
                }
                // stitch new facets to each other via sub-ridges containing p
                let nf_verts = self.facets[nf as usize].verts.clone();
                for (i, &v) in nf_verts.iter().enumerate() {
                    if v == p {
                        continue;
                    }
                    let mut key: Vec<u32> =
                        nf_verts.iter().filter(|&&x| x != v).copied().collect();
                    key.sort_unstable();
                    match ridge_map.remove(&key) {
                        Some((other, other_pos)) => {
                            self.facets[nf as usize].neighbors[i] = other;
                            self.facets[other as usize].neighbors[other_pos] = nf;
                        }
                        None => {
                            ridge_map.insert(key, (nf, i));
                        }
                    }
                }

                // redistribute conflicts of the generating pair
                let mut cands = self.facets[fv as usize].conflicts.clone();
                cands.extend_from_slice(&self.facets[fn_ as usize].conflicts);
                cands.sort_unstable();
                cands.dedup();
                for c in cands {
                    if c == p || self.processed[c as usize] {
                        continue;
                    }
                    self.assign_conflict(nf, c);
                }
            }
        }
        debug_assert!(!new_facets.is_empty(), "no horizon found");
        for &fv in &visible {
            self.facets[fv as usize].alive = false;
            self.facets[fv as usize].conflicts = Vec::new();
        }
        self.processed[p as usize] = true;
    }

    fn run(&mut self, pending: &[u32]) {
        // initial conflict assignment
        for &p in pending {
            if self.processed[p as usize] {
                continue;
            }
            for fi in 0..self.facets.len() as u32 {
                if !self.facets[fi as usize].alive {
                    continue;
                }
                let q = self.coords(p);
                if self.facet_sign(&self.facets[fi as usize], q) == Sign::Pos {
                    self.facets[fi as usize].conflicts.push(p);
                    break;
                } else if self.facet_sign(&self.facets[fi as usize], q) == Sign::Zero {
                    self.touched_boundary[p as usize] = true;
                }
            }
        }
        loop {
            // facet with a live conflict
            let mut chosen: Option<(u32, u32)> = None;
            'outer: for fi in 0..self.facets.len() as u32 {
                let f = &self.facets[fi as usize];
                if !f.alive || f.conflicts.is_empty() {
                    continue;
                }
                let mut best: Option<(u32, f64)> = None;
                for &c in &f.conflicts {
                    if self.processed[c as usize] {
                        continue;
                    }
                    // lazily drop stale entries whose sign is no longer Pos
                    let val = self.facet_value(f, self.coords(c));
                    if self.facet_sign(f, self.coords(c)) != Sign::Pos {
                        continue;
                    }
                    if best.map_or(true, |(_, bv)| val > bv) {
                        best = Some((c, val));
                    }
                }
                match best {
                    Some((c, _)) => {
                        chosen = Some((fi, c));
                        break 'outer;
                    }
                    None => {
                        // all stale
                        let fi_us = fi as usize;
                        self.facets[fi_us].conflicts.clear();
                    }
                }
            }
            match chosen {
                Some((fi, p)) => self.insert(p, fi),
                None => break,
            }
        }
    }
}

fn det_f64(m: &[f64], n: usize) -> f64 {
    match n {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            let mut det = 0.0;
            let mut minor = vec![0.0; (n - 1) * (n - 1)];
            for col in 0..n {
                let mut idx = 0;
                for r in 1..n {
                    for c in 0..n {
                        if c != col {
                            minor[idx] = m[r * n + c];
                            idx += 1;
                        }
                    }
                }
                let sub = det_f64(&minor, n - 1);
                if col % 2 == 0 {
                    det += m[col] * sub;
                } else {
                    det -= m[col] * sub;
                }
            }
            det
        }
    }
}

/// Deduplicate by exact coordinates in any dimension.
/// Returns (unique representative indices, representative of each index).
pub fn dedup(ps: &PointSet) -> (Vec<u32>, Vec<u32>) {
    let n = ps.len();
    let mut idx: Vec<u32> = (0..n as u32).collect();
    idx.sort_unstable_by(|&a, &b| {
        let pa = ps.coords(a as usize);
        let pb = ps.coords(b as usize);
        pa.partial_cmp(pb)
            .unwrap()
            .then(ps.id(a as usize).cmp(&ps.id(b as usize)))
    });
    let mut unique = Vec::new();
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

/// Exact affine rank bookkeeping: reduced rational rows of difference
/// vectors, with pivot columns recorded.
struct ExactSpan {
    rows: Vec<Vec<BigRational>>,
    pivots: Vec<usize>,
    dim: usize,
}

impl ExactSpan {
    fn new(dim: usize) -> Self {
        ExactSpan { rows: Vec::new(), pivots: Vec::new(), dim }
    }

    /// Try to add vector v (exact from f64 differences); returns true if
    /// the rank increased.
    fn try_add(&mut self, v: &[f64]) -> bool {
        let mut row: Vec<BigRational> = v.iter().map(|&x| rational_of(x)).collect();
        for (r, &pc) in self.rows.iter().zip(self.pivots.iter()) {
            if !row[pc].is_zero() {
                let factor = &row[pc] / &r[pc];
                for c in 0..self.dim {
                    let t = &factor * &r[c];
                    row[c] -= t;
                }
            }
        }
        match (0..self.dim).find(|&c| !row[c].is_zero()) {
            Some(pc) => {
                self.pivots.push(pc);
                self.rows.push(row);
                true
            }
            None => false,
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Greedy affine basis: indices of rank+1 points spanning the affine hull.
/// A float screen keeps the exact arithmetic off the hot path.
pub fn affine_basis(ps: &PointSet, unique: &[u32]) -> (Vec<u32>, ExactSpanInfo) {
    let d = ps.dim();
    let base = unique[0];
    let b = ps.coords(base as usize);
    let mut chosen = vec![base];
    let mut span = ExactSpan::new(d);
    // float Gram-Schmidt basis of accepted difference vectors
    let mut q: Vec<Vec<f64>> = Vec::new();
    let screen = |v: &[f64], q: &Vec<Vec<f64>>| -> bool {
        let mut r: Vec<f64> = v.to_vec();
        for u in q {
            let dot: f64 = r.iter().zip(u).map(|(a, b)| a * b).sum();
            for (ri, ui) in r.iter_mut().zip(u) {
                *ri -= dot * ui;
            }
        }
        let n2: f64 = r.iter().map(|x| x * x).sum();
        let v2: f64 = v.iter().map(|x| x * x).sum();
        n2 > v2 * 1e-20
    };
    let pass = |exact_only: bool,
                    chosen: &mut Vec<u32>,
                    span: &mut ExactSpan,
                    q: &mut Vec<Vec<f64>>| {
        for &i in unique {
            if chosen.len() == d + 1 {
                break;
            }
            if chosen.contains(&i) {
                continue;
            }
            let p = ps.coords(i as usize);
            let v: Vec<f64> = p.iter().zip(b).map(|(a, c)| a - c).collect();
            if !exact_only && !screen(&v, q) {
                continue;
            }
            if span.try_add(&v) {
                chosen.push(i);
                // re-orthonormalize
                let mut r = v.clone();
                for u in q.iter() {
                    let dot: f64 = r.iter().zip(u).map(|(a, b)| a * b).sum();
                    for (ri, ui) in r.iter_mut().zip(u) {
                        *ri -= dot * ui;
                    }
                }
                let nrm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                if nrm > 0.0 {
                    for x in r.iter_mut() {
                        *x /= nrm;
                    }
                    q.push(r);
                }
            }
        }
    };
    pass(false, &mut chosen, &mut span, &mut q);
    if chosen.len() < d + 1 && unique.len() <= 4096 {
        // the float screen may have skipped a rank-increasing point;
        // small inputs get a fully exact sweep
        pass(true, &mut chosen, &mut span, &mut q);
    }
    let info = ExactSpanInfo { pivots: span.pivots.clone(), rank: span.rank() };
    (chosen, info)
}

pub struct ExactSpanInfo {
    /// pivot coordinate per accepted difference vector
    pub pivots: Vec<usize>,
    pub rank: usize,
}

pub fn convex_hull_nd(ps: &PointSet) -> Result<HullOutput, GeomError> {
    let d = ps.dim();
    if ps.is_empty() {
        return Err(GeomError::EmptyInput);
    }
    let (unique, rep_of) = dedup(ps);
    let (simplex, info) = affine_basis(ps, &unique);
    if simplex.len() < d + 1 {
        return Err(GeomError::DegenerateInput { dim: d, affine_dim: info.rank });
    }

    let mut interior = vec![0.0; d];
    for &i in &simplex {
        for (c, x) in ps.coords(i as usize).iter().enumerate() {
            interior[c] += x;
        }
    }
    for x in interior.iter_mut() {
        *x /= (d + 1) as f64;
    }
    // the rounded centroid must be strictly inside the simplex; nudge it
    // toward an omitted vertex if rounding put it on a facet hyperplane
    for attempt in 0..16 {
        let ok = (0..=d).all(|omit| {
            let verts: Vec<&[f64]> = simplex
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != omit)
                .map(|(_, &v)| ps.coords(v as usize))
                .collect();
            orient(&verts, &interior) != Sign::Zero
        });
        if ok {
            break;
        }
        assert!(attempt < 15, "could not find interior reference point");
        let v = ps.coords(simplex[attempt % (d + 1)] as usize);
        for c in 0..d {
            interior[c] = 0.5 * (interior[c] + v[c]);
        }
    }

    let mut builder = HullBuilder {
        ps,
        dim: d,
        interior,
        facets: Vec::new(),
        processed: vec![false; ps.len()],
        touched_boundary: vec![false; ps.len()],
    };
    for &i in &simplex {
        builder.processed[i as usize] = true;
    }
    // also mark duplicates of anything as unprocessable; they are classified
    // through their representative at the end
    let unique_mask: Vec<bool> = {
        let mut m = vec![false; ps.len()];
        for &u in &unique {
            m[u as usize] = true;
        }
        m
    };
    for i in 0..ps.len() {
        if !unique_mask[i] {
            builder.processed[i] = true;
        }
    }

    // initial simplex facets
    for omit in 0..=d {
        let verts: Vec<u32> = simplex
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != omit)
            .map(|(_, &v)| v)
            .collect();
        builder.new_facet(verts);
    }
    // simplex facet adjacency: facet omitting i and facet omitting j share
    // the ridge omitting both
    for fi in 0..=d {
        for fj in 0..=d {
            if fi == fj {
                continue;
            }
            // neighbor of facet fi across the ridge opposite vertex simplex[fj]
            let vj = simplex[fj];
            let pos = builder.facets[fi].verts.iter().position(|&v| v == vj).unwrap();
            builder.facets[fi].neighbors[pos] = fj as u32;
        }
    }

    let pending: Vec<u32> = unique
        .iter()
        .copied()
        .filter(|&i| !builder.processed[i as usize])
        .collect();
    builder.run(&pending);

    // safety net for degenerate inputs: verify no unprocessed point is left
    // strictly outside; reprocess if the redistribution missed one
    if ps.len() <= FULL_CLASSIFY_LIMIT {
        for _round in 0..ps.len() {
            let mut missed = None;
            'scan: for &i in &unique {
                if builder.processed[i as usize] {
                    continue;
                }
                let q = builder.coords(i);
                for fi in 0..builder.facets.len() as u32 {
                    if !builder.facets[fi as usize].alive {
                        continue;
                    }
                    if builder.facet_sign(&builder.facets[fi as usize], q) == Sign::Pos {
                        missed = Some((i, fi));
                        break 'scan;
                    }
                }
            }
            match missed {
                Some((p, fi)) => builder.insert(p, fi),
                None => break,
            }
        }
    }

    assemble(ps, builder, &unique, &rep_of)
}

fn assemble(
    ps: &PointSet,
    builder: HullBuilder,
    unique: &[u32],
    rep_of: &[u32],
) -> Result<HullOutput, GeomError> {
    let d = builder.dim;
    let live: Vec<u32> = (0..builder.facets.len() as u32)
        .filter(|&i| builder.facets[i as usize].alive)
        .collect();

    // volume: fan from the interior reference over simplicial facets
    let mut volume = 0.0;
    for &fi in &live {
        let f = &builder.facets[fi as usize];
        let mut m = vec![0.0; d * d];
        for (r, &v) in f.verts.iter().enumerate() {
            let s = builder.coords(v);
            for c in 0..d {
                m[r * d + c] = s[c] - builder.interior[c];
            }
        }
        volume += det_f64(&m, d).abs();
    }
    let mut fact = 1.0;
    for k in 2..=d {
        fact *= k as f64;
    }
    volume /= fact;

    // merge coplanar adjacent facets (exact test) with union-find
    let mut parent: HashMap<u32, u32> = live.iter().map(|&f| (f, f)).collect();
    fn find(parent: &mut HashMap<u32, u32>, x: u32) -> u32 {
        let p = parent[&x];
        if p == x {
            x
        } else {
            let r = find(parent, p);
            parent.insert(x, r);
            r
        }
    }
    for &fi in &live {
        let f = &builder.facets[fi as usize];
        for (opp, &nb) in f.neighbors.iter().enumerate() {
            if nb == u32::MAX || nb < fi {
                continue;
            }
            let opposite_vertex = builder.facets[nb as usize]
                .verts
                .iter()
                .copied()
                .find(|v| !f.verts.contains(v))
                .unwrap_or(f.verts[opp]);
            if builder.facet_sign(f, builder.coords(opposite_vertex)) == Sign::Zero {
                let ra = find(&mut parent, fi);
                let rb = find(&mut parent, nb);
                if ra != rb {
                    parent.insert(ra, rb);
                }
            }
        }
    }
    let mut groups: HashMap<u32, Vec<u32>> = HashMap::new();
    for &fi in &live {
        groups.entry(find(&mut parent, fi)).or_default().push(fi);
    }

    // merged facets: vertex unions, then true vertices by recursing inside
    // the facet hyperplane (projection onto d-1 coordinates, exact)
    let mut merged: Vec<MergedFacet> = Vec::new();
    for (_rep, members) in groups.iter() {
        let mut vert_union: Vec<u32> = members
            .iter()
            .flat_map(|&fi| builder.facets[fi as usize].verts.iter().copied())
            .collect();
        vert_union.sort_unstable();
        vert_union.dedup();
        let rep_facet = members[0];
        let normal = facet_normal(&builder, rep_facet);
        let true_verts = facet_extremes(ps, &vert_union, &normal, d)?;
        merged.push(MergedFacet { rep_facet, normal, vertices: true_verts });
    }
    // deterministic facet order: lexicographic by sorted vertex ids
    let mut order: Vec<usize> = (0..merged.len()).collect();
    let id_key = |m: &MergedFacet| -> Vec<u64> {
        let mut k: Vec<u64> = m.vertices.iter().map(|&v| ps.id(v as usize)).collect();
        k.sort_unstable();
        k
    };
    order.sort_by_key(|&i| id_key(&merged[i]));
    let merged: Vec<MergedFacet> = order.into_iter().map(|i| merged[i].clone()).collect();

    let mut vertex_idx: Vec<u32> = merged.iter().flat_map(|m| m.vertices.iter().copied()).collect();
    vertex_idx.sort_unstable();
    vertex_idx.dedup();
    let mut vertex_ids: Vec<u64> = vertex_idx.iter().map(|&v| ps.id(v as usize)).collect();
    vertex_ids.sort_unstable();

    // classification of the remaining points
    let mut boundary_ids: Vec<u64> = Vec::new();
    let mut interior_ids: Vec<u64> = Vec::new();
    let vset: Vec<u32> = vertex_idx.clone();
    let full = ps.len() <= FULL_CLASSIFY_LIMIT;
    let mut class_on_boundary = vec![false; ps.len()];
    for &i in unique {
        if vset.binary_search(&i).is_ok() {
            class_on_boundary[i as usize] = true;
            continue;
        }
        let check = full || builder.touched_boundary[i as usize];
        if check {
            let q = builder.coords(i);
            let on = merged.iter().any(|m| {
                builder.facet_sign(&builder.facets[m.rep_facet as usize], q) == Sign::Zero
            });
            class_on_boundary[i as usize] = on;
        }
    }
    for i in 0..ps.len() {
        let rep = rep_of[i] as usize;
        let is_rep = rep == i;
        if class_on_boundary[rep] {
            if is_rep && vset.binary_search(&(i as u32)).is_ok() {
                continue; // a vertex
            }
            boundary_ids.push(ps.id(i));
        } else {
            interior_ids.push(ps.id(i));
        }
    }
    boundary_ids.sort_unstable();
    interior_ids.sort_unstable();

    // face lattice from merged facet vertex sets
    let facet_sets: Vec<Vec<u64>> = merged
        .iter()
        .map(|m| {
            let mut s: Vec<u64> = m.vertices.iter().map(|&v| ps.id(v as usize)).collect();
            s.sort_unstable();
            s
        })
        .collect();
    let coords_of: HashMap<u64, Vec<f64>> = vertex_idx
        .iter()
        .map(|&v| (ps.id(v as usize), builder.coords(v).to_vec()))
        .collect();
    let faces = lattice::face_lattice(d, &facet_sets, &vertex_ids, &coords_of);

    // simple position: every vertex on exactly d (merged) facets
    let simple_position = vertex_ids.iter().all(|id| {
        facet_sets.iter().filter(|s| s.binary_search(id).is_ok()).count() == d
    });

    let facet_normals: Vec<Vec<f64>> = merged.iter().map(|m| m.normal.clone()).collect();
    Ok(HullOutput {
        complex: HullComplex {
            dim: d,
            vertex_ids,
            faces,
            facet_normals,
            volume,
            simple_position,
        },
        boundary_ids,
        interior_ids,
    })
}

#[derive(Clone)]
struct MergedFacet {
    rep_facet: u32,
    normal: Vec<f64>,
    vertices: Vec<u32>,
}

/// Outward unit normal of a simplicial facet via cofactor expansion; the
/// vertex order already encodes outward orientation.
fn facet_normal(builder: &HullBuilder, fi: u32) -> Vec<f64> {
    let d = builder.dim;
    let f = &builder.facets[fi as usize];
    let s0 = builder.coords(f.verts[0]);
    let rows: Vec<Vec<f64>> = f
        .verts
        .iter()
        .skip(1)
        .map(|&v| {
            let s = builder.coords(v);
            (0..d).map(|c| s[c] - s0[c]).collect()
        })
        .collect();
    let mut n = vec![0.0; d];
    let mut minor = vec![0.0; (d - 1) * (d - 1)];
    for j in 0..d {
        let mut idx = 0;
        for r in &rows {
            for (c, &x) in r.iter().enumerate() {
                if c != j {
                    minor[idx] = x;
                    idx += 1;
                }
            }
        }
        let sign = if (d - 1 + j) % 2 == 0 { 1.0 } else { -1.0 };
        n[j] = sign * det_f64(&minor, d - 1);
    }
    let nrm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in n.iter_mut() {
        *x /= nrm;
    }
    n
}

/// True vertices of a merged facet: drop the coordinate where the normal is
/// largest (an exact affine bijection on the facet hyperplane) and find the
/// extreme points in dimension d-1.
fn facet_extremes(
    ps: &PointSet,
    vert_union: &[u32],
    normal: &[f64],
    d: usize,
) -> Result<Vec<u32>, GeomError> {
    if vert_union.len() <= d {
        return Ok(vert_union.to_vec());
    }
    let drop_c = normal
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .unwrap()
        .0;
    let mut proj = PointSet::new(d - 1);
    for (k, &v) in vert_union.iter().enumerate() {
        let row: Vec<f64> = ps
            .coords(v as usize)
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != drop_c)
            .map(|(_, &x)| x)
            .collect();
        proj.push(k as u64, &row);
    }
    let ext = super::extreme_points(&proj)?;
    Ok(ext.into_iter().map(|k| vert_union[k as usize]).collect())
}

/// Hull of an affinely degenerate set: recurse inside the affine span.
/// Returns (vertex ids, boundary non-vertex ids).
pub fn degenerate_hull_boundary(ps: &PointSet) -> Result<(Vec<u64>, Vec<u64>), GeomError> {
    let (unique, rep_of) = dedup(ps);
    let (_basis, info) = affine_basis(ps, &unique);
    let k = info.rank;
    if k == 0 {
        // all points coincide
        let rep = unique[0];
        let vid = ps.id(rep as usize);
        let boundary: Vec<u64> =
            (0..ps.len()).filter(|&i| i != rep as usize).map(|i| ps.id(i)).collect();
        return Ok((vec![vid], boundary));
    }
    // project onto the pivot coordinates of the span: exact affine bijection
    let pivots = info.pivots;
    let mut proj = PointSet::new(k);
    for i in 0..ps.len() {
        let row: Vec<f64> = pivots.iter().map(|&c| ps.coords(i)[c]).collect();
        proj.push(ps.id(i), &row);
    }
    if k == 1 {
        return Ok(segment_hull(&proj, &rep_of, ps));
    }
    match super::convex_hull_full(&proj) {
        Ok(out) => Ok((out.complex.vertex_ids, out.boundary_ids)),
        Err(GeomError::DegenerateInput { .. }) => {
            unreachable!("projection preserves affine rank")
        }
        Err(e) => Err(e),
    }
}

fn segment_hull(proj: &PointSet, _rep_of: &[u32], _orig: &PointSet) -> (Vec<u64>, Vec<u64>) {
    let mut idx: Vec<usize> = (0..proj.len()).collect();
    idx.sort_by(|&a, &b| {
        proj.coords(a)[0]
            .partial_cmp(&proj.coords(b)[0])
            .unwrap()
            .then(proj.id(a).cmp(&proj.id(b)))
    });
    let lo = proj.coords(idx[0])[0];
    let hi = proj.coords(*idx.last().unwrap())[0];
    let mut vertices = Vec::new();
    let mut boundary = Vec::new();
    let mut seen_lo = false;
    let mut seen_hi = false;
    for &i in &idx {
        let x = proj.coords(i)[0];
        if x == lo {
            if !seen_lo {
                vertices.push(proj.id(i));
                seen_lo = true;
            } else {
                boundary.push(proj.id(i));
            }
        } else if x == hi {
            if !seen_hi {
                vertices.push(proj.id(i));
                seen_hi = true;
            } else {
                boundary.push(proj.id(i));
            }
        }
    }
    vertices.sort_unstable();
    boundary.sort_unstable();
    (vertices, boundary)
}

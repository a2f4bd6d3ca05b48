//! C ABI over the core library: opaque handles, integer error codes, and
//! caller-owned output buffers.
//!
//! Conventions:
//! - every fallible entry point returns [`PlStatus`];
//! - objects are created behind opaque pointers and released with the
//!   matching `*_free` function (freeing NULL is a no-op);
//! - on failure a thread-local message is set, readable via
//!   [`pl_last_error_message`] until the next failing call on the thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::CString;
use std::os::raw::c_char;

use peellab::geom::{self, PointSet};
use peellab::peeling::{self, PeelingResult};
use peellab::polytope::{self, HPolytope};
use peellab::sampling::{self, Seed};

/// Error codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    DegenerateInput = 3,
    BufferTooSmall = 4,
    InternalError = 5,
}

/// Built-in polytope families for sampling helpers.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum PlPolytopeKind {
    Cube = 0,
    Simplex = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> =
        RefCell::new(CString::new("").expect("empty message"));
}

fn fail(status: PlStatus, msg: &str) -> PlStatus {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never NULL.
#[no_mangle]
pub extern "C" fn pl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// An immutable finite point configuration in R^d.
pub struct PlPointSet(PointSet);

/// Result of peeling a point set into convex layers.
pub struct PlPeeling {
    result: PeelingResult,
    /// input ids in insertion order, for stable label export
    ids: Vec<u64>,
}

fn builtin(kind: PlPolytopeKind, dim: usize, scale: f64) -> Result<HPolytope, String> {
    if dim < 2 {
        return Err("dim must be >= 2".into());
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err("scale must be positive and finite".into());
    }
    Ok(match kind {
        PlPolytopeKind::Cube => polytope::cube(dim, scale),
        PlPolytopeKind::Simplex => polytope::simplex(dim, scale),
    })
}

/// Build a point set from `n` points of dimension `dim`, stored row-major
/// in `coords` (length `n * dim`). Ids are assigned 0..n in order.
#[no_mangle]
pub unsafe extern "C" fn pl_pointset_new(
    dim: usize,
    n: usize,
    coords: *const f64,
    out: *mut *mut PlPointSet,
) -> PlStatus {
    if out.is_null() || (n > 0 && coords.is_null()) {
        return fail(PlStatus::NullArgument, "pl_pointset_new: NULL argument");
    }
    if dim == 0 {
        return fail(PlStatus::InvalidArgument, "pl_pointset_new: dim must be >= 1");
    }
    let flat = std::slice::from_raw_parts(coords, n * dim);
    if flat.iter().any(|x| !x.is_finite()) {
        return fail(PlStatus::InvalidArgument, "pl_pointset_new: non-finite coordinate");
    }
    let mut ps = PointSet::new(dim);
    for i in 0..n {
        ps.push(i as u64, &flat[i * dim..(i + 1) * dim]);
    }
    *out = Box::into_raw(Box::new(PlPointSet(ps)));
    PlStatus::Ok
}

/// Sample a Poisson process of the given intensity in a built-in polytope.
#[no_mangle]
pub unsafe extern "C" fn pl_pointset_sample_poisson(
    kind: PlPolytopeKind,
    dim: usize,
    scale: f64,
    lambda: f64,
    seed: u64,
    stream: u64,
    out: *mut *mut PlPointSet,
) -> PlStatus {
    if out.is_null() {
        return fail(PlStatus::NullArgument, "pl_pointset_sample_poisson: NULL out");
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return fail(
            PlStatus::InvalidArgument,
            "pl_pointset_sample_poisson: lambda must be positive and finite",
        );
    }
    let k = match builtin(kind, dim, scale) {
        Ok(k) => k,
        Err(m) => return fail(PlStatus::InvalidArgument, &m),
    };
    let ps = sampling::sample_poisson(&k, lambda, Seed::new(seed, stream));
    *out = Box::into_raw(Box::new(PlPointSet(ps)));
    PlStatus::Ok
}

/// Number of points, or -1 if the handle is NULL.
#[no_mangle]
pub unsafe extern "C" fn pl_pointset_len(ps: *const PlPointSet) -> i64 {
    if ps.is_null() {
        return -1;
    }
    (*ps).0.len() as i64
}

/// Ambient dimension, or -1 if the handle is NULL.
#[no_mangle]
pub unsafe extern "C" fn pl_pointset_dim(ps: *const PlPointSet) -> i64 {
    if ps.is_null() {
        return -1;
    }
    (*ps).0.dim() as i64
}

/// Copy the row-major coordinates into `buf` (capacity `cap` doubles).
/// Writes the required length to `out_len` even when the buffer is small.
#[no_mangle]
pub unsafe extern "C" fn pl_pointset_coords(
    ps: *const PlPointSet,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> PlStatus {
    if ps.is_null() || out_len.is_null() {
        return fail(PlStatus::NullArgument, "pl_pointset_coords: NULL argument");
    }
    let flat = (*ps).0.flat_coords();
    *out_len = flat.len();
    if cap < flat.len() {
        return fail(PlStatus::BufferTooSmall, "pl_pointset_coords: buffer too small");
    }
    if flat.is_empty() {
        return PlStatus::Ok;
    }
    if buf.is_null() {
        return fail(PlStatus::NullArgument, "pl_pointset_coords: NULL buffer");
    }
    std::ptr::copy_nonoverlapping(flat.as_ptr(), buf, flat.len());
    PlStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn pl_pointset_free(ps: *mut PlPointSet) {
    if !ps.is_null() {
        drop(Box::from_raw(ps));
    }
}

/// Face counts f_0..f_{d-1} of the convex hull of the point set.
/// `cap` is the capacity of `f_out`; the true length goes to `out_len`.
#[no_mangle]
pub unsafe extern "C" fn pl_hull_f_vector(
    ps: *const PlPointSet,
    f_out: *mut u64,
    cap: usize,
    out_len: *mut usize,
) -> PlStatus {
    if ps.is_null() || out_len.is_null() {
        return fail(PlStatus::NullArgument, "pl_hull_f_vector: NULL argument");
    }
    let hull = match geom::convex_hull(&(*ps).0) {
        Ok(h) => h,
        Err(e) => return fail(PlStatus::DegenerateInput, &e.to_string()),
    };
    let f = hull.f_vector();
    *out_len = f.len();
    if cap < f.len() {
        return fail(PlStatus::BufferTooSmall, "pl_hull_f_vector: buffer too small");
    }
    if f.is_empty() {
        return PlStatus::Ok;
    }
    if f_out.is_null() {
        return fail(PlStatus::NullArgument, "pl_hull_f_vector: NULL buffer");
    }
    for (i, &c) in f.iter().enumerate() {
        *f_out.add(i) = c as u64;
    }
    PlStatus::Ok
}

/// Volume of the convex hull of the point set.
#[no_mangle]
pub unsafe extern "C" fn pl_hull_volume(
    ps: *const PlPointSet,
    out: *mut f64,
) -> PlStatus {
    if ps.is_null() || out.is_null() {
        return fail(PlStatus::NullArgument, "pl_hull_volume: NULL argument");
    }
    match geom::convex_hull(&(*ps).0) {
        Ok(h) => {
            *out = geom::hull_volume(&h);
            PlStatus::Ok
        }
        Err(e) => fail(PlStatus::DegenerateInput, &e.to_string()),
    }
}

/// Peel the point set into convex layers. `max_layers = 0` means no limit.
#[no_mangle]
pub unsafe extern "C" fn pl_peel(
    ps: *const PlPointSet,
    max_layers: usize,
    out: *mut *mut PlPeeling,
) -> PlStatus {
    if ps.is_null() || out.is_null() {
        return fail(PlStatus::NullArgument, "pl_peel: NULL argument");
    }
    let inner = &(*ps).0;
    let limit = if max_layers == 0 { None } else { Some(max_layers) };
    let result = peeling::peel(inner, limit);
    let ids = inner.ids().to_vec();
    *out = Box::into_raw(Box::new(PlPeeling { result, ids }));
    PlStatus::Ok
}

/// Total number of layers assigned, or -1 if the handle is NULL.
#[no_mangle]
pub unsafe extern "C" fn pl_peeling_total_layers(p: *const PlPeeling) -> i64 {
    if p.is_null() {
        return -1;
    }
    (*p).result.total_layers() as i64
}

/// 1 when the peel stopped at max_layers, 0 otherwise, -1 on NULL.
#[no_mangle]
pub unsafe extern "C" fn pl_peeling_truncated(p: *const PlPeeling) -> i32 {
    if p.is_null() {
        return -1;
    }
    (*p).result.truncated as i32
}

/// Export (id, layer) pairs in input order. Unlabeled points (possible
/// only after truncation) get layer 0. `cap` is the capacity of both
/// buffers in elements; the required length goes to `out_len`.
#[no_mangle]
pub unsafe extern "C" fn pl_peeling_labels(
    p: *const PlPeeling,
    ids_out: *mut u64,
    layers_out: *mut u32,
    cap: usize,
    out_len: *mut usize,
) -> PlStatus {
    if p.is_null() || out_len.is_null() {
        return fail(PlStatus::NullArgument, "pl_peeling_labels: NULL argument");
    }
    let pl = &*p;
    *out_len = pl.ids.len();
    if cap < pl.ids.len() {
        return fail(PlStatus::BufferTooSmall, "pl_peeling_labels: buffer too small");
    }
    if pl.ids.is_empty() {
        return PlStatus::Ok;
    }
    if ids_out.is_null() || layers_out.is_null() {
        return fail(PlStatus::NullArgument, "pl_peeling_labels: NULL buffer");
    }
    for (i, &id) in pl.ids.iter().enumerate() {
        *ids_out.add(i) = id;
        *layers_out.add(i) = pl.result.label.get(&id).copied().unwrap_or(0);
    }
    PlStatus::Ok
}

/// Number of points on layer `n` (1-based), or -1 on NULL/invalid layer.
#[no_mangle]
pub unsafe extern "C" fn pl_peeling_layer_size(p: *const PlPeeling, n: u32) -> i64 {
    if p.is_null() || n == 0 {
        return -1;
    }
    (*p).result.label.values().filter(|&&l| l == n).count() as i64
}

#[no_mangle]
pub unsafe extern "C" fn pl_peeling_free(p: *mut PlPeeling) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

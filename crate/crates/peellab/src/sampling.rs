//! Random inputs: Poisson and binomial processes in a polytope, and the
//! rescaled limit process on truncated cylinder windows.
//!
//! Randomness comes from ChaCha12 keyed by a master seed, with the
//! replication index mapped to the generator's stream counter, so every
//! (master, stream) pair is reproducible and parallel-safe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::geom::PointSet;
use crate::polytope::HPolytope;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(master: u64, stream: u64) -> Self {
        Seed { master, stream }
    }

    pub fn rng(self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// Truncated cylinder window B_{d-1}(0, r) x [h_min, h_max] in V x R.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LimitWindow {
    /// ambient dimension d; the base ball lives in d-1 dimensions
    pub dim: usize,
    pub radius: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl LimitWindow {
    pub fn new(dim: usize, radius: f64, h_min: f64, h_max: f64) -> Self {
        assert!(dim >= 2 && radius > 0.0 && h_min < h_max);
        LimitWindow { dim, radius, h_min, h_max }
    }

    /// Expected number of points of the limit process in the window:
    /// sqrt(d) Vol_{d-1}(B_r) (e^{d h_max} - e^{d h_min}) / d.
    pub fn expected_count(&self) -> f64 {
        let d = self.dim as f64;
        d.sqrt() * ball_volume(self.dim - 1, self.radius)
            * ((d * self.h_max).exp() - (d * self.h_min).exp())
            / d
    }
}

/// Vol_k(B_r) by the two-step recursion V_k = 2 pi r^2 V_{k-2} / k.
pub fn ball_volume(k: usize, r: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0 * r,
        _ => 2.0 * std::f64::consts::PI * r * r * ball_volume(k - 2, r) / k as f64,
    }
}

/// Rejection statistics of a box-rejection sampler.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct RejectionStats {
    pub proposals: u64,
    pub accepted: u64,
}

impl RejectionStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

fn uniform_in(k: &HPolytope, rng: &mut ChaCha12Rng, stats: &mut RejectionStats) -> Vec<f64> {
    let (lo, hi) = k.bounding_box();
    loop {
        stats.proposals += 1;
        let x: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(&l, &h)| rng.gen_range(l..h))
            .collect();
        if k.contains(&x) {
            stats.accepted += 1;
            return x;
        }
    }
}

/// Poisson process with intensity lambda * Lebesgue in K.
pub fn sample_poisson(k: &HPolytope, lambda: f64, seed: Seed) -> PointSet {
    sample_poisson_with_stats(k, lambda, seed).0
}

pub fn sample_poisson_with_stats(
    k: &HPolytope,
    lambda: f64,
    seed: Seed,
) -> (PointSet, RejectionStats) {
    assert!(lambda >= 0.0);
    let mut rng = seed.rng();
    let mean = lambda * k.volume();
    let n = if mean == 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
    };
    sample_n(k, n, &mut rng)
}

/// Exactly n i.i.d. uniform points in K.
pub fn sample_binomial(k: &HPolytope, n: usize, seed: Seed) -> PointSet {
    let mut rng = seed.rng();
    sample_n(k, n, &mut rng).0
}

fn sample_n(k: &HPolytope, n: usize, rng: &mut ChaCha12Rng) -> (PointSet, RejectionStats) {
    let mut stats = RejectionStats::default();
    let mut ps = PointSet::new(k.dim());
    for id in 0..n {
        let x = uniform_in(k, rng, &mut stats);
        ps.push(id as u64, &x);
    }
    (ps, stats)
}

/// Poisson process on the window with intensity sqrt(d) e^{dh} dv dh.
/// Output points are (v_1..v_{d-1}, h).
pub fn sample_limit_process(win: &LimitWindow, seed: Seed) -> PointSet {
    let mut rng = seed.rng();
    let d = win.dim as f64;
    let mean = win.expected_count();
    let n = if mean == 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
    };
    let base_dim = win.dim - 1;
    let e_lo = (d * win.h_min).exp();
    let e_hi = (d * win.h_max).exp();
    let mut ps = PointSet::new(win.dim);
    for id in 0..n {
        // v uniform in the ball by rejection from the enclosing box
        let v: Vec<f64> = loop {
            let cand: Vec<f64> =
                (0..base_dim).map(|_| rng.gen_range(-win.radius..win.radius)).collect();
            if cand.iter().map(|x| x * x).sum::<f64>() <= win.radius * win.radius {
                break cand;
            }
        };
        // h by inverse CDF of the e^{dh} density on [h_min, h_max]
        let u: f64 = rng.gen();
        let h = (e_lo + u * (e_hi - e_lo)).ln() / d;
        let mut row = v;
        row.push(h);
        ps.push(id as u64, &row);
    }
    ps
}

/// CSV rows: id, x_1, ..., x_d with a header.
pub fn to_csv(ps: &PointSet) -> String {
    let mut out = String::from("id");
    for c in 0..ps.dim() {
        out.push_str(&format!(",x{}", c + 1));
    }
    out.push('\n');
    for (id, coords) in ps.iter() {
        out.push_str(&id.to_string());
        for &x in coords {
            // shortest round-trip representation keeps exact bits
            out.push_str(&format!(",{x:?}"));
        }
        out.push('\n');
    }
    out
}

pub fn from_csv(text: &str) -> Result<PointSet, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty csv")?;
    let dim = header.split(',').count() - 1;
    if dim == 0 {
        return Err("csv has no coordinate columns".into());
    }
    let mut ps = PointSet::new(dim);
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let id: u64 = parts
            .next()
            .ok_or_else(|| format!("line {}: missing id", ln + 2))?
            .trim()
            .parse()
            .map_err(|e| format!("line {}: bad id: {e}", ln + 2))?;
        let coords: Result<Vec<f64>, String> = parts
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("line {}: {e}", ln + 2)))
            .collect();
        let coords = coords?;
        if coords.len() != dim {
            return Err(format!("line {}: expected {dim} coordinates", ln + 2));
        }
        ps.push(id, &coords);
    }
    Ok(ps)
}

/// Compact binary cache: magic, dim, count, then (id: u64, coords: f64 x dim)
/// little endian.
pub fn to_binary(ps: &PointSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + ps.len() * (8 + 8 * ps.dim()));
    out.extend_from_slice(b"PLPS");
    out.extend_from_slice(&(ps.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(ps.len() as u64).to_le_bytes());
    for (id, coords) in ps.iter() {
        out.extend_from_slice(&id.to_le_bytes());
        for &x in coords {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn from_binary(bytes: &[u8]) -> Result<PointSet, String> {
    if bytes.len() < 16 || &bytes[0..4] != b"PLPS" {
        return Err("bad magic".into());
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let rec = 8 + 8 * dim;
    if bytes.len() != 16 + count * rec {
        return Err("truncated point cache".into());
    }
    let mut ps = PointSet::new(dim);
    for i in 0..count {
        let off = 16 + i * rec;
        let id = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let coords: Vec<f64> = (0..dim)
            .map(|c| {
                let o = off + 8 + 8 * c;
                f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
            })
            .collect();
        ps.push(id, &coords);
    }
    Ok(ps)
}

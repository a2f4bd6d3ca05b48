//! Corner rescaling: the logarithmic scaling transform, the grain function
//! G with its gradient, halfspace/grain duality, cone-like peeling of
//! rescaled configurations, and empirical height-tail / stabilization-radius
//! estimators for the limit process.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{self, PointSet};
use crate::linprog::{simplex, LpOutcome};
use crate::sampling::{self, LimitWindow, Seed};
use crate::stats;

#[derive(Debug, Error)]
pub enum RescaledError {
    #[error("point has a non-positive coordinate")]
    NonPositiveCoordinate,
}

/// A point (v, h) with v in coordinates of a fixed orthonormal basis of
/// V = {sum z_i = 0} (dimension d-1) and real height h.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RescaledPoint {
    pub v: Vec<f64>,
    pub h: f64,
}

impl RescaledPoint {
    pub fn new(v: Vec<f64>, h: f64) -> Self {
        assert!(v.iter().all(|x| x.is_finite()) && h.is_finite());
        RescaledPoint { v, h }
    }
}

/// Orthonormal basis of V = {sum z_i = 0} in R^d (Helmert-style): column j
/// is (1,...,1,-(j+1),0,...,0)/sqrt((j+1)(j+2)) with j+1 leading ones.
pub fn basis_of_v(d: usize) -> Vec<Vec<f64>> {
    assert!(d >= 2);
    (0..d - 1)
        .map(|j| {
            let s = 1.0 / (((j + 1) * (j + 2)) as f64).sqrt();
            (0..d)
                .map(|i| {
                    if i <= j {
                        s
                    } else if i == j + 1 {
                        -((j + 1) as f64) * s
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// l(v): the standard R^d coordinates of the point of V with basis
/// coordinates v; sums to zero.
pub fn l_of(d: usize, v: &[f64]) -> Vec<f64> {
    let e = basis_of_v(d);
    let mut out = vec![0.0; d];
    for (j, col) in e.iter().enumerate() {
        for i in 0..d {
            out[i] += col[i] * v[j];
        }
    }
    out
}

/// G(v) = log((1/d) sum_i e^{l_i(v)}), evaluated stably.
pub fn grain_g(d: usize, v: &[f64]) -> f64 {
    let l = l_of(d, v);
    let m = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = l.iter().map(|&x| (x - m).exp()).sum();
    m + (s / d as f64).ln()
}

/// Gradient of G in the v coordinates: the softmax-weighted average of the
/// basis rows.
pub fn grain_g_grad(d: usize, v: &[f64]) -> Vec<f64> {
    let l = l_of(d, v);
    let m = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = l.iter().map(|&x| (x - m).exp()).collect();
    let z: f64 = w.iter().sum();
    let e = basis_of_v(d);
    (0..d - 1)
        .map(|j| (0..d).map(|i| w[i] / z * e[j][i]).sum())
        .collect()
}

/// T^(lambda): z in (0,inf)^d maps to (p_V(log z), (1/d)(log lambda +
/// sum log z_i)).
pub fn scaling_transform(z: &[f64], lambda: f64) -> Result<RescaledPoint, RescaledError> {
    if z.iter().any(|&x| x <= 0.0) {
        return Err(RescaledError::NonPositiveCoordinate);
    }
    let d = z.len();
    let logs: Vec<f64> = z.iter().map(|x| x.ln()).collect();
    let mean = logs.iter().sum::<f64>() / d as f64;
    let h = mean + lambda.ln() / d as f64;
    let e = basis_of_v(d);
    let v: Vec<f64> = e
        .iter()
        .map(|col| (0..d).map(|i| col[i] * (logs[i] - mean)).sum())
        .collect();
    Ok(RescaledPoint::new(v, h))
}

/// Inverse transform: z_i = lambda^{-1/d} e^h e^{l_i(v)}.
pub fn inverse_transform(w: &RescaledPoint, lambda: f64) -> Vec<f64> {
    let d = w.v.len() + 1;
    let l = l_of(d, &w.v);
    let c = w.h - lambda.ln() / d as f64;
    l.iter().map(|&li| (c + li).exp()).collect()
}

/// W_lambda = {(v,h) : h <= -l_i(v) + log(lambda^{1/d} delta_0) for all i},
/// delta_0 = exp(-log^{1/d} lambda); lambda = None means the limit model
/// (no height cutoff from lambda).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Window {
    pub lambda: Option<f64>,
    pub delta0: f64,
}

impl Window {
    pub fn new(d: usize, lambda: f64) -> Self {
        assert!(lambda > 1.0);
        let delta0 = (-lambda.ln().powf(1.0 / d as f64)).exp();
        Window { lambda: Some(lambda), delta0 }
    }

    pub fn infinite() -> Self {
        Window { lambda: None, delta0: 0.0 }
    }

    pub fn contains(&self, d: usize, w: &RescaledPoint) -> bool {
        match self.lambda {
            None => true,
            Some(lambda) => {
                let cutoff = (lambda.powf(1.0 / d as f64) * self.delta0).ln();
                l_of(d, &w.v).iter().all(|&li| w.h <= -li + cutoff)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrainDirection {
    Down,
    Up,
}

/// Down grain {(v,h) : h < apex.h - G(v - apex.v)}; up grain
/// {(v,h) : h > apex.h + G(apex.v - v)}, the reflection that makes the
/// boundary duality exact.
#[derive(Clone, Debug, Serialize)]
pub struct Grain {
    pub apex: RescaledPoint,
    pub direction: GrainDirection,
}

impl Grain {
    pub fn down(apex: RescaledPoint) -> Self {
        Grain { apex, direction: GrainDirection::Down }
    }

    pub fn up(apex: RescaledPoint) -> Self {
        Grain { apex, direction: GrainDirection::Up }
    }

    /// Signed margin: negative strictly inside, zero on the boundary.
    pub fn margin(&self, d: usize, p: &RescaledPoint) -> f64 {
        let diff: Vec<f64> = match self.direction {
            GrainDirection::Down => p.v.iter().zip(&self.apex.v).map(|(a, b)| a - b).collect(),
            GrainDirection::Up => self.apex.v.iter().zip(&p.v).map(|(a, b)| a - b).collect(),
        };
        let g = grain_g(d, &diff);
        match self.direction {
            GrainDirection::Down => p.h - (self.apex.h - g),
            GrainDirection::Up => (self.apex.h + g) - p.h,
        }
    }

    pub fn contains(&self, d: usize, p: &RescaledPoint) -> bool {
        self.margin(d, p) < 0.0
    }

    pub fn on_boundary(&self, d: usize, p: &RescaledPoint, tol: f64) -> bool {
        self.margin(d, p).abs() <= tol
    }
}

/// The tangent-hyperplane halfspace H^+(z0) = {z : sum z_i / z0_i < d}
/// rescales to the down grain with apex T^(lambda)(z0).
pub fn halfspace_to_grain(z0: &[f64], lambda: f64) -> Result<Grain, RescaledError> {
    Ok(Grain::down(scaling_transform(z0, lambda)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeLayer {
    /// ids removed at this layer (cone-extreme points)
    pub extreme_ids: Vec<u64>,
    /// cone-extreme k-face counts of the layer hull, k = 0..d-1
    pub f: Vec<usize>,
    /// vertex-id sets of the cone-extreme k-faces
    pub faces: Vec<Vec<Vec<u64>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConePeelingResult {
    pub label: HashMap<u64, u32>,
    pub layers: Vec<ConeLayer>,
    /// true if a round removed nothing and the remainder was flushed
    pub stalled: bool,
}

const LP_TOL: f64 = 1e-9;

/// z is cone-extreme among `pts[alive]` iff some direction a with all
/// components strictly positive supports conv from below at z:
/// max t s.t. a.(z' - z) >= 0 for all z', a_i >= t, sum a_i = 1.
fn cone_extreme(pts: &[Vec<f64>], alive: &[usize], z: &[f64]) -> bool {
    let d = z.len();
    // variables a_1..a_d, t
    let mut c = vec![0.0; d + 1];
    c[d] = 1.0;
    let mut ones = vec![1.0; d + 1];
    ones[d] = 0.0;
    let a_eq = vec![ones];
    let b_eq = vec![1.0];
    let mut a_ub = Vec::with_capacity(alive.len() + d);
    for &i in alive {
        // points dominating z coordinatewise yield rows <= 0 and can never
        // bind for a >= 0; dropping them keeps large instances tractable
        if (0..d).all(|c| pts[i][c] >= z[c]) {
            continue;
        }
        let row: Vec<f64> = (0..d)
            .map(|c| z[c] - pts[i][c])
            .chain(std::iter::once(0.0))
            .collect();
        a_ub.push(row);
    }
    for i in 0..d {
        let mut row = vec![0.0; d + 1];
        row[i] = -1.0;
        row[d] = 1.0;
        a_ub.push(row);
    }
    let b_ub = vec![0.0; a_ub.len()];
    match simplex(&c, &a_eq, &b_eq, &a_ub, &b_ub) {
        LpOutcome::Optimal { value, .. } => value > LP_TOL,
        _ => false,
    }
}

/// A face with the given containing-facet normals is cone-extreme iff the
/// normal cone meets the open negative orthant: max t s.t.
/// sum mu_j n_j <= -t 1, sum mu = 1, mu >= 0 has positive optimum.
fn face_cone_extreme(normals: &[&Vec<f64>]) -> bool {
    if normals.is_empty() {
        return false;
    }
    let m = normals.len();
    let d = normals[0].len();
    let mut c = vec![0.0; m + 1];
    c[m] = 1.0;
    let mut ones = vec![1.0; m + 1];
    ones[m] = 0.0;
    let a_eq = vec![ones];
    let b_eq = vec![1.0];
    let mut a_ub = Vec::with_capacity(d);
    for coord in 0..d {
        let mut row: Vec<f64> = normals.iter().map(|n| n[coord]).collect();
        row.push(1.0);
        a_ub.push(row);
    }
    let b_ub = vec![0.0; d];
    match simplex(&c, &a_eq, &b_eq, &a_ub, &b_ub) {
        LpOutcome::Optimal { value, .. } => value > LP_TOL,
        _ => false,
    }
}

/// Cone-like peeling of rescaled points: pull back through the inverse
/// transform and peel, removing per round exactly the points on
/// cone-extreme faces (support normal in the open negative orthant);
/// other boundary points persist to deeper layers. For the limit model
/// pass the reference lambda = 1 (labels are invariant under the
/// vertical-shift family).
pub fn cone_peel(y: &[RescaledPoint], lambda: f64) -> ConePeelingResult {
    cone_peel_limited(y, lambda, None, true)
}

/// As [`cone_peel`], but optionally stop after `max_layers` rounds (deeper
/// points stay unlabeled) and optionally skip the per-layer face extraction
/// (layers then report only the removed 0-faces).
pub fn cone_peel_limited(
    y: &[RescaledPoint],
    lambda: f64,
    max_layers: Option<u32>,
    want_faces: bool,
) -> ConePeelingResult {
    if y.is_empty() {
        return ConePeelingResult { label: HashMap::new(), layers: Vec::new(), stalled: false };
    }
    let d = y[0].v.len() + 1;
    let pts: Vec<Vec<f64>> = y.iter().map(|w| inverse_transform(w, lambda)).collect();
    let mut alive: Vec<usize> = (0..pts.len()).collect();
    let mut label = HashMap::new();
    let mut layers = Vec::new();
    let mut stalled = false;
    let mut layer = 1u32;
    while !alive.is_empty() {
        if let Some(m) = max_layers {
            if layer > m {
                break;
            }
        }
        let removed_flag: Vec<bool> =
            alive.iter().map(|&i| cone_extreme(&pts, &alive, &pts[i])).collect();
        let mut removed: Vec<usize> = alive
            .iter()
            .zip(&removed_flag)
            .filter(|(_, &r)| r)
            .map(|(&i, _)| i)
            .collect();
        if removed.is_empty() {
            stalled = true;
            removed = alive.clone();
        }
        let (f, faces) = if want_faces {
            cone_extreme_faces(&pts, &alive, d)
        } else {
            let mut f = vec![0usize; d];
            f[0] = removed.len();
            let mut faces = vec![Vec::new(); d];
            faces[0] = removed.iter().map(|&i| vec![i as u64]).collect();
            (f, faces)
        };
        for &i in &removed {
            label.insert(i as u64, layer);
        }
        layers.push(ConeLayer {
            extreme_ids: removed.iter().map(|&i| i as u64).collect(),
            f,
            faces,
        });
        let gone: std::collections::HashSet<usize> = removed.into_iter().collect();
        alive.retain(|i| !gone.contains(i));
        layer += 1;
    }
    ConePeelingResult { label, layers, stalled }
}

/// Cone-extreme k-face counts and id sets for the hull of pts[alive].
fn cone_extreme_faces(
    pts: &[Vec<f64>],
    alive: &[usize],
    d: usize,
) -> (Vec<usize>, Vec<Vec<Vec<u64>>>) {
    let mut ps = PointSet::new(d);
    for &i in alive {
        ps.push(i as u64, &pts[i]);
    }
    let out = match geom::convex_hull_full(&ps) {
        Ok(o) => o,
        Err(_) => {
            // degenerate hull: report only the 0-faces actually removable
            let zero: Vec<Vec<u64>> = alive
                .iter()
                .filter(|&&i| cone_extreme(pts, alive, &pts[i]))
                .map(|&i| vec![i as u64])
                .collect();
            let mut f = vec![0; d];
            f[0] = zero.len();
            let mut faces = vec![Vec::new(); d];
            faces[0] = zero;
            return (f, faces);
        }
    };
    let complex = out.complex;
    let mut f = vec![0usize; d];
    let mut faces: Vec<Vec<Vec<u64>>> = vec![Vec::new(); d];
    let facet_sets: Vec<&Vec<u64>> = complex.faces[d - 1].iter().collect();
    for k in 0..d {
        let level: &Vec<Vec<u64>> = &complex.faces[k];
        for face in level {
            // normals of the facets containing this face
            let normals: Vec<&Vec<f64>> = facet_sets
                .iter()
                .enumerate()
                .filter(|(_, fs)| face.iter().all(|id| fs.binary_search(id).is_ok()))
                .map(|(j, _)| &complex.facet_normals[j])
                .collect();
            if face_cone_extreme(&normals) {
                f[k] += 1;
                faces[k].push(face.clone());
            }
        }
    }
    (f, faces)
}

#[derive(Clone, Debug, Serialize)]
pub struct HeightTail {
    pub t_grid: Vec<f64>,
    pub tail: Vec<f64>,
    /// slope of log(-log tail) vs t over the informative range
    pub loglog_slope: Option<f64>,
}

/// Monte Carlo tail P(max height of layer-n points within radius r/2 >= t)
/// for the limit process sampled on `win`; reference lambda = 1.
pub fn height_tail_estimate(
    win: &LimitWindow,
    n: u32,
    reps: u64,
    t_grid: &[f64],
    seed: Seed,
) -> HeightTail {
    let d = win.dim;
    let half = win.radius / 2.0;
    let mut maxima = Vec::with_capacity(reps as usize);
    for r in 0..reps {
        let ps = sampling::sample_limit_process(win, Seed::new(seed.master, seed.stream + r));
        let y: Vec<RescaledPoint> = (0..ps.len())
            .map(|i| {
                let row = ps.coords(i);
                RescaledPoint::new(row[..d - 1].to_vec(), row[d - 1])
            })
            .collect();
        let res = cone_peel(&y, 1.0);
        let mut best = f64::NEG_INFINITY;
        for (idx, w) in y.iter().enumerate() {
            if res.label.get(&(idx as u64)) == Some(&n)
                && w.v.iter().map(|x| x * x).sum::<f64>() <= half * half
            {
                best = best.max(w.h);
            }
        }
        maxima.push(best);
    }
    let tail: Vec<f64> = t_grid
        .iter()
        .map(|&t| maxima.iter().filter(|&&m| m >= t).count() as f64 / reps as f64)
        .collect();
    // regress log(-log tail) on t where the tail is strictly inside (0,1)
    let pairs: Vec<(f64, f64)> = t_grid
        .iter()
        .zip(&tail)
        .filter(|(_, &p)| p > 0.0 && p < 1.0)
        .map(|(&t, &p)| (t, (-p.ln()).ln()))
        .collect();
    let loglog_slope = if pairs.len() >= 2 {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        Some(stats::least_squares(&xs, &ys).1)
    } else {
        None
    };
    HeightTail { t_grid: t_grid.to_vec(), tail, loglog_slope }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub enum ScoreKind {
    /// indicator that the point is labeled n
    LayerIndicator { n: u32 },
    /// (1/(k+1)) x number of cone-extreme k-faces of layer n containing it
    KFaceCount { n: u32, k: usize },
}

/// Score of w0 against the configuration local (w0 inserted at index 0).
pub fn score_of(w0: &RescaledPoint, local: &[RescaledPoint], kind: ScoreKind) -> f64 {
    // w0 occupies index 0
    let mut y = vec![w0.clone()];
    y.extend_from_slice(local);
    if let ScoreKind::LayerIndicator { n: 1 } = kind {
        // first-layer membership is a single cone-extremality test
        let pts: Vec<Vec<f64>> = y.iter().map(|w| inverse_transform(w, 1.0)).collect();
        let alive: Vec<usize> = (0..pts.len()).collect();
        return if cone_extreme(&pts, &alive, &pts[0]) { 1.0 } else { 0.0 };
    }
    let depth = match kind {
        ScoreKind::LayerIndicator { n } => n,
        ScoreKind::KFaceCount { n, .. } => n,
    };
    let want_faces = matches!(kind, ScoreKind::KFaceCount { .. });
    let res = cone_peel_limited(&y, 1.0, Some(depth), want_faces);
    match kind {
        ScoreKind::LayerIndicator { n } => {
            if res.label.get(&0) == Some(&n) {
                1.0
            } else {
                0.0
            }
        }
        ScoreKind::KFaceCount { n, k } => {
            let layer = match res.layers.get((n - 1) as usize) {
                Some(l) => l,
                None => return 0.0,
            };
            if res.label.get(&0) != Some(&n) {
                return 0.0;
            }
            let cnt = layer
                .faces
                .get(k)
                .map(|fs| fs.iter().filter(|f| f.binary_search(&0).is_ok()).count())
                .unwrap_or(0);
            cnt as f64 / (k + 1) as f64
        }
    }
}

/// Smallest grid radius r such that the score of w0 computed from
/// Y restricted to the cylinder {|v - w0.v| <= s} is the same for every
/// tested s >= r; +infinity if the score still changes at the largest radius.
pub fn stabilization_radius(
    w0: &RescaledPoint,
    y: &[RescaledPoint],
    kind: ScoreKind,
    r_grid: &[f64],
) -> f64 {
    assert!(!r_grid.is_empty());
    assert!(r_grid.windows(2).all(|w| w[0] < w[1]));
    let scores: Vec<f64> = r_grid
        .iter()
        .map(|&r| {
            let local: Vec<RescaledPoint> = y
                .iter()
                .filter(|p| {
                    p.v
                        .iter()
                        .zip(&w0.v)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        <= r * r
                })
                .cloned()
                .collect();
            score_of(w0, &local, kind)
        })
        .collect();
    let last = *scores.last().unwrap();
    // longest constant suffix equal to the final score
    let mut start = scores.len() - 1;
    while start > 0 && scores[start - 1] == last {
        start -= 1;
    }
    if start == scores.len() - 1 && scores.len() > 1 && scores[start - 1] != last {
        // only the final radius agrees with itself: unstable on this grid
        return f64::INFINITY;
    }
    r_grid[start]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_point(rng: &mut StdRng, d: usize, scale: f64) -> RescaledPoint {
        RescaledPoint::new(
            (0..d - 1).map(|_| (rng.gen::<f64>() - 0.5) * scale).collect(),
            (rng.gen::<f64>() - 0.5) * scale,
        )
    }

    #[test]
    fn basis_is_orthonormal_and_in_v() {
        for d in 2..=5 {
            let e = basis_of_v(d);
            for (i, a) in e.iter().enumerate() {
                assert!(a.iter().sum::<f64>().abs() < 1e-12);
                for (j, b) in e.iter().enumerate() {
                    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn g_at_zero_and_logsumexp_bounds() {
        let mut rng = StdRng::seed_from_u64(201);
        for d in 2..=4 {
            assert!(grain_g(d, &vec![0.0; d - 1]).abs() < 1e-14);
            for _ in 0..10_000 / d {
                let v: Vec<f64> =
                    (0..d - 1).map(|_| (rng.gen::<f64>() - 0.5) * 20.0).collect();
                let g = grain_g(d, &v);
                let lmax =
                    l_of(d, &v).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert!(g <= lmax + 1e-12);
                assert!(g >= lmax - (d as f64).ln() - 1e-12);
            }
        }
    }

    #[test]
    fn g_norm_equivalence_bounds() {
        // c_low ||v|| - log d <= G(v) <= c_high ||v|| with the constants
        // derived by optimizing max_i l_i over the unit sphere of V
        let mut rng = StdRng::seed_from_u64(203);
        for d in 2..=4 {
            // sample the unit sphere to estimate the extremes of max_i l_i
            let mut c_low = f64::INFINITY;
            let mut c_high = f64::NEG_INFINITY;
            for _ in 0..20_000 {
                let mut v: Vec<f64> =
                    (0..d - 1).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n < 1e-6 {
                    continue;
                }
                for x in v.iter_mut() {
                    *x /= n;
                }
                let m = l_of(d, &v).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                c_low = c_low.min(m);
                c_high = c_high.max(m);
            }
            assert!(c_low > 0.0);
            for _ in 0..2000 {
                let v: Vec<f64> =
                    (0..d - 1).map(|_| (rng.gen::<f64>() - 0.5) * 10.0).collect();
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let g = grain_g(d, &v);
                // sampled constants carry a small slack
                assert!(g >= (c_low - 1e-3) * norm - (d as f64).ln() - 1e-9);
                assert!(g <= (c_high + 1e-3) * norm + 1e-9);
            }
        }
    }

    #[test]
    fn grad_matches_finite_differences_and_is_bounded() {
        let mut rng = StdRng::seed_from_u64(207);
        for d in 2..=4 {
            for _ in 0..1000 / d {
                let v: Vec<f64> =
                    (0..d - 1).map(|_| (rng.gen::<f64>() - 0.5) * 8.0).collect();
                let g = grain_g_grad(d, &v);
                let eps = 1e-6;
                for j in 0..d - 1 {
                    let mut hi = v.clone();
                    hi[j] += eps;
                    let mut lo = v.clone();
                    lo[j] -= eps;
                    let fd = (grain_g(d, &hi) - grain_g(d, &lo)) / (2.0 * eps);
                    assert!((g[j] - fd).abs() < 1e-6, "d={d} j={j}");
                }
                // constant bound (softmax average of unit-deficient rows)
                let norm: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(norm <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn transform_round_trip_and_diagonal() {
        let mut rng = StdRng::seed_from_u64(211);
        for d in 2..=4 {
            let lambda: f64 = 37.0;
            // diagonal point lambda^{-1/d}(1,..,1) -> (0, 0)
            let z0 = vec![lambda.powf(-1.0 / d as f64); d];
            let w0 = scaling_transform(&z0, lambda).unwrap();
            assert!(w0.v.iter().all(|x| x.abs() < 1e-12));
            assert!(w0.h.abs() < 1e-12);
            for _ in 0..1000 / d {
                let z: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 3.0 + 1e-3).collect();
                let w = scaling_transform(&z, lambda).unwrap();
                let back = inverse_transform(&w, lambda);
                for (a, b) in z.iter().zip(&back) {
                    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
                }
            }
            // pseudo-hyperboloid prod z_i = c/lambda maps to h = log(c)/d
            let c = 5.0;
            for _ in 0..50 {
                let mut z: Vec<f64> =
                    (0..d - 1).map(|_| rng.gen::<f64>() * 2.0 + 0.1).collect();
                let prod: f64 = z.iter().product();
                z.push(c / lambda / prod);
                let w = scaling_transform(&z, lambda).unwrap();
                assert!((w.h - c.ln() / d as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn non_positive_coordinate_rejected() {
        assert!(matches!(
            scaling_transform(&[1.0, 0.0], 10.0),
            Err(RescaledError::NonPositiveCoordinate)
        ));
        assert!(matches!(
            halfspace_to_grain(&[-1.0, 2.0], 10.0),
            Err(RescaledError::NonPositiveCoordinate)
        ));
    }

    #[test]
    fn grain_duality() {
        let mut rng = StdRng::seed_from_u64(213);
        for d in 2..=4 {
            for _ in 0..1000 / d {
                let w = rand_point(&mut rng, d, 6.0);
                let wp = rand_point(&mut rng, d, 6.0);
                let up = Grain::up(wp.clone());
                let down = Grain::down(w.clone());
                let m_up = up.margin(d, &w);
                let m_down = down.margin(d, &wp);
                assert!((m_up - m_down).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn halfspace_grain_membership_agreement() {
        let mut rng = StdRng::seed_from_u64(217);
        for d in 2..=3 {
            let lambda = 50.0;
            for _ in 0..1000 / d {
                let z0: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 + 0.05).collect();
                let z: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 + 0.05).collect();
                let grain = halfspace_to_grain(&z0, lambda).unwrap();
                // apex height = (1/d) log(lambda prod z0_i)
                let want_h = (lambda * z0.iter().product::<f64>()).ln() / d as f64;
                assert!((grain.apex.h - want_h).abs() < 1e-10);
                let lhs: f64 = z.iter().zip(&z0).map(|(a, b)| a / b).sum();
                let w = scaling_transform(&z, lambda).unwrap();
                let inside_halfspace = lhs < d as f64 - 1e-10;
                let outside_halfspace = lhs > d as f64 + 1e-10;
                if inside_halfspace {
                    assert!(grain.contains(d, &w));
                } else if outside_halfspace {
                    assert!(!grain.contains(d, &w));
                }
            }
        }
    }

    #[test]
    fn cone_peel_trivial_cases() {
        let w = RescaledPoint::new(vec![0.3], 0.1);
        let res = cone_peel(&[w.clone()], 1.0);
        assert_eq!(res.label[&0], 1);
        assert!(!res.stalled);
        // a point strictly inside the other's down grain sits corner-ward
        // of every tangent halfspace of that point: it peels first and
        // blocks the upper point's witnessing grains until it is removed
        let dominated = RescaledPoint::new(vec![0.35], w.h - grain_g(2, &[0.05]) - 0.3);
        assert!(Grain::down(w.clone()).contains(2, &dominated));
        let res = cone_peel(&[w, dominated], 1.0);
        assert_eq!(res.label[&1], 1);
        assert_eq!(res.label[&0], 2);
    }

    #[test]
    fn cone_peel_monotone_under_addition() {
        let mut rng = StdRng::seed_from_u64(219);
        for _ in 0..1000 {
            let base: Vec<RescaledPoint> =
                (0..8).map(|_| rand_point(&mut rng, 2, 4.0)).collect();
            let mut bigger = base.clone();
            for _ in 0..3 {
                bigger.push(rand_point(&mut rng, 2, 4.0));
            }
            let small = cone_peel(&base, 1.0);
            let big = cone_peel(&bigger, 1.0);
            for i in 0..base.len() as u64 {
                assert!(big.label[&i] >= small.label[&i]);
            }
        }
    }

    #[test]
    fn cone_peel_vertical_shift_equivariance() {
        let mut rng = StdRng::seed_from_u64(223);
        for d in 2..=3 {
            for _ in 0..40 {
                let y: Vec<RescaledPoint> =
                    (0..9).map(|_| rand_point(&mut rng, d, 3.0)).collect();
                let c = rng.gen::<f64>() * 2.0 - 1.0;
                let shifted: Vec<RescaledPoint> = y
                    .iter()
                    .map(|w| RescaledPoint::new(w.v.clone(), w.h + c))
                    .collect();
                let lambda = 7.0;
                let lambda2 = lambda * (d as f64 * c).exp();
                let a = cone_peel(&y, lambda);
                let b = cone_peel(&shifted, lambda2);
                assert_eq!(a.label, b.label);
            }
        }
    }

    #[test]
    fn cone_labels_never_below_convex_labels() {
        // cone peeling removes a subset of each convex layer, so labels
        // can only grow
        use crate::peeling::peel;
        let mut rng = StdRng::seed_from_u64(227);
        for d in 2..=3 {
            for _ in 0..20 {
                let y: Vec<RescaledPoint> =
                    (0..12).map(|_| rand_point(&mut rng, d, 3.0)).collect();
                let pts: Vec<Vec<f64>> =
                    y.iter().map(|w| inverse_transform(w, 1.0)).collect();
                let ps = PointSet::from_coords(d, &pts);
                let convex = peel(&ps, None);
                let cone = cone_peel(&y, 1.0);
                for i in 0..y.len() as u64 {
                    assert!(cone.label[&i] >= convex.label[&i]);
                }
            }
        }
    }

    #[test]
    fn stabilization_trivial_and_monotone_survival() {
        let w0 = RescaledPoint::new(vec![0.0], 0.0);
        let grid = [0.5, 1.0, 2.0];
        let r = stabilization_radius(&w0, &[], ScoreKind::LayerIndicator { n: 1 }, &grid);
        assert_eq!(r, 0.5);
        // empirical survival of R is nonincreasing by construction
        let mut rng = StdRng::seed_from_u64(229);
        let grid: Vec<f64> = (1..=6).map(|i| i as f64 * 0.8).collect();
        let mut radii = Vec::new();
        for _ in 0..40 {
            let y: Vec<RescaledPoint> =
                (0..25).map(|_| rand_point(&mut rng, 2, 8.0)).collect();
            radii.push(stabilization_radius(
                &w0,
                &y,
                ScoreKind::LayerIndicator { n: 2 },
                &grid,
            ));
        }
        let surv: Vec<f64> = grid
            .iter()
            .map(|&r| radii.iter().filter(|&&x| x >= r).count() as f64 / 40.0)
            .collect();
        for w in surv.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}

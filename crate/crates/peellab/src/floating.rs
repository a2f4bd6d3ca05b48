//! Floating bodies in the corner regime: the minimal-cap-volume function v,
//! the sandwiching shell parameters (s, T, T*) and the sandwich event over
//! a peeling.

use serde::Serialize;
use thiserror::Error;

use crate::geom::PointSet;
use crate::peeling::PeelingResult;
use crate::polytope::{CornerFrame, HPolytope, PolytopeError};

#[derive(Debug, Error)]
pub enum FloatingError {
    #[error("coordinate {0} out of the corner regime (0, 1/2]")]
    OutOfRegime(f64),
    #[error("point maps outside all corner boxes [0,1/2]^d")]
    RegimeViolation,
    #[error("peeling has no layer {0}")]
    LayerMissing(usize),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// Shell parameters for the sandwiching event at intensity lambda.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FloatingParams {
    pub lambda: f64,
    pub d: usize,
    pub s: f64,
    pub t: f64,
    pub t_star: f64,
    pub alpha: f64,
    /// true when alpha came from an override instead of the formula
    pub alpha_overridden: bool,
}

/// alpha = 16 * 2^{-d} * (6d)^{2d} * (4d^2 + d - 1).
pub fn alpha_formula(d: usize) -> f64 {
    let df = d as f64;
    16.0 * 2f64.powi(-(d as i32)) * (6.0 * df).powi(2 * d as i32)
        * (4.0 * df * df + df - 1.0)
}

/// Exponent of log(lambda) in the inner radius s: 4d^2 + d - 1.
pub fn log_exponent(d: usize) -> u32 {
    (4 * d * d + d - 1) as u32
}

/// s = 1/(lambda log^{4d^2+d-1} lambda), T = alpha loglog(lambda)/lambda,
/// T* = d 6^d T.
pub fn sandwich_params(lambda: f64, d: usize, alpha_override: Option<f64>) -> FloatingParams {
    assert!(lambda > std::f64::consts::E.powf(std::f64::consts::E), "lambda must exceed e^e");
    let (alpha, overridden) = match alpha_override {
        Some(a) => (a, true),
        None => (alpha_formula(d), false),
    };
    let s = 1.0 / (lambda * lambda.ln().powi(log_exponent(d) as i32));
    let t = alpha * lambda.ln().ln() / lambda;
    let t_star = d as f64 * 6f64.powi(d as i32) * t;
    FloatingParams { lambda, d, s, t, t_star, alpha, alpha_overridden: overridden }
}

/// Minimal cap volume through z in the corner regime of the unit-volume
/// corner chart: t = (d^d / d!) prod z_i, valid for z in (0, 1/2]^d.
pub fn v_cube_corner(z: &[f64]) -> Result<f64, FloatingError> {
    let d = z.len();
    let mut prod = 1.0;
    for &zi in z {
        if zi <= 0.0 || zi > 0.5 {
            return Err(FloatingError::OutOfRegime(zi));
        }
        prod *= zi;
    }
    let mut fact = 1.0;
    let mut pow = 1.0;
    for i in 1..=d {
        fact *= i as f64;
        pow *= d as f64;
    }
    Ok(pow / fact * prod)
}

/// Classification of z against the floating body K(v >= t).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Membership {
    /// v(z) < t: outside the floating body, in the shell toward the boundary
    Below,
    /// v(z) = t within 1e-10
    On,
    /// v(z) > t: inside the floating body
    Above,
}

/// K normalized to unit volume together with its corner frames, ready for
/// corner-regime evaluations of v.
pub struct FloatingBody {
    normalized: HPolytope,
    frames: Vec<CornerFrame>,
    /// linear rescale applied to input points: z -> scale * z
    scale: f64,
}

impl FloatingBody {
    pub fn new(k: &HPolytope) -> Result<Self, FloatingError> {
        let scale = k.volume().powf(-1.0 / k.dim() as f64);
        let normalized = k.scaled(scale)?;
        let frames: Result<Vec<CornerFrame>, PolytopeError> =
            (0..normalized.vertices().len()).map(|i| normalized.corner_frame(i)).collect();
        Ok(FloatingBody { normalized, frames: frames?, scale })
    }

    pub fn normalized(&self) -> &HPolytope {
        &self.normalized
    }

    /// Corner chart coordinates of z through the frame of the nearest
    /// vertex of the normalized body.
    pub fn corner_coords(&self, z: &[f64]) -> Vec<f64> {
        let zn: Vec<f64> = z.iter().map(|&x| x * self.scale).collect();
        let nearest = self
            .normalized
            .vertices()
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da: f64 = a.iter().zip(&zn).map(|(p, q)| (p - q) * (p - q)).sum();
                let db: f64 = b.iter().zip(&zn).map(|(p, q)| (p - q) * (p - q)).sum();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
            .0;
        self.frames[nearest].apply(&zn)
    }

    /// Minimal cap volume of z in the unit-volume normalization.
    pub fn v(&self, z: &[f64]) -> Result<f64, FloatingError> {
        let y = self.corner_coords(z);
        v_cube_corner(&y).map_err(|_| FloatingError::RegimeViolation)
    }

    /// Classify z against K(v >= t); t is in unit-volume cap units.
    pub fn membership(&self, z: &[f64], t: f64) -> Result<Membership, FloatingError> {
        let v = self.v(z)?;
        Ok(if (v - t).abs() <= 1e-10 {
            Membership::On
        } else if v > t {
            Membership::Above
        } else {
            Membership::Below
        })
    }
}

/// Outcome of the sandwiching test.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichOutcome {
    pub event: bool,
    /// points with s <= v <= T*
    pub shell_point_count: usize,
    /// the event includes the second inclusion K(v >= T*) subset conv_n,
    /// which is stricter than the shell containment alone
    pub strict_inclusion_checked: bool,
}

/// True iff the first n layers lie in the shell {s <= v <= T*} and every
/// point with v >= T* survives past layer n.
pub fn sandwich_event(
    pr: &PeelingResult,
    ps: &PointSet,
    fb: &FloatingBody,
    params: &FloatingParams,
    n: u32,
) -> Result<SandwichOutcome, FloatingError> {
    if (n as usize) > pr.layers.len() {
        return Err(FloatingError::LayerMissing(n as usize));
    }
    let mut event = true;
    let mut shell = 0usize;
    for (id, coords) in ps.iter() {
        let v = fb.v(coords)?;
        if v >= params.s && v <= params.t_star {
            shell += 1;
        }
        let label = pr.label.get(&id).copied().unwrap_or(u32::MAX);
        if label <= n && !(params.s <= v && v <= params.t_star) {
            event = false;
        }
        if v >= params.t_star && label <= n {
            event = false;
        }
    }
    Ok(SandwichOutcome { event, shell_point_count: shell, strict_inclusion_checked: true })
}

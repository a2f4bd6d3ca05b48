//! Sign-exact orientation predicates.
//!
//! Determinants are evaluated in floating point together with a forward
//! error bound; when the bound does not certify the sign, the computation
//! is redone in exact rational arithmetic. Inputs are `f64`, so the
//! rational conversion is lossless.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of_f64(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Pos
        } else if x < 0.0 {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }
}

const EPS: f64 = f64::EPSILON;

/// det and a bound on its absolute rounding error, by cofactor expansion.
/// `mag` accumulates the permanent of absolute values, which dominates the
/// error up to a dimension-dependent constant.
fn det_with_mag(m: &[f64], n: usize) -> (f64, f64) {
    debug_assert_eq!(m.len(), n * n);
    match n {
        1 => (m[0], m[0].abs()),
        2 => {
            let d = m[0] * m[3] - m[1] * m[2];
            let mag = (m[0] * m[3]).abs() + (m[1] * m[2]).abs();
            (d, mag)
        }
        _ => {
            let mut det = 0.0;
            let mut mag = 0.0;
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
                let (sub, sub_mag) = det_with_mag(&minor, n - 1);
                let term = m[col] * sub;
                if col % 2 == 0 {
                    det += term;
                } else {
                    det -= term;
                }
                mag += m[col].abs() * sub_mag;
            }
            (det, mag)
        }
    }
}

fn det_exact(m: &[BigRational], n: usize) -> BigRational {
    debug_assert_eq!(m.len(), n * n);
    if n == 1 {
        return m[0].clone();
    }
    let mut det = BigRational::zero();
    for col in 0..n {
        if m[col].is_zero() {
            continue;
        }
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for r in 1..n {
            for c in 0..n {
                if c != col {
                    minor.push(m[r * n + c].clone());
                }
            }
        }
        let term = &m[col] * det_exact(&minor, n - 1);
        if col % 2 == 0 {
            det += term;
        } else {
            det -= term;
        }
    }
    det
}

pub fn rational_of(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| BigRational::from(BigInt::from(0)))
}

/// Sign of the determinant of a dense n-by-n matrix of f64 entries, exact.
pub fn det_sign(m: &[f64], n: usize) -> Sign {
    let (det, mag) = det_with_mag(m, n);
    // generous constant: n! terms, each with < 2n rounding steps
    let bound = mag * EPS * (4 * n * n) as f64;
    if det.abs() > bound {
        return Sign::of_f64(det);
    }
    if mag == 0.0 {
        return Sign::Zero;
    }
    let exact: Vec<BigRational> = m.iter().map(|&x| rational_of(x)).collect();
    let d = det_exact(&exact, n);
    if d.is_zero() {
        Sign::Zero
    } else if d.is_positive() {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// Orientation of point `q` relative to the oriented hyperplane through
/// `simplex` (d points in R^d): sign of det(s1-s0, ..., s_{d-1}-s0, q-s0).
pub fn orient(simplex: &[&[f64]], q: &[f64]) -> Sign {
    let d = q.len();
    debug_assert_eq!(simplex.len(), d);
    let s0 = simplex[0];
    let mut m = vec![0.0; d * d];
    for (r, s) in simplex.iter().skip(1).enumerate() {
        for c in 0..d {
            m[r * d + c] = s[c] - s0[c];
        }
    }
    for c in 0..d {
        m[(d - 1) * d + c] = q[c] - s0[c];
    }
    let (det, mag) = det_with_mag(&m, d);
    let bound = mag * EPS * (8 * d * d) as f64;
    if det.abs() > bound {
        return Sign::of_f64(det);
    }
    // exact path: differences of f64 are formed in rational arithmetic,
    // so there is no rounding at all
    let s0r: Vec<BigRational> = s0.iter().map(|&x| rational_of(x)).collect();
    let mut mr = Vec::with_capacity(d * d);
    for s in simplex.iter().skip(1) {
        for c in 0..d {
            mr.push(rational_of(s[c]) - &s0r[c]);
        }
    }
    for c in 0..d {
        mr.push(rational_of(q[c]) - &s0r[c]);
    }
    let dd = det_exact(&mr, d);
    if dd.is_zero() {
        Sign::Zero
    } else if dd.is_positive() {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// Fast 2D orientation: sign of cross(b-a, c-a).
pub fn orient2d(a: &[f64], b: &[f64], c: &[f64]) -> Sign {
    let detleft = (b[0] - a[0]) * (c[1] - a[1]);
    let detright = (b[1] - a[1]) * (c[0] - a[0]);
    let det = detleft - detright;
    let mag = detleft.abs() + detright.abs();
    if det.abs() > mag * (16.0 * EPS) {
        return Sign::of_f64(det);
    }
    if mag == 0.0 {
        return Sign::Zero;
    }
    let ax = rational_of(a[0]);
    let ay = rational_of(a[1]);
    let l = (rational_of(b[0]) - &ax) * (rational_of(c[1]) - &ay);
    let r = (rational_of(b[1]) - &ay) * (rational_of(c[0]) - &ax);
    let d = l - r;
    if d.is_zero() {
        Sign::Zero
    } else if d.is_positive() {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orient2d_exact_on_collinear() {
        // collinear points whose float cross product underflows to noise
        let a = [0.1, 0.1];
        let b = [0.3, 0.3];
        let c = [0.7, 0.7];
        assert_eq!(orient2d(&a, &b, &c), Sign::Zero);
    }

    #[test]
    fn orient2d_matches_naive_on_clear_cases() {
        assert_eq!(orient2d(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]), Sign::Pos);
        assert_eq!(orient2d(&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]), Sign::Neg);
    }

    #[test]
    fn orient_3d_simplex() {
        let pts: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        assert_eq!(orient(&refs, &[0.0, 0.0, 1.0]), Sign::Pos);
        assert_eq!(orient(&refs, &[0.0, 0.0, -1.0]), Sign::Neg);
        assert_eq!(orient(&refs, &[0.25, 0.25, 0.0]), Sign::Zero);
    }

    #[test]
    fn det_sign_near_singular() {
        // rank-1 matrix scaled by tiny floats
        let m = [1e-8, 2e-8, 0.5e-8, 1e-8];
        assert_eq!(det_sign(&m, 2), Sign::Zero);
    }
}

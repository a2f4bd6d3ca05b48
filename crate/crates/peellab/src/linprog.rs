//! Small dense two-phase simplex: maximize c'x subject to equality and
//! upper-bound constraints with x >= 0. Sized for the tiny programs that
//! show up here (extremality certificates, cone membership), not for bulk
//! optimization. Bland's rule keeps it cycle-free.

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize, // structural + slack + artificial
    a: Vec<f64>, // rows x (cols + 1), last column is rhs
    obj: Vec<f64>, // cols + 1, last entry is objective value
    basis: Vec<usize>,
    n_struct: usize,
    n_slack: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.a[r * (self.cols + 1) + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let pv = self.at(pr, pc);
        for c in 0..w {
            self.a[pr * w + c] /= pv;
        }
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f != 0.0 {
                for c in 0..w {
                    self.a[r * w + c] -= f * self.a[pr * w + c];
                }
            }
        }
        let f = self.obj[pc];
        if f != 0.0 {
            for c in 0..w {
                self.obj[c] -= f * self.a[pr * w + c];
            }
        }
        self.basis[pr] = pc;
    }

    /// Bland's rule iteration until optimal or unbounded.
    /// `allowed` filters which columns may enter.
    fn optimize(&mut self, allowed: impl Fn(usize) -> bool) -> bool {
        let max_iters = 50 * (self.rows + self.cols + 10);
        for _ in 0..max_iters {
            let mut enter = None;
            for c in 0..self.cols {
                if allowed(c) && self.obj[c] > TOL {
                    enter = Some(c);
                    break;
                }
            }
            let pc = match enter {
                Some(c) => c,
                None => return true,
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let arc = self.at(r, pc);
                if arc > TOL {
                    let ratio = self.at(r, self.cols) / arc;
                    match leave {
                        Some((lr, lv)) => {
                            if ratio < lv - TOL
                                || (ratio < lv + TOL && self.basis[r] < self.basis[lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                        None => leave = Some((r, ratio)),
                    }
                }
            }
            match leave {
                Some((pr, _)) => self.pivot(pr, pc),
                None => return false, // unbounded
            }
        }
        // iteration cap: treat as optimal at current (conservative)
        true
    }
}

/// Maximize c'x subject to a_eq x = b_eq, a_ub x <= b_ub, x >= 0.
pub fn simplex(
    c: &[f64],
    a_eq: &[Vec<f64>],
    b_eq: &[f64],
    a_ub: &[Vec<f64>],
    b_ub: &[f64],
) -> LpOutcome {
    let n = c.len();
    let m_eq = a_eq.len();
    let m_ub = a_ub.len();
    let m = m_eq + m_ub;
    let cols = n + m_ub + m;
    let w = cols + 1;
    let mut t = Tableau {
        rows: m,
        cols,
        a: vec![0.0; m * w],
        obj: vec![0.0; w],
        basis: vec![0; m],
        n_struct: n,
        n_slack: m_ub,
    };
    for (i, row) in a_eq.iter().chain(a_ub.iter()).enumerate() {
        assert_eq!(row.len(), n);
        let b = if i < m_eq { b_eq[i] } else { b_ub[i - m_eq] };
        let neg = b < 0.0;
        let s = if neg { -1.0 } else { 1.0 };
        for (j, &v) in row.iter().enumerate() {
            *t.at_mut(i, j) = s * v;
        }
        if i >= m_eq {
            *t.at_mut(i, n + (i - m_eq)) = s; // slack
        }
        *t.at_mut(i, n + m_ub + i) = 1.0; // artificial
        *t.at_mut(i, cols) = s * b;
        t.basis[i] = n + m_ub + i;
    }

    // phase 1: maximize minus the sum of artificials; canonical form means
    // adding every constraint row into the objective row
    for j in 0..w {
        let mut s = 0.0;
        for r in 0..m {
            s += t.at(r, j);
        }
        t.obj[j] = s;
    }
    for i in 0..m {
        t.obj[n + m_ub + i] = 0.0;
    }
    let art_start = n + m_ub;
    t.optimize(|c| c < art_start);
    if t.obj[cols] > TOL {
        // wait: obj[cols] tracks sum of rhs = sum of artificials still basic
        return LpOutcome::Infeasible;
    }

    // pivot any remaining (degenerate, zero-valued) artificials out where a
    // nonzero structural entry exists
    for r in 0..m {
        if t.basis[r] >= art_start {
            if let Some(pc) = (0..art_start).find(|&c| t.at(r, c).abs() > TOL) {
                t.pivot(r, pc);
            }
        }
    }

    // phase 2
    let basis = t.basis.clone();
    for j in 0..w {
        t.obj[j] = if j < n { c[j] } else { 0.0 };
    }
    for (r, &bj) in basis.iter().enumerate() {
        let cb = if bj < n { c[bj] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..w {
                t.obj[j] -= cb * t.at(r, j);
            }
        }
    }
    // objective value sign: obj[cols] now holds -(c_B b); value = -obj[cols]
    if !t.optimize(|c| c < art_start) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.at(r, cols);
        }
    }
    let value: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    let _ = (t.n_struct, t.n_slack);
    LpOutcome::Optimal { x, value }
}

/// Feasibility of a_eq x = b_eq, a_ub x <= b_ub, x >= 0.
pub fn feasible(a_eq: &[Vec<f64>], b_eq: &[f64], a_ub: &[Vec<f64>], b_ub: &[f64]) -> bool {
    let n = a_eq.first().map_or_else(|| a_ub.first().map_or(0, |r| r.len()), |r| r.len());
    matches!(
        simplex(&vec![0.0; n], a_eq, b_eq, a_ub, b_ub),
        LpOutcome::Optimal { .. }
    )
}

/// Is point p a vertex of conv{points}? Certified by infeasibility of the
/// convex-combination program over the other points. Free coordinates are
/// split into positive and negative parts implicitly by the formulation:
/// only the nonnegative weights are variables, so no split is needed.
pub fn is_extreme_point(points: &[Vec<f64>], p_idx: usize) -> bool {
    let d = points[p_idx].len();
    let others: Vec<&Vec<f64>> =
        points.iter().enumerate().filter(|&(i, _)| i != p_idx).map(|(_, p)| p).collect();
    if others.is_empty() {
        return true;
    }
    let n = others.len();
    // sum mu_i x_i = p, sum mu_i = 1, mu >= 0
    let mut a_eq: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut b_eq = Vec::with_capacity(d + 1);
    for c in 0..d {
        a_eq.push(others.iter().map(|q| q[c]).collect());
        b_eq.push(points[p_idx][c]);
    }
    a_eq.push(vec![1.0; n]);
    b_eq.push(1.0);
    !feasible(&a_eq, &b_eq, &[], &[])
}

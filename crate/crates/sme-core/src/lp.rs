//! Dense two-phase simplex on the standard form `min c.x, A x = b, x >= 0`,
//! with an inequality-form wrapper. Dantzig pivoting with a Bland fallback
//! once the objective stalls, which rules out cycling.

pub const FEAS_TOL: f64 = 1e-9;
pub const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const STALL_LIMIT: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        value: f64,
        /// Basic column per tableau row (may include artificial indices >= n
        /// on degenerate redundant rows).
        basis: Vec<usize>,
    },
    Infeasible,
    Unbounded,
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("simplex iteration limit exceeded ({0} iterations)")]
    IterationLimit(usize),
}

struct Tableau {
    m: usize,
    width: usize,
    /// (m + 1) rows by (n + m + 1) columns; last row is the cost row, last
    /// column the rhs.
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.width + c] = v;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let piv = self.at(row, col);
        let inv = 1.0 / piv;
        for c in 0..w {
            self.data[row * w + c] *= inv;
        }
        self.set(row, col, 1.0);
        for r in 0..=self.m {
            if r == row {
                continue;
            }
            let factor = self.at(r, col);
            if factor == 0.0 {
                continue;
            }
            for c in 0..w {
                let v = self.at(row, c);
                self.data[r * w + c] -= factor * v;
            }
            self.set(r, col, 0.0);
        }
        self.basis[row] = col;
    }

    /// Runs simplex over the allowed columns. Returns false on unbounded.
    /// With `phase1` set, a column with no admissible pivot row is a roundoff
    /// artifact (the phase-1 objective is bounded below by zero), so it is
    /// neutralized instead of reported as unbounded.
    fn iterate(
        &mut self,
        allowed: usize,
        phase1: bool,
        iter_budget: &mut usize,
    ) -> Result<bool, LpError> {
        let cost_row = self.m;
        let mut stall = 0usize;
        let mut last_obj = self.at(cost_row, self.width - 1);
        let mut bland = false;
        loop {
            // Entering column.
            let mut enter = None;
            if bland {
                for c in 0..allowed {
                    if self.at(cost_row, c) < -OPT_TOL {
                        enter = Some(c);
                        break;
                    }
                }
            } else {
                let mut best = -OPT_TOL;
                for c in 0..allowed {
                    let rc = self.at(cost_row, c);
                    if rc < best {
                        best = rc;
                        enter = Some(c);
                    }
                }
            }
            let Some(col) = enter else {
                return Ok(true);
            };

            // Ratio test.
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.m {
                let a = self.at(r, col);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, self.width - 1) / a;
                    let better = ratio < best_ratio - 1e-12
                        || (ratio < best_ratio + 1e-12
                            && leave.is_some_and(|l| self.basis[r] < self.basis[l]));
                    if better {
                        best_ratio = ratio;
                        leave = Some(r);
                    }
                }
            }
            let Some(row) = leave else {
                if phase1 {
                    self.set(cost_row, col, 0.0);
                    continue;
                }
                return Ok(false);
            };

            self.pivot(row, col);
            if *iter_budget == 0 {
                return Err(LpError::IterationLimit(0));
            }
            *iter_budget -= 1;

            // The rhs entry of the cost row holds minus the objective, so it
            // increases as the minimization makes progress.
            let obj = self.at(cost_row, self.width - 1);
            if obj > last_obj + 1e-12 {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }
        }
    }
}

/// Solves `min c.x  s.t.  A x = b, x >= 0` (dense `A`, row-major).
pub fn solve_standard(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpOutcome, LpError> {
    let m = a.len();
    let n = c.len();
    debug_assert!(b.len() == m);
    let width = n + m + 1;
    let mut t = Tableau {
        m,
        width,
        data: vec![0.0; (m + 1) * width],
        basis: (n..n + m).collect(),
    };
    for (i, row) in a.iter().enumerate() {
        debug_assert!(row.len() == n);
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for (j, &v) in row.iter().enumerate() {
            t.set(i, j, flip * v);
        }
        t.set(i, n + i, 1.0);
        t.set(i, width - 1, flip * b[i]);
    }

    // Phase 1: cost row for sum of artificials, eliminated over the basis.
    for j in 0..width {
        let mut s = 0.0;
        for i in 0..m {
            s += t.at(i, j);
        }
        let direct = if (n..n + m).contains(&j) { 1.0 } else { 0.0 };
        t.set(m, j, direct - s);
    }
    for i in 0..m {
        let j = t.basis[i];
        t.set(m, j, 0.0);
    }

    let mut budget = 200 * (m + n) + 20_000;
    let bounded = t.iterate(n, true, &mut budget)?;
    debug_assert!(bounded, "phase 1 is always bounded");
    let phase1 = -t.at(m, width - 1);
    if phase1 > FEAS_TOL * (1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))) {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive basic artificials out where a structural pivot exists.
    for r in 0..m {
        if t.basis[r] >= n {
            let mut col = None;
            for j in 0..n {
                if t.at(r, j).abs() > 1e-8 {
                    col = Some(j);
                    break;
                }
            }
            if let Some(j) = col {
                t.pivot(r, j);
            }
        }
    }

    // Phase 2 cost row rebuilt from the true objective.
    for j in 0..width {
        let direct = if j < n { c[j] } else { 0.0 };
        t.set(m, j, direct);
    }
    t.set(m, width - 1, 0.0);
    for i in 0..m {
        let bj = t.basis[i];
        let cb = if bj < n { c[bj] } else { 0.0 };
        if cb == 0.0 {
            continue;
        }
        for j in 0..width {
            let v = t.at(i, j);
            if v != 0.0 {
                let cur = t.at(m, j);
                t.set(m, j, cur - cb * v);
            }
        }
    }
    let bounded = t.iterate(n, false, &mut budget)?;
    if !bounded {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.at(r, width - 1);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpOutcome::Optimal {
        x,
        value,
        basis: t.basis,
    })
}

/// Inequality-form problem `min c.x  s.t.  A x <= b` with the first `n_free`
/// variables free and the remaining `n_nonneg` nonnegative.
pub struct IneqProblem {
    pub n_free: usize,
    pub n_nonneg: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<(Vec<f64>, f64)>,
}

pub fn solve_inequalities(p: &IneqProblem) -> Result<LpOutcome, LpError> {
    let nv = p.n_free + p.n_nonneg;
    debug_assert!(p.objective.len() == nv);
    let m = p.constraints.len();
    // Structural layout: [free+, free-, nonneg, slack].
    let n = 2 * p.n_free + p.n_nonneg + m;
    let mut c = vec![0.0; n];
    for j in 0..p.n_free {
        c[j] = p.objective[j];
        c[p.n_free + j] = -p.objective[j];
    }
    for j in 0..p.n_nonneg {
        c[2 * p.n_free + j] = p.objective[p.n_free + j];
    }
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, (a, b)) in p.constraints.iter().enumerate() {
        debug_assert!(a.len() == nv);
        let mut row = vec![0.0; n];
        for j in 0..p.n_free {
            row[j] = a[j];
            row[p.n_free + j] = -a[j];
        }
        for j in 0..p.n_nonneg {
            row[2 * p.n_free + j] = a[p.n_free + j];
        }
        row[2 * p.n_free + p.n_nonneg + i] = 1.0;
        rows.push(row);
        rhs.push(*b);
    }
    match solve_standard(&c, &rows, &rhs)? {
        LpOutcome::Optimal { x, value, basis } => {
            let mut sol = vec![0.0; nv];
            for j in 0..p.n_free {
                sol[j] = x[j] - x[p.n_free + j];
            }
            for j in 0..p.n_nonneg {
                sol[p.n_free + j] = x[2 * p.n_free + j];
            }
            Ok(LpOutcome::Optimal {
                x: sol,
                value,
                basis,
            })
        }
        other => Ok(other),
    }
}

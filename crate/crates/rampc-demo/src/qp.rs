//! Small dense quadratic programs `min 1/2 v' H v + f' v  s.t.  A v <= b`
//! solved by Hildreth's dual coordinate ascent. The controller's programs
//! have at most a handful of variables, so the O(m^2) sweeps are trivial.

use nalgebra::{Cholesky, DMatrix, DVector};

pub struct QpResult {
    pub v: DVector<f64>,
    pub converged: bool,
}

pub fn solve_qp(h: &DMatrix<f64>, f: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> QpResult {
    let chol = Cholesky::new(h.clone()).expect("cost Hessian must be positive definite");
    let unconstrained = -chol.solve(f);
    let m = a.nrows();
    if m == 0 || (a * &unconstrained - b).iter().all(|&s| s <= 1e-12) {
        return QpResult {
            v: unconstrained,
            converged: true,
        };
    }
    // Dual problem matrices: P = A H^{-1} A', q = b + A H^{-1} f.
    let hinv_at = chol.solve(&a.transpose());
    let p = a * &hinv_at;
    let q = b + a * chol.solve(f);
    let mut lambda: DVector<f64> = DVector::zeros(m);
    let mut converged = false;
    for _ in 0..5_000 {
        let mut delta: f64 = 0.0;
        for i in 0..m {
            let pii = p[(i, i)];
            if pii <= 1e-14 {
                continue;
            }
            let mut s = q[i];
            for j in 0..m {
                if j != i {
                    s += p[(i, j)] * lambda[j];
                }
            }
            let new: f64 = (-s / pii).max(0.0);
            delta = delta.max((new - lambda[i]).abs());
            lambda[i] = new;
        }
        if delta < 1e-12 {
            converged = true;
            break;
        }
    }
    let v = -chol.solve(&(f + a.transpose() * &lambda));
    QpResult { v, converged }
}

//! Minimax (Chebyshev) residual regression and the data-driven bound on the
//! unknown disturbance magnitude.

use nalgebra::{DMatrix, DVector};
use sysid_sim::Trajectory;

use crate::lp::{solve_inequalities, IneqProblem, LpOutcome};
use crate::set::MembershipSet;
use crate::SmeError;

/// Result of the minimax fit `min_theta max_t |x_{t+1} - theta z_t|_inf`.
#[derive(Debug, Clone)]
pub struct WmaxFit {
    /// The optimal minimax residual: a lower bound on any box radius that is
    /// consistent with the data.
    pub w_bar: f64,
    pub theta_fit: DMatrix<f64>,
    pub per_row: Vec<f64>,
}

/// Minimax regression over the trajectory. The infinity norm decouples over
/// rows, so each row is an independent LP solved by a cutting-plane loop on a
/// small active subset of time steps.
pub fn estimate_wmax_lower(traj: &Trajectory) -> Result<WmaxFit, SmeError> {
    let n_x = traj.n_x;
    let n_z = traj.n_z();
    if traj.steps.is_empty() {
        return Err(SmeError::DimensionMismatch {
            context: "trajectory length",
            expected: 1,
            got: 0,
        });
    }
    let mut theta_fit = DMatrix::zeros(n_x, n_z);
    let mut per_row = Vec::with_capacity(n_x);
    for j in 0..n_x {
        let (w_j, theta_j) = chebyshev_row_fit(traj, j)?;
        per_row.push(w_j);
        for k in 0..n_z {
            theta_fit[(j, k)] = theta_j[k];
        }
    }
    let w_bar = per_row.iter().cloned().fold(0.0f64, f64::max);
    Ok(WmaxFit {
        w_bar,
        theta_fit,
        per_row,
    })
}

fn chebyshev_row_fit(traj: &Trajectory, row: usize) -> Result<(f64, DVector<f64>), SmeError> {
    let n_z = traj.n_z();
    let t_len = traj.len();
    // Active subset of time steps; grown by worst violators until the subset
    // optimum is feasible for the whole trajectory.
    let mut active: Vec<usize> = (0..t_len.min(n_z + 1)).collect();
    let mut in_active = vec![false; t_len];
    for &t in &active {
        in_active[t] = true;
    }
    let mut theta = DVector::zeros(n_z);
    let mut w = 0.0;
    for _ in 0..500 {
        let mut constraints = Vec::with_capacity(2 * active.len());
        for &t in &active {
            let step = &traj.steps[t];
            let y = step.x_next[row];
            let mut pos: Vec<f64> = step.z.iter().cloned().collect();
            pos.push(-1.0);
            constraints.push((pos, y));
            let mut neg: Vec<f64> = step.z.iter().map(|v| -v).collect();
            neg.push(-1.0);
            constraints.push((neg, -y));
        }
        let mut objective = vec![0.0; n_z + 1];
        objective[n_z] = 1.0;
        let p = IneqProblem {
            n_free: n_z,
            n_nonneg: 1,
            objective,
            constraints,
        };
        match solve_inequalities(&p)? {
            LpOutcome::Optimal { x, value, .. } => {
                theta = DVector::from_vec(x[..n_z].to_vec());
                w = value.max(0.0);
            }
            LpOutcome::Infeasible => return Err(SmeError::InfeasibleRow { row }),
            LpOutcome::Unbounded => return Err(SmeError::UnboundedRow { row }),
        }
        // Worst violator over the full trajectory.
        let mut worst = 0.0;
        let mut worst_t = None;
        for (t, step) in traj.steps.iter().enumerate() {
            if in_active[t] {
                continue;
            }
            let resid = (step.x_next[row] - theta.dot(&step.z)).abs();
            if resid > worst {
                worst = resid;
                worst_t = Some(t);
            }
        }
        match worst_t {
            Some(t) if worst > w + 1e-9 * (1.0 + w) => {
                active.push(t);
                in_active[t] = true;
            }
            _ => return Ok((w, theta)),
        }
    }
    Ok((w, theta))
}

/// Data-driven shrinking margin `beta * n_x^{3/2} n_z^2 max_t |x_t| / T`.
pub fn ucb_delta(t_len: usize, n_x: usize, n_z: usize, max_state_norm: f64, beta: f64) -> f64 {
    assert!(t_len > 0);
    beta * (n_x as f64).powf(1.5) * (n_z as f64).powi(2) * max_state_norm / t_len as f64
}

/// Membership set built without knowing the true disturbance bound: the
/// minimax residual is inflated by the shrinking margin `ucb_delta`.
#[derive(Debug, Clone)]
pub struct UcbFit {
    /// Inflated bound actually used by the set.
    pub w_hat: f64,
    /// Raw minimax residual.
    pub w_bar: f64,
    pub theta_fit: DMatrix<f64>,
    pub set: MembershipSet,
}

pub fn ucb_sme_fit(traj: &Trajectory, beta: f64) -> Result<UcbFit, SmeError> {
    let fit = estimate_wmax_lower(traj)?;
    let delta = ucb_delta(
        traj.len(),
        traj.n_x,
        traj.n_z(),
        traj.max_state_norm(),
        beta,
    );
    let w_hat = fit.w_bar + delta;
    let set = MembershipSet::from_trajectory(traj, w_hat)?;
    Ok(UcbFit {
        w_hat,
        w_bar: fit.w_bar,
        theta_fit: fit.theta_fit,
        set,
    })
}

//! Regularized least-squares estimation with a self-normalized confidence
//! ellipsoid, the baseline the membership-set estimator is compared against.

use nalgebra::{Cholesky, DMatrix, DVector};
use sysid_sim::Trajectory;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LseError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("gram matrix is not positive definite")]
    SingularGram,
}

/// Ridge-regression fit `theta_hat = (sum x_next z^T) V^{-1}` with
/// `V = lambda I + sum z z^T`.
#[derive(Debug, Clone)]
pub struct LseFit {
    pub theta_hat: DMatrix<f64>,
    pub gram: DMatrix<f64>,
    pub lambda: f64,
    pub samples: usize,
}

pub fn fit_lse(traj: &Trajectory, lambda: f64) -> Result<LseFit, LseError> {
    if lambda <= 0.0 {
        return Err(LseError::InvalidParameter(format!(
            "regularization must be positive, got {lambda}"
        )));
    }
    if traj.steps.is_empty() {
        return Err(LseError::EmptyTrajectory);
    }
    let n_x = traj.n_x;
    let n_z = traj.n_z();
    let mut gram = DMatrix::identity(n_z, n_z) * lambda;
    let mut cross = DMatrix::zeros(n_x, n_z);
    for step in &traj.steps {
        gram += &step.z * step.z.transpose();
        cross += &step.x_next * step.z.transpose();
    }
    let chol = Cholesky::new(gram.clone()).ok_or(LseError::SingularGram)?;
    // theta V = cross  <=>  V theta^T = cross^T.
    let theta_hat = chol.solve(&cross.transpose()).transpose();
    Ok(LseFit {
        theta_hat,
        gram,
        lambda,
        samples: traj.len(),
    })
}

/// Per-row confidence ellipsoid
/// `{theta_j : (theta_j - theta_hat_j) V (theta_j - theta_hat_j)^T <= radius^2}`.
#[derive(Debug, Clone)]
pub struct ConfidenceRegion {
    pub fit: LseFit,
    pub radius: f64,
    pub delta: f64,
    pub param_norm_bound: f64,
    pub variance_proxy: f64,
}

/// Self-normalized ellipsoid radius
/// `L sqrt(2 log(1/delta) + log det V - log det lambda I) + sqrt(lambda) S`.
pub fn ay_region(
    traj: &Trajectory,
    lambda: f64,
    delta: f64,
    param_norm_bound: f64,
    variance_proxy: f64,
) -> Result<ConfidenceRegion, LseError> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(LseError::InvalidParameter(format!(
            "failure probability must be in (0, 1), got {delta}"
        )));
    }
    if param_norm_bound < 0.0 || variance_proxy <= 0.0 {
        return Err(LseError::InvalidParameter(
            "norm bound must be nonnegative and the variance proxy positive".into(),
        ));
    }
    let fit = fit_lse(traj, lambda)?;
    let radius = region_radius(&fit, delta, param_norm_bound, variance_proxy)?;
    Ok(ConfidenceRegion {
        fit,
        radius,
        delta,
        param_norm_bound,
        variance_proxy,
    })
}

fn region_radius(
    fit: &LseFit,
    delta: f64,
    param_norm_bound: f64,
    variance_proxy: f64,
) -> Result<f64, LseError> {
    let n_z = fit.gram.nrows();
    let chol = Cholesky::new(fit.gram.clone()).ok_or(LseError::SingularGram)?;
    let log_det_v: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let log_det_reg = n_z as f64 * fit.lambda.ln();
    let inner = 2.0 * (1.0 / delta).ln() + log_det_v - log_det_reg;
    Ok(variance_proxy * inner.max(0.0).sqrt() + fit.lambda.sqrt() * param_norm_bound)
}

impl ConfidenceRegion {
    /// Smallest gram eigenvalue, which sets the longest ellipsoid semi-axis.
    pub fn lambda_min_gram(&self) -> f64 {
        self.fit
            .gram
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Frobenius diameter `2 radius sqrt(n_x) / sqrt(lambda_min(V))`: every
    /// row shares the same ellipsoid shape, so the row diameters compose by
    /// the square-root-of-sum-of-squares rule.
    pub fn diameter(&self) -> f64 {
        let n_x = self.fit.theta_hat.nrows() as f64;
        2.0 * self.radius * n_x.sqrt() / self.lambda_min_gram().sqrt()
    }

    /// True iff every row of `theta` lies in its ellipsoid.
    pub fn contains(&self, theta: &DMatrix<f64>) -> bool {
        let n_x = self.fit.theta_hat.nrows();
        (0..n_x).all(|j| {
            let diff = DVector::from_fn(self.fit.theta_hat.ncols(), |k, _| {
                theta[(j, k)] - self.fit.theta_hat[(j, k)]
            });
            diff.dot(&(&self.fit.gram * &diff)) <= self.radius * self.radius + 1e-12
        })
    }
}

/// Variance proxy used by the baseline: 1 for the truncated Gaussian
/// disturbance and 4/3 for the uniform one.
pub fn variance_proxy_for(kind: &sysid_sim::DisturbanceKind) -> f64 {
    match kind {
        sysid_sim::DisturbanceKind::TruncatedGaussian { .. } => 1.0,
        _ => 4.0 / 3.0,
    }
}

//! Closed-form finite-sample failure bounds for the membership-set
//! estimator. Every formula is evaluated in log-space: the exponential
//! factors overflow `f64` already at moderate dimensions, yet the bounds
//! must still be comparable and reportable (clamped to 1 and flagged as
//! vacuous).

use sysid_sim::{check_pe, DisturbanceModel, Trajectory};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Block-martingale small-ball description of the regressor process:
/// directionwise second moment level `sigma_z` hit with probability at least
/// `p_z` per block, with `|z_t| <= b_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmsbParams {
    pub sigma_z: f64,
    pub p_z: f64,
    pub b_z: f64,
}

impl BmsbParams {
    pub fn new(sigma_z: f64, p_z: f64, b_z: f64) -> Result<Self, BoundError> {
        if !(sigma_z > 0.0 && b_z > 0.0) {
            return Err(BoundError::InvalidParameter(
                "sigma_z and b_z must be positive".into(),
            ));
        }
        if !(0.0 < p_z && p_z <= 1.0) {
            return Err(BoundError::InvalidParameter(format!(
                "p_z must lie in (0, 1], got {p_z}"
            )));
        }
        if sigma_z > b_z {
            return Err(BoundError::InvalidParameter(format!(
                "small-ball level {sigma_z} cannot exceed the regressor norm bound {b_z}"
            )));
        }
        Ok(Self { sigma_z, p_z, b_z })
    }
}

/// Derived constants of the failure bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub n_x: usize,
    pub n_u: usize,
    pub n_z: usize,
}

pub fn derive_constants(params: &BmsbParams, n_x: usize, n_u: usize) -> BoundConstants {
    let a1 = params.sigma_z * params.p_z / 4.0;
    BoundConstants {
        a1,
        a2: 64.0 * params.b_z * params.b_z / (params.sigma_z * params.sigma_z * params.p_z * params.p_z),
        a3: params.p_z * params.p_z / 8.0,
        a4: 4.0 * params.b_z * (n_x as f64).sqrt() / a1,
        a5: 4.0 / a1,
        n_x,
        n_u,
        n_z: n_x + n_u,
    }
}

/// `544 n^{2.5} log(n/eps) (1/eps)^n`, returned as (value, log-value).
pub fn covering_bound(n: usize, eps: f64) -> Result<(f64, f64), BoundError> {
    if !(0.0 < eps && eps < 0.5) {
        return Err(BoundError::InvalidParameter(format!(
            "covering resolution must lie in (0, 1/2), got {eps}"
        )));
    }
    let n_f = n as f64;
    let log_value =
        544f64.ln() + 2.5 * n_f.ln() + (n_f / eps).ln().ln() + n_f * (1.0 / eps).ln();
    Ok((log_value.exp(), log_value))
}

/// One failure-probability term kept in log-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// min(1, term1 + term2); probabilities above 1 carry no information.
    pub total: f64,
    pub term1: f64,
    pub term2: f64,
    pub log_term1: f64,
    pub log_term2: f64,
    pub vacuous: bool,
}

fn saturating_exp(log: f64) -> f64 {
    if log == f64::NEG_INFINITY {
        0.0
    } else if log > 700.0 {
        f64::INFINITY
    } else {
        log.exp()
    }
}

/// Probability that the membership-set diameter still exceeds `delta` after
/// `T` samples, split into `ceil(T/m)` blocks:
/// `544 (T/m) n_z^{2.5} log(a2 n_z) a2^{n_z} exp(-a3 m)`
/// ` + 544 n_x^{2.5} n_z^{2.5} log(a4 n_x n_z) a4^{n_x n_z} (1 - q_w(a1 delta / (4 sqrt n_x)))^{T/m}`.
pub fn sme_failure_bound(
    delta: f64,
    t_len: usize,
    m: usize,
    consts: &BoundConstants,
    dist: &DisturbanceModel,
) -> Result<BoundReport, BoundError> {
    if m == 0 || t_len <= m {
        return Err(BoundError::InvalidParameter(format!(
            "need T > m >= 1, got T={t_len}, m={m}"
        )));
    }
    if delta <= 0.0 {
        return Err(BoundError::InvalidParameter(format!(
            "diameter level must be positive, got {delta}"
        )));
    }
    let blocks = t_len.div_ceil(m) as f64;
    let n_x = consts.n_x as f64;
    let n_z = consts.n_z as f64;

    let log_term1 = 544f64.ln()
        + blocks.ln()
        + 2.5 * n_z.ln()
        + (consts.a2 * n_z).ln().ln()
        + n_z * consts.a2.ln()
        - consts.a3 * m as f64;

    let q = dist.q_w(consts.a1 * delta / (4.0 * n_x.sqrt()));
    let log_base = if q >= 1.0 { f64::NEG_INFINITY } else { (1.0 - q).ln() };
    let log_term2 = 544f64.ln()
        + 2.5 * n_x.ln()
        + 2.5 * n_z.ln()
        + (consts.a4 * n_x * n_z).ln().ln()
        + n_x * n_z * consts.a4.ln()
        + blocks * log_base;

    let term1 = saturating_exp(log_term1);
    let term2 = saturating_exp(log_term2);
    let raw = term1 + term2;
    Ok(BoundReport {
        total: raw.min(1.0),
        term1,
        term2,
        log_term1,
        log_term2,
        vacuous: !(raw < 1.0),
    })
}

/// Smallest block length making the first failure term at most `eps`:
/// `m >= (1/a3)(log(T/eps) + n_z log a2 + 2.5 log n_z + log log(a2 n_z) + 7)`.
pub fn choose_m(t_len: usize, eps: f64, consts: &BoundConstants) -> Result<usize, BoundError> {
    if t_len == 0 {
        return Err(BoundError::InvalidParameter("need T >= 1".into()));
    }
    if !(0.0 < eps && eps <= 1.0) {
        return Err(BoundError::InvalidParameter(format!(
            "failure budget must lie in (0, 1], got {eps}"
        )));
    }
    let n_z = consts.n_z as f64;
    let rhs = ((t_len as f64 / eps).ln()
        + n_z * consts.a2.ln()
        + 2.5 * n_z.ln().max(0.0)
        + (consts.a2 * n_z).ln().ln()
        + 7.0)
        / consts.a3;
    Ok((rhs.ceil() as usize).max(1))
}

/// Failure probability of the data-driven disturbance-bound estimate:
/// the first block term, the second term at level `delta / (2 b_z)`, and the
/// pure disturbance term `(1 - q_w(delta/2))^T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WmaxBoundReport {
    pub total: f64,
    pub t1: f64,
    pub t2: f64,
    pub t5: f64,
    pub vacuous: bool,
}

pub fn wmax_failure_bound(
    delta: f64,
    t_len: usize,
    m: usize,
    consts: &BoundConstants,
    dist: &DisturbanceModel,
    b_z: f64,
) -> Result<WmaxBoundReport, BoundError> {
    if b_z <= 0.0 {
        return Err(BoundError::InvalidParameter(
            "regressor norm bound must be positive".into(),
        ));
    }
    let scaled = sme_failure_bound(delta / (2.0 * b_z), t_len, m, consts, dist)?;
    let q = dist.q_w(delta / 2.0);
    let t5 = if q >= 1.0 {
        0.0
    } else {
        saturating_exp(t_len as f64 * (1.0 - q).ln())
    };
    let raw = scaled.term1 + scaled.term2 + t5;
    Ok(WmaxBoundReport {
        total: raw.min(1.0),
        t1: scaled.term1,
        t2: scaled.term2,
        t5,
        vacuous: !(raw < 1.0),
    })
}

/// Diameter guarantee for the membership set built with the inflated
/// data-driven disturbance bound: `delta_T (1 + a5 sqrt(n_x))`.
pub fn ucb_diam_bound(delta_t: f64, consts: &BoundConstants) -> f64 {
    assert!(delta_t >= 0.0);
    delta_t * (1.0 + consts.a5 * (consts.n_x as f64).sqrt())
}

/// Heuristic small-ball constants read off a trajectory: `b_z` is the
/// largest regressor norm, and the per-block excitation level is proxied by
/// the median of the block-minimum eigenvalues at level `p_z = 1/2`. This is
/// an empirical stand-in, not a certificate.
pub fn estimate_bmsb(traj: &Trajectory, m: usize) -> Result<BmsbParams, BoundError> {
    let mut mins = check_pe(traj, m);
    if mins.is_empty() {
        return Err(BoundError::InvalidParameter(
            "trajectory shorter than one block".into(),
        ));
    }
    mins.sort_by(|a, b| a.total_cmp(b));
    let median = mins[mins.len() / 2];
    let b_z = traj.max_regressor_norm();
    if b_z <= 0.0 {
        return Err(BoundError::InvalidParameter(
            "regressors are identically zero".into(),
        ));
    }
    let sigma_z = median.sqrt().clamp(1e-9, b_z);
    BmsbParams::new(sigma_z, 0.5, b_z)
}

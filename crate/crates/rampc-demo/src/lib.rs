//! Scalar tube-based robust adaptive MPC tracking demo. A pre-stabilized
//! scalar system `x_{t+1} = a x_t + b u_t + w_t` tracks a sinusoid under
//! hard state/input boxes while the model interval shrinks online, driven by
//! either the membership-set estimator, the least-squares ellipsoid, or the
//! true parameters.

mod qp;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sme_core::MembershipSet;
use sysid_sim::Trajectory;
use thiserror::Error;

pub use qp::{solve_qp, QpResult};

#[derive(Debug, Error)]
pub enum RampcError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("tightened constraints empty at step {step} (tube radius exceeds the state box)")]
    Infeasible { step: usize },
    #[error("estimator failure at step {step}: {message}")]
    Estimator { step: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Closed interval box for the scalar model pair (a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelInterval {
    pub a_lo: f64,
    pub a_hi: f64,
    pub b_lo: f64,
    pub b_hi: f64,
}

impl ModelInterval {
    pub fn singleton(a: f64, b: f64) -> Self {
        Self {
            a_lo: a,
            a_hi: a,
            b_lo: b,
            b_hi: b,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.a_lo <= self.a_hi && self.b_lo <= self.b_hi
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.a_lo + self.a_hi),
            0.5 * (self.b_lo + self.b_hi),
        )
    }

    pub fn half_widths(&self) -> (f64, f64) {
        (
            0.5 * (self.a_hi - self.a_lo),
            0.5 * (self.b_hi - self.b_lo),
        )
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        self.a_lo <= a && a <= self.a_hi && self.b_lo <= b && b <= self.b_hi
    }

    pub fn area(&self) -> f64 {
        (self.a_hi - self.a_lo) * (self.b_hi - self.b_lo)
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let out = Self {
            a_lo: self.a_lo.max(other.a_lo),
            a_hi: self.a_hi.min(other.a_hi),
            b_lo: self.b_lo.max(other.b_lo),
            b_hi: self.b_hi.min(other.b_hi),
        };
        out.is_valid().then_some(out)
    }

    /// Worst-case closed-loop contraction `max |a + b K|` over the corners.
    pub fn rho(&self, gain: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for a in [self.a_lo, self.a_hi] {
            for b in [self.b_lo, self.b_hi] {
                worst = worst.max((a + b * gain).abs());
            }
        }
        worst
    }
}

/// Reference trajectory and cost/constraint data of the tracking task.
#[derive(Debug, Clone, Copy)]
pub struct TrackingTask {
    pub q_weight: f64,
    pub r_weight: f64,
    pub x_max: f64,
    pub u_max: f64,
    pub episode_len: usize,
    pub target_amplitude: f64,
    pub target_period: f64,
}

impl Default for TrackingTask {
    fn default() -> Self {
        Self {
            q_weight: 1.0,
            r_weight: 0.1,
            x_max: 10.0,
            u_max: 10.0,
            episode_len: 400,
            target_amplitude: 8.0,
            target_period: 20.0,
        }
    }
}

impl TrackingTask {
    pub fn target(&self, t: usize) -> f64 {
        self.target_amplitude * (t as f64 / self.target_period).sin()
    }

    pub fn validate(&self) -> Result<(), RampcError> {
        if self.q_weight <= 0.0 || self.r_weight <= 0.0 {
            return Err(RampcError::InvalidConfig("weights must be positive".into()));
        }
        if self.x_max <= 0.0 || self.u_max <= 0.0 {
            return Err(RampcError::InvalidConfig(
                "constraint boxes must have positive half-width".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Sme,
    Lse,
    Oracle,
}

#[derive(Debug, Clone, Copy)]
pub struct TubeMpcConfig {
    pub horizon: usize,
    pub gain: f64,
    pub eta_max: f64,
    pub w_max: f64,
    pub theta0: ModelInterval,
}

impl Default for TubeMpcConfig {
    fn default() -> Self {
        Self {
            horizon: 5,
            gain: -1.0,
            eta_max: 0.01,
            w_max: 0.1,
            theta0: ModelInterval {
                a_lo: 1.0,
                a_hi: 1.2,
                b_lo: 0.9,
                b_hi: 1.1,
            },
        }
    }
}

impl TubeMpcConfig {
    pub fn validate(&self) -> Result<(), RampcError> {
        if self.horizon == 0 {
            return Err(RampcError::InvalidConfig("horizon must be positive".into()));
        }
        if self.eta_max < 0.0 || self.w_max < 0.0 {
            return Err(RampcError::InvalidConfig(
                "noise magnitudes must be nonnegative".into(),
            ));
        }
        if !self.theta0.is_valid() {
            return Err(RampcError::InvalidConfig("empty model interval".into()));
        }
        let rho = self.theta0.rho(self.gain);
        if rho >= 1.0 {
            return Err(RampcError::InvalidConfig(format!(
                "pre-stabilized closed loop must contract over the initial interval (rho = {rho})"
            )));
        }
        Ok(())
    }
}

/// Per-step controller diagnostics.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub u: f64,
    /// Optimized correction sequence v_0..v_{N-1}.
    pub corrections: Vec<f64>,
    /// Nominal state predictions x_1..x_N of the interval-center model.
    pub nominal: Vec<f64>,
    /// Tube radii s_0..s_N.
    pub tube: Vec<f64>,
}

/// Tube radii: `s_0 = 0`,
/// `s_{k+1} = rho s_k + w_max + |b|_max eta_max + da x_max + db u_max`
/// where (da, db) are the interval half-widths. The model-error term bounds
/// the mismatch between the center model and any member of the interval over
/// the constraint box.
fn tube_radii(
    config: &TubeMpcConfig,
    task: &TrackingTask,
    interval: &ModelInterval,
) -> Vec<f64> {
    let rho = interval.rho(config.gain);
    let (da, db) = interval.half_widths();
    let b_abs = interval.b_lo.abs().max(interval.b_hi.abs());
    let per_step = config.w_max + b_abs * config.eta_max + da * task.x_max + db * task.u_max;
    let mut s = Vec::with_capacity(config.horizon + 1);
    s.push(0.0);
    for k in 0..config.horizon {
        s.push(rho * s[k] + per_step);
    }
    s
}

/// One controller evaluation: horizon-N quadratic program on the
/// interval-center model with tube-tightened state and input boxes, then
/// `u = K x + v_0 + eta`.
pub fn rampc_step(
    t: usize,
    state: f64,
    task: &TrackingTask,
    config: &TubeMpcConfig,
    interval: &ModelInterval,
    eta: f64,
) -> Result<StepOutput, RampcError> {
    let n = config.horizon;
    let (a_c, b_c) = interval.center();
    let phi = a_c + b_c * config.gain;
    let s = tube_radii(config, task, interval);

    // Tightened boxes; the input box additionally reserves the exploration
    // half-width so the realized input can never leave its hard box.
    let x_bounds: Vec<f64> = (1..=n).map(|k| task.x_max - s[k]).collect();
    let u_bounds: Vec<f64> = (0..n)
        .map(|k| task.u_max - config.gain.abs() * s[k] - config.eta_max)
        .collect();
    if x_bounds.iter().any(|&b| b <= 0.0) || u_bounds.iter().any(|&b| b <= 0.0) {
        return Err(RampcError::Infeasible { step: t });
    }

    // Nominal prediction x_k = phi^k x_0 + sum_i phi^{k-1-i} b_c v_i as an
    // affine map x = base + G v.
    let mut base = vec![0.0; n + 1];
    base[0] = state;
    for k in 0..n {
        base[k + 1] = phi * base[k];
    }
    let mut g_map = DMatrix::zeros(n, n); // row k-1: x_k sensitivity to v
    for k in 1..=n {
        for i in 0..k {
            g_map[(k - 1, i)] = phi.powi((k - 1 - i) as i32) * b_c;
        }
    }

    // Targets projected onto the tightened state box keep the program
    // feasible when the reference itself is unreachable.
    let targets: Vec<f64> = (1..=n)
        .map(|k| task.target(t + k).clamp(-x_bounds[k - 1], x_bounds[k - 1]))
        .collect();

    // Quadratic cost sum_k Q (x_k - g_k)^2 + R v_k^2.
    let q = task.q_weight;
    let r = task.r_weight;
    let mut h = g_map.transpose() * &g_map * (2.0 * q);
    for i in 0..n {
        h[(i, i)] += 2.0 * r;
    }
    let resid = DVector::from_fn(n, |k, _| base[k + 1] - targets[k]);
    let f = g_map.transpose() * resid * (2.0 * q);

    // Constraints: |x_k| <= x_bounds, |K x_k + v_k| <= u_bounds.
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for k in 1..=n {
        let row: Vec<f64> = (0..n).map(|i| g_map[(k - 1, i)]).collect();
        rows.push(row.clone());
        rhs.push(x_bounds[k - 1] - base[k]);
        rows.push(row.iter().map(|v| -v).collect());
        rhs.push(x_bounds[k - 1] + base[k]);
    }
    for k in 0..n {
        let mut row = vec![0.0; n];
        if k > 0 {
            for i in 0..n {
                row[i] = config.gain * g_map[(k - 1, i)];
            }
        }
        row[k] += 1.0;
        let nominal_u = config.gain * base[k];
        rows.push(row.clone());
        rhs.push(u_bounds[k] - nominal_u);
        rows.push(row.iter().map(|v| -v).collect());
        rhs.push(u_bounds[k] + nominal_u);
    }
    let m = rows.len();
    let a_mat = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let b_vec = DVector::from_vec(rhs);
    let sol = qp::solve_qp(&h, &f, &a_mat, &b_vec);
    let mut v: Vec<f64> = sol.v.iter().cloned().collect();

    // Hard safety net: the first input must respect its tightened box even
    // if the dual ascent stopped early.
    let lo = -u_bounds[0] - config.gain * state;
    let hi = u_bounds[0] - config.gain * state;
    v[0] = v[0].clamp(lo.min(hi), hi.max(lo));

    let nominal: Vec<f64> = (1..=n)
        .map(|k| base[k] + (0..n).map(|i| g_map[(k - 1, i)] * v[i]).sum::<f64>())
        .collect();
    Ok(StepOutput {
        u: config.gain * state + v[0] + eta,
        corrections: v,
        nominal,
        tube: s,
    })
}

#[derive(Debug, Clone)]
pub struct EpisodeRow {
    pub t: usize,
    pub x: f64,
    pub u: f64,
    pub target: f64,
    pub step_cost: f64,
    pub cum_cost: f64,
    pub interval: ModelInterval,
    pub tube_s1: f64,
}

#[derive(Debug, Clone)]
pub struct EpisodeLog {
    pub estimator: EstimatorKind,
    pub seed: u64,
    pub rows: Vec<EpisodeRow>,
    /// Steps at which the model interval failed to contain the true pair
    /// (empty for truthful disturbance bounds).
    pub containment_misses: Vec<usize>,
}

impl EpisodeLog {
    pub fn total_cost(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_cost)
    }

    /// Mean per-step cost gap to a reference log over the final `window`
    /// steps.
    pub fn tail_gap(&self, reference: &EpisodeLog, window: usize) -> f64 {
        let n = self.rows.len().min(reference.rows.len());
        let start = n.saturating_sub(window);
        let mut gap = 0.0;
        for i in start..n {
            gap += self.rows[i].step_cost - reference.rows[i].step_cost;
        }
        gap / (n - start).max(1) as f64
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "t,x,u,g,step_cost,cum_cost,a_lo,a_hi,b_lo,b_hi,tube_s1"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
                r.t,
                r.x,
                r.u,
                r.target,
                r.step_cost,
                r.cum_cost,
                r.interval.a_lo,
                r.interval.a_hi,
                r.interval.b_lo,
                r.interval.b_hi,
                r.tube_s1
            )?;
        }
        Ok(())
    }
}

/// Axis-aligned bounding box of the least-squares confidence ellipsoid: the
/// half-width along coordinate k is `radius sqrt((V^{-1})_{kk})`.
fn lse_interval(
    traj: &Trajectory,
    lambda: f64,
    delta: f64,
    param_norm_bound: f64,
    variance_proxy: f64,
) -> Option<ModelInterval> {
    let region = lse_baseline::ay_region(traj, lambda, delta, param_norm_bound, variance_proxy).ok()?;
    let chol = Cholesky::new(region.fit.gram.clone())?;
    let inv = chol.inverse();
    let ha = region.radius * inv[(0, 0)].sqrt();
    let hb = region.radius * inv[(1, 1)].sqrt();
    Some(ModelInterval {
        a_lo: region.fit.theta_hat[(0, 0)] - ha,
        a_hi: region.fit.theta_hat[(0, 0)] + ha,
        b_lo: region.fit.theta_hat[(0, 1)] - hb,
        b_hi: region.fit.theta_hat[(0, 1)] + hb,
    })
}

fn sme_interval(set: &MembershipSet) -> Result<ModelInterval, sme_core::SmeError> {
    let bounds = set.row(0).axis_bounds()?;
    Ok(ModelInterval {
        a_lo: bounds[0].0.unwrap_or(f64::NEG_INFINITY),
        a_hi: bounds[0].1.unwrap_or(f64::INFINITY),
        b_lo: bounds[1].0.unwrap_or(f64::NEG_INFINITY),
        b_hi: bounds[1].1.unwrap_or(f64::INFINITY),
    })
}

/// Runs one closed-loop tracking episode. The model interval is refreshed
/// each step from the chosen estimator and always intersected with the
/// initial interval, which keeps the contraction certificate valid.
pub fn run_tracking_episode(
    task: &TrackingTask,
    config: &TubeMpcConfig,
    estimator: EstimatorKind,
    theta_star: (f64, f64),
    seed: u64,
) -> Result<EpisodeLog, RampcError> {
    task.validate()?;
    config.validate()?;
    let (a_star, b_star) = theta_star;

    let mut disturbance_rng = ChaCha8Rng::seed_from_u64(seed);
    disturbance_rng.set_stream(0);
    let mut explore_rng = ChaCha8Rng::seed_from_u64(seed);
    explore_rng.set_stream(1);

    let mut set = MembershipSet::new(1, 2, config.w_max);
    let mut history = Trajectory {
        steps: Vec::new(),
        seed,
        n_x: 1,
        n_u: 1,
    };
    let s_bound = (a_star * a_star + b_star * b_star).sqrt();

    let mut x = 0.0;
    let mut cum_cost = 0.0;
    let mut rows = Vec::with_capacity(task.episode_len);
    let mut containment_misses = Vec::new();

    for t in 0..task.episode_len {
        let refreshed = match estimator {
            EstimatorKind::Oracle => ModelInterval::singleton(a_star, b_star),
            EstimatorKind::Sme => sme_interval(&set).map_err(|e| RampcError::Estimator {
                step: t,
                message: e.to_string(),
            })?,
            EstimatorKind::Lse => {
                if history.steps.len() >= 2 {
                    lse_interval(&history, 0.1, 0.1, s_bound, 4.0 / 3.0)
                        .unwrap_or(config.theta0)
                } else {
                    config.theta0
                }
            }
        };
        let interval = refreshed.intersect(&config.theta0).unwrap_or(config.theta0);
        if !interval.contains(a_star, b_star) {
            containment_misses.push(t);
        }

        let eta = if config.eta_max > 0.0 {
            explore_rng.gen_range(-config.eta_max..=config.eta_max)
        } else {
            0.0
        };
        let step = rampc_step(t, x, task, config, &interval, eta)?;
        let u = step.u;

        let g = task.target(t);
        let step_cost = task.q_weight * (x - g) * (x - g) + task.r_weight * u * u;
        cum_cost += step_cost;
        rows.push(EpisodeRow {
            t,
            x,
            u,
            target: g,
            step_cost,
            cum_cost,
            interval,
            tube_s1: step.tube[1],
        });

        let w = if config.w_max > 0.0 {
            disturbance_rng.gen_range(-config.w_max..=config.w_max)
        } else {
            0.0
        };
        let x_next = a_star * x + b_star * u + w;
        let z = DVector::from_vec(vec![x, u]);
        let x_next_vec = DVector::from_vec(vec![x_next]);
        set.update(&z, &x_next_vec)
            .map_err(|e| RampcError::Estimator {
                step: t,
                message: e.to_string(),
            })?;
        history.steps.push(sysid_sim::Step {
            z,
            x_next: x_next_vec,
            w: DVector::from_vec(vec![w]),
        });
        x = x_next;
    }
    Ok(EpisodeLog {
        estimator,
        seed,
        rows,
        containment_misses,
    })
}

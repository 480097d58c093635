use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::{DisturbanceModel, SimError};

/// Time-indexed nominal command fed to a perturbed-feedback policy.
#[derive(Debug, Clone, PartialEq)]
pub enum NominalCommand {
    Zero,
    /// `v_t` taken from the schedule; zero past its end.
    Schedule(Vec<DVector<f64>>),
}

impl NominalCommand {
    fn value(&self, t: usize, n_u: usize) -> DVector<f64> {
        match self {
            NominalCommand::Zero => DVector::zeros(n_u),
            NominalCommand::Schedule(v) => v
                .get(t)
                .cloned()
                .unwrap_or_else(|| DVector::zeros(n_u)),
        }
    }
}

/// Input generation for `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub enum InputPolicy {
    /// No input (`n_u = 0`).
    None,
    /// `u_t` drawn i.i.d. from a bounded descriptor with `||u_t||_inf <= u_max`.
    IidBounded(DisturbanceModel),
    /// `u_t = K x_t + v_t + eta_t` with `||eta_t||_inf <= eta_max`.
    PerturbedFeedback {
        gain: DMatrix<f64>,
        nominal: NominalCommand,
        eta_max: f64,
    },
}

impl InputPolicy {
    pub fn validate(&self, n_x: usize, n_u: usize) -> Result<(), SimError> {
        match self {
            InputPolicy::None => {
                if n_u != 0 {
                    return Err(SimError::DimensionMismatch {
                        context: "policy None requires n_u = 0",
                        expected: 0,
                        got: n_u,
                    });
                }
            }
            InputPolicy::IidBounded(dist) => {
                dist.validate()?;
                if dist.dim != n_u {
                    return Err(SimError::DimensionMismatch {
                        context: "input descriptor dim must equal n_u",
                        expected: n_u,
                        got: dist.dim,
                    });
                }
            }
            InputPolicy::PerturbedFeedback { gain, eta_max, .. } => {
                if gain.nrows() != n_u {
                    return Err(SimError::DimensionMismatch {
                        context: "gain row count must equal n_u",
                        expected: n_u,
                        got: gain.nrows(),
                    });
                }
                if gain.ncols() != n_x {
                    return Err(SimError::DimensionMismatch {
                        context: "gain column count must equal n_x",
                        expected: n_x,
                        got: gain.ncols(),
                    });
                }
                if !(*eta_max >= 0.0) {
                    return Err(SimError::InvalidParameter(format!(
                        "eta_max must be nonnegative, got {eta_max}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn input<R: Rng>(
        &self,
        t: usize,
        x: &DVector<f64>,
        n_u: usize,
        input_rng: &mut R,
        perturb_rng: &mut R,
    ) -> DVector<f64> {
        match self {
            InputPolicy::None => DVector::zeros(0),
            InputPolicy::IidBounded(dist) => dist.sample(input_rng),
            InputPolicy::PerturbedFeedback {
                gain,
                nominal,
                eta_max,
            } => {
                let mut u = gain * x + nominal.value(t, n_u);
                for j in 0..n_u {
                    u[j] += perturb_rng.gen_range(-eta_max..=*eta_max);
                }
                u
            }
        }
    }
}

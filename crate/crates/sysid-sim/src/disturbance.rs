use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DisturbanceKind {
    UniformBox,
    TruncatedGaussian { sigma: f64 },
    BoundaryUniform,
}

/// Bounded disturbance distribution on the box `[-w_max, w_max]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceModel {
    pub kind: DisturbanceKind,
    pub w_max: f64,
    pub dim: usize,
}

impl DisturbanceModel {
    pub fn uniform(w_max: f64, dim: usize) -> Self {
        Self {
            kind: DisturbanceKind::UniformBox,
            w_max,
            dim,
        }
    }

    pub fn truncated_gaussian(w_max: f64, sigma: f64, dim: usize) -> Self {
        Self {
            kind: DisturbanceKind::TruncatedGaussian { sigma },
            w_max,
            dim,
        }
    }

    pub fn boundary_uniform(w_max: f64, dim: usize) -> Self {
        Self {
            kind: DisturbanceKind::BoundaryUniform,
            w_max,
            dim,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.w_max >= 0.0 && self.w_max.is_finite()) {
            return Err(SimError::InvalidParameter(format!(
                "w_max must be a nonnegative finite real, got {}",
                self.w_max
            )));
        }
        if let DisturbanceKind::TruncatedGaussian { sigma } = self.kind {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(SimError::InvalidParameter(format!(
                    "sigma_w must be positive, got {sigma}"
                )));
            }
        }
        if self.dim == 0 {
            return Err(SimError::InvalidParameter("dim must be at least 1".into()));
        }
        Ok(())
    }

    /// Draws one sample; every coordinate lies in `[-w_max, w_max]`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let n = self.dim;
        let w = self.w_max;
        match self.kind {
            DisturbanceKind::UniformBox => {
                DVector::from_fn(n, |_, _| rng.gen_range(-w..=w))
            }
            DisturbanceKind::TruncatedGaussian { sigma } => {
                // Per-coordinate rejection from N(0, sigma^2) until |v| <= w_max.
                DVector::from_fn(n, |_, _| loop {
                    let v: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * sigma;
                    if v.abs() <= w {
                        return v;
                    }
                })
            }
            DisturbanceKind::BoundaryUniform => {
                // Uniform facet choice, then uniform fill on the other coordinates.
                let facet = rng.gen_range(0..2 * n);
                let coord = facet / 2;
                let sign = if facet % 2 == 0 { 1.0 } else { -1.0 };
                DVector::from_fn(n, |j, _| {
                    if j == coord {
                        sign * w
                    } else {
                        rng.gen_range(-w..=w)
                    }
                })
            }
        }
    }

    /// The tightness function `q_w(eps)` of the distribution, clamped to [0, 1]
    /// with `q_w(2 w_max) = 1`.
    pub fn q_w(&self, eps: f64) -> f64 {
        assert!(eps >= 0.0, "q_w requires eps >= 0");
        if eps == 0.0 {
            return 0.0;
        }
        if eps >= 2.0 * self.w_max {
            return 1.0;
        }
        let w = self.w_max;
        let raw = match self.kind {
            DisturbanceKind::UniformBox => eps / (2.0 * w),
            DisturbanceKind::TruncatedGaussian { sigma } => {
                let denom = (2.0 * std::f64::consts::PI).sqrt() * sigma;
                let denom = denom.min(2.0 * w);
                eps * (-w * w / (2.0 * sigma * sigma)).exp() / denom
            }
            DisturbanceKind::BoundaryUniform => 1.0 / (2.0 * self.dim as f64),
        };
        raw.clamp(0.0, 1.0)
    }
}

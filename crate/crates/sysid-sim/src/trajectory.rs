use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{DisturbanceModel, InputPolicy, SimError, SystemModel};

/// One observed transition: regressor `z_t = (x_t, u_t)`, successor state and
/// the realized disturbance.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub z: DVector<f64>,
    pub x_next: DVector<f64>,
    pub w: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub seed: u64,
    pub n_x: usize,
    pub n_u: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn n_z(&self) -> usize {
        self.n_x + self.n_u
    }

    /// First `t` steps, sharing dims and seed.
    pub fn prefix(&self, t: usize) -> Trajectory {
        Trajectory {
            steps: self.steps[..t.min(self.steps.len())].to_vec(),
            seed: self.seed,
            n_x: self.n_x,
            n_u: self.n_u,
        }
    }

    /// Largest 2-norm over all visited states (including the final one).
    pub fn max_state_norm(&self) -> f64 {
        let mut best: f64 = 0.0;
        for step in &self.steps {
            let x = step.z.rows(0, self.n_x);
            best = best.max(x.norm());
        }
        if let Some(last) = self.steps.last() {
            best = best.max(last.x_next.norm());
        }
        best
    }

    /// Largest 2-norm over all regressors `z_t`.
    pub fn max_regressor_norm(&self) -> f64 {
        self.steps.iter().map(|s| s.z.norm()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), SimError> {
        let n_z = self.n_z();
        let mut header = vec!["t".to_string()];
        header.extend((0..n_z).map(|k| format!("z_{k}")));
        header.extend((0..self.n_x).map(|k| format!("xnext_{k}")));
        header.extend((0..self.n_x).map(|k| format!("w_{k}")));
        writeln!(out, "{}", header.join(","))?;
        for (t, step) in self.steps.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(step.z.iter().map(|v| format!("{v:.16e}")));
            row.extend(step.x_next.iter().map(|v| format!("{v:.16e}")));
            row.extend(step.w.iter().map(|v| format!("{v:.16e}")));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), SimError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(reader: R, n_x: usize, n_u: usize, seed: u64) -> Result<Self, SimError> {
        let n_z = n_x + n_u;
        let expected = 1 + n_z + 2 * n_x;
        let mut steps = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if idx == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != expected {
                return Err(SimError::Parse {
                    line: idx + 1,
                    message: format!("expected {expected} fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<f64, SimError> {
                s.trim().parse::<f64>().map_err(|e| SimError::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })
            };
            let mut vals = Vec::with_capacity(expected - 1);
            for f in &fields[1..] {
                vals.push(parse(f)?);
            }
            steps.push(Step {
                z: DVector::from_row_slice(&vals[..n_z]),
                x_next: DVector::from_row_slice(&vals[n_z..n_z + n_x]),
                w: DVector::from_row_slice(&vals[n_z + n_x..]),
            });
        }
        Ok(Trajectory {
            steps,
            seed,
            n_x,
            n_u,
        })
    }

    pub fn load_csv(path: &Path, n_x: usize, n_u: usize, seed: u64) -> Result<Self, SimError> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, n_x, n_u, seed)
    }
}

/// Rolls the system forward for `horizon` steps. Deterministic given `seed`;
/// the disturbance, input and perturbation draws use independent RNG streams
/// so changing the policy leaves the disturbance sequence untouched.
pub fn simulate(
    model: &SystemModel,
    policy: &InputPolicy,
    dist: &DisturbanceModel,
    x0: &DVector<f64>,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory, SimError> {
    dist.validate()?;
    policy.validate(model.n_x(), model.n_u())?;
    if horizon == 0 {
        return Err(SimError::InvalidParameter("horizon must be >= 1".into()));
    }
    if x0.len() != model.n_x() {
        return Err(SimError::DimensionMismatch {
            context: "x0 length must equal n_x",
            expected: model.n_x(),
            got: x0.len(),
        });
    }
    if dist.dim != model.n_x() {
        return Err(SimError::DimensionMismatch {
            context: "disturbance dim must equal n_x",
            expected: model.n_x(),
            got: dist.dim,
        });
    }

    let mut w_rng = ChaCha8Rng::seed_from_u64(seed);
    w_rng.set_stream(0);
    let mut u_rng = ChaCha8Rng::seed_from_u64(seed);
    u_rng.set_stream(1);
    let mut eta_rng = ChaCha8Rng::seed_from_u64(seed);
    eta_rng.set_stream(2);

    let n_x = model.n_x();
    let n_u = model.n_u();
    let mut steps = Vec::with_capacity(horizon);
    let mut x = x0.clone();
    for t in 0..horizon {
        let u = policy.input(t, &x, n_u, &mut u_rng, &mut eta_rng);
        let w = dist.sample(&mut w_rng);
        let x_next = model.step(&x, &u) + &w;
        if x_next.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteState { step: t });
        }
        let mut z = DVector::zeros(n_x + n_u);
        z.rows_mut(0, n_x).copy_from(&x);
        if n_u > 0 {
            z.rows_mut(n_x, n_u).copy_from(&u);
        }
        steps.push(Step {
            z,
            x_next: x_next.clone(),
            w,
        });
        x = x_next;
    }
    Ok(Trajectory {
        steps,
        seed,
        n_x,
        n_u,
    })
}

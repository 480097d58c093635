use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sysid_sim::Trajectory;

use crate::polytope::{RowPolytope, Support};
use crate::SmeError;

const CONTAINS_TOL: f64 = 1e-9;
/// Maintenance cadence in absorbed samples.
const PRUNE_EVERY: usize = 64;
/// Full LP pruning is expensive; between these sweeps the cheap box-drop
/// keeps rows from growing unboundedly.
const LP_PRUNE_FACTOR: usize = 48;
/// Full LP pruning is only worthwhile at desk-scale dimensions; larger rows
/// rely on the outer-box dominance filter.
const LP_PRUNE_MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterMethod {
    ExactVertex,
    SupportSampled,
    AxisBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiameterReport {
    pub value: f64,
    pub method: DiameterMethod,
    pub per_row: Vec<f64>,
    pub is_lower_bound: bool,
    pub is_upper_bound: bool,
}

/// The membership set as a Cartesian product of per-row polytopes over the
/// row-wise vectorization of `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipSet {
    pub n_x: usize,
    pub n_z: usize,
    w_bound_used: f64,
    samples_absorbed: usize,
    rows: Vec<RowPolytope>,
    infeasible: Vec<bool>,
    /// Cached finite outer box per row, refreshed during maintenance. Always
    /// a superset of the row polytope, so it can soundly discard dominated
    /// incoming constraints.
    outer_boxes: Vec<Option<Vec<(f64, f64)>>>,
    /// Stored-halfspace count per row at the last box refresh; a refresh is
    /// only worth its axis LPs once the row has grown meaningfully past it.
    #[serde(default)]
    refreshed_len: Vec<usize>,
}

impl MembershipSet {
    pub fn new(n_x: usize, n_z: usize, w_bound: f64) -> Self {
        assert!(w_bound >= 0.0, "w bound must be nonnegative");
        Self {
            n_x,
            n_z,
            w_bound_used: w_bound,
            samples_absorbed: 0,
            rows: (0..n_x).map(|_| RowPolytope::new(n_z)).collect(),
            infeasible: vec![false; n_x],
            outer_boxes: vec![None; n_x],
            refreshed_len: vec![0; n_x],
        }
    }

    pub fn from_trajectory(traj: &Trajectory, w_bound: f64) -> Result<Self, SmeError> {
        let mut set = Self::new(traj.n_x, traj.n_z(), w_bound);
        for step in &traj.steps {
            set.update(&step.z, &step.x_next)?;
        }
        Ok(set)
    }

    pub fn w_bound_used(&self) -> f64 {
        self.w_bound_used
    }

    pub fn samples_absorbed(&self) -> usize {
        self.samples_absorbed
    }

    pub fn row(&self, j: usize) -> &RowPolytope {
        &self.rows[j]
    }

    pub fn row_infeasible(&self, j: usize) -> bool {
        self.infeasible[j]
    }

    pub fn any_infeasible(&self) -> bool {
        self.infeasible.iter().any(|&f| f)
    }

    pub fn constraint_count(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Absorbs one sample: per row, the interval constraint
    /// `x_next[j] - w <= theta_j . z <= x_next[j] + w` as two halfspaces.
    pub fn update(&mut self, z: &DVector<f64>, x_next: &DVector<f64>) -> Result<(), SmeError> {
        if z.len() != self.n_z {
            return Err(SmeError::DimensionMismatch {
                context: "regressor length",
                expected: self.n_z,
                got: z.len(),
            });
        }
        if x_next.len() != self.n_x {
            return Err(SmeError::DimensionMismatch {
                context: "successor state length",
                expected: self.n_x,
                got: x_next.len(),
            });
        }
        let w = self.w_bound_used;
        let degenerate = z.amax() == 0.0;
        for j in 0..self.n_x {
            let hi = x_next[j] + w;
            let lo = x_next[j] - w;
            if degenerate {
                // 0 . gamma <= x_next[j] +/- w: vacuous unless contradictory.
                if x_next[j].abs() > w {
                    self.infeasible[j] = true;
                }
                continue;
            }
            let (mut need_hi, mut need_lo) = (true, true);
            if let Some(bounds) = &self.outer_boxes[j] {
                let mut max_v = 0.0;
                let mut min_v = 0.0;
                for (k, &(blo, bhi)) in bounds.iter().enumerate() {
                    let zk = z[k];
                    if zk >= 0.0 {
                        max_v += zk * bhi;
                        min_v += zk * blo;
                    } else {
                        max_v += zk * blo;
                        min_v += zk * bhi;
                    }
                }
                need_hi = max_v > hi;
                need_lo = min_v < lo;
            }
            if need_hi {
                self.rows[j].add(z.as_slice(), hi);
            }
            if need_lo {
                let neg: Vec<f64> = z.iter().map(|v| -v).collect();
                self.rows[j].add(&neg, -lo);
            }
        }
        self.samples_absorbed += 1;
        if self.samples_absorbed % PRUNE_EVERY == 0 {
            self.maintain()?;
        }
        Ok(())
    }

    /// Periodic housekeeping: refresh the outer boxes and prune rows that
    /// have accumulated too many halfspaces.
    fn maintain(&mut self) -> Result<(), SmeError> {
        for j in 0..self.n_x {
            if self.infeasible[j] {
                continue;
            }
            let len = self.rows[j].len();
            if len <= 8 * self.n_z || len < self.refreshed_len[j] + 2 * self.n_z {
                continue;
            }
            match self.refresh_box(j) {
                Ok(()) => {}
                Err(SmeError::InfeasibleRow { .. }) => {
                    self.infeasible[j] = true;
                    continue;
                }
                Err(e) => return Err(e),
            }
            if self.n_z <= LP_PRUNE_MAX_DIM && self.rows[j].len() > LP_PRUNE_FACTOR * self.n_z {
                self.rows[j].prune_redundant()?;
            }
        }
        Ok(())
    }

    /// Recomputes the outer box of row `j` by axis support LPs, then drops
    /// stored halfspaces that are strictly slack over the box.
    fn refresh_box(&mut self, j: usize) -> Result<(), SmeError> {
        let bounds = match self.rows[j].axis_bounds() {
            Ok(b) => b,
            Err(SmeError::InfeasibleRow { .. }) => {
                return Err(SmeError::InfeasibleRow { row: j })
            }
            Err(e) => return Err(e),
        };
        if bounds.iter().any(|(lo, hi)| lo.is_none() || hi.is_none()) {
            self.outer_boxes[j] = None;
            return Ok(());
        }
        let bounds: Vec<(f64, f64)> = bounds
            .into_iter()
            .map(|(lo, hi)| (lo.unwrap(), hi.unwrap()))
            .collect();
        self.rows[j].halfspaces.retain(|h| {
            let mut max_v = 0.0;
            for (k, &(blo, bhi)) in bounds.iter().enumerate() {
                let a = h.normal[k];
                max_v += if a >= 0.0 { a * bhi } else { a * blo };
            }
            // Strict margin: a slack constraint over an outer box cannot be
            // active on the set, so removing it leaves the region unchanged.
            max_v > h.offset - 1e-7 * (1.0 + h.offset.abs())
        });
        self.outer_boxes[j] = Some(bounds);
        self.refreshed_len[j] = self.rows[j].len();
        Ok(())
    }

    /// True iff every row of `theta` satisfies its row polytope within slack
    /// tolerance 1e-9.
    pub fn contains(&self, theta: &DMatrix<f64>) -> bool {
        assert_eq!(theta.nrows(), self.n_x);
        assert_eq!(theta.ncols(), self.n_z);
        if self.any_infeasible() {
            return false;
        }
        (0..self.n_x).all(|j| {
            let point = DVector::from_fn(self.n_z, |k, _| theta[(j, k)]);
            self.rows[j].contains(&point, CONTAINS_TOL)
        })
    }

    /// LP-exact redundancy elimination on every row.
    pub fn prune_redundant(&mut self) -> Result<usize, SmeError> {
        let mut removed = 0;
        for j in 0..self.n_x {
            if !self.infeasible[j] {
                if !self.rows[j].is_feasible()? {
                    self.infeasible[j] = true;
                    continue;
                }
                removed += self.rows[j].prune_redundant()?;
            }
        }
        Ok(removed)
    }

    /// Frobenius diameter, composed from per-row diameters by
    /// `value^2 = sum per_row^2`.
    pub fn diameter(
        &mut self,
        method: DiameterMethod,
        direction_budget: usize,
    ) -> Result<DiameterReport, SmeError> {
        // Keep the LPs small ahead of the direction sweep.
        for j in 0..self.n_x {
            if !self.infeasible[j] && self.rows[j].len() > 16 * self.n_z {
                match self.refresh_box(j) {
                    Ok(()) => {}
                    Err(SmeError::InfeasibleRow { .. }) => self.infeasible[j] = true,
                    Err(e) => return Err(e),
                }
                if self.n_z <= LP_PRUNE_MAX_DIM && self.rows[j].len() > 16 * self.n_z {
                    self.rows[j].prune_redundant()?;
                }
            }
        }
        let mut per_row = Vec::with_capacity(self.n_x);
        for j in 0..self.n_x {
            if self.infeasible[j] {
                return Err(SmeError::InfeasibleRow { row: j });
            }
            per_row.push(self.row_diameter(j, method, direction_budget)?);
        }
        let value = if per_row.iter().any(|v| v.is_infinite()) {
            f64::INFINITY
        } else {
            per_row.iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let (lower, upper) = match method {
            DiameterMethod::ExactVertex => (true, true),
            DiameterMethod::SupportSampled => (true, false),
            DiameterMethod::AxisBox => (false, true),
        };
        Ok(DiameterReport {
            value,
            method,
            per_row,
            is_lower_bound: lower,
            is_upper_bound: upper,
        })
    }

    fn row_diameter(
        &self,
        j: usize,
        method: DiameterMethod,
        direction_budget: usize,
    ) -> Result<f64, SmeError> {
        let row = &self.rows[j];
        match method {
            DiameterMethod::AxisBox => {
                let bounds = row.axis_bounds().map_err(|e| tag_row(e, j))?;
                let mut sum = 0.0;
                for (lo, hi) in bounds {
                    match (lo, hi) {
                        (Some(lo), Some(hi)) => sum += (hi - lo) * (hi - lo),
                        _ => return Ok(f64::INFINITY),
                    }
                }
                Ok(sum.sqrt())
            }
            DiameterMethod::SupportSampled => {
                let mut best: f64 = 0.0;
                for dir in direction_set(self.n_z, direction_budget) {
                    let hi = match row.support(&dir).map_err(|e| tag_row(e, j))? {
                        Support::Finite { value, .. } => value,
                        Support::Unbounded => return Ok(f64::INFINITY),
                        Support::Infeasible => return Err(SmeError::InfeasibleRow { row: j }),
                    };
                    let lo = match row.support(&(-&dir)).map_err(|e| tag_row(e, j))? {
                        Support::Finite { value, .. } => value,
                        Support::Unbounded => return Ok(f64::INFINITY),
                        Support::Infeasible => return Err(SmeError::InfeasibleRow { row: j }),
                    };
                    best = best.max(hi + lo);
                }
                Ok(best)
            }
            DiameterMethod::ExactVertex => {
                assert!(
                    self.n_z <= 3,
                    "exact-vertex diameter is limited to n_z <= 3"
                );
                let bounds = row.axis_bounds().map_err(|e| tag_row(e, j))?;
                if bounds.iter().any(|(lo, hi)| lo.is_none() || hi.is_none()) {
                    return Ok(f64::INFINITY);
                }
                let verts = row.enumerate_vertices()?;
                let mut best: f64 = 0.0;
                for a in 0..verts.len() {
                    for b in a + 1..verts.len() {
                        best = best.max((&verts[a] - &verts[b]).norm());
                    }
                }
                Ok(best)
            }
        }
    }

    /// Per-entry bounds on `theta`: entry (j, k) in `[-h_j(-e_k), h_j(e_k)]`.
    pub fn interval_hull(&self) -> Result<Vec<Vec<(f64, f64)>>, SmeError> {
        let mut hull = Vec::with_capacity(self.n_x);
        for j in 0..self.n_x {
            if self.infeasible[j] {
                return Err(SmeError::InfeasibleRow { row: j });
            }
            let bounds = self.rows[j].axis_bounds().map_err(|e| tag_row(e, j))?;
            let mut row_bounds = Vec::with_capacity(self.n_z);
            for (lo, hi) in bounds {
                match (lo, hi) {
                    (Some(lo), Some(hi)) => row_bounds.push((lo, hi)),
                    _ => return Err(SmeError::UnboundedRow { row: j }),
                }
            }
            hull.push(row_bounds);
        }
        Ok(hull)
    }

    /// Chebyshev centers of every row stacked into a point estimate.
    pub fn chebyshev_theta(&self) -> Result<DMatrix<f64>, SmeError> {
        let mut theta = DMatrix::zeros(self.n_x, self.n_z);
        for j in 0..self.n_x {
            let center = self.rows[j].chebyshev_center().map_err(|e| tag_row(e, j))?;
            for k in 0..self.n_z {
                theta[(j, k)] = center[k];
            }
        }
        Ok(theta)
    }

    pub fn to_json(&self) -> Result<String, SmeError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SmeError> {
        let mut set: Self = serde_json::from_str(text)?;
        set.refreshed_len.resize(set.n_x, 0);
        Ok(set)
    }
}

fn tag_row(e: SmeError, row: usize) -> SmeError {
    match e {
        SmeError::InfeasibleRow { .. } => SmeError::InfeasibleRow { row },
        SmeError::UnboundedRow { .. } => SmeError::UnboundedRow { row },
        other => other,
    }
}

/// Deterministic direction set: coordinate axes, normalized pairwise
/// diagonals, then seeded unit vectors up to `budget` directions.
pub fn direction_set(n_z: usize, budget: usize) -> Vec<DVector<f64>> {
    let mut dirs = Vec::new();
    for k in 0..n_z {
        let mut e = DVector::zeros(n_z);
        e[k] = 1.0;
        dirs.push(e);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    'outer: for i in 0..n_z {
        for j in i + 1..n_z {
            for sign in [1.0, -1.0] {
                if dirs.len() >= budget.max(n_z) {
                    break 'outer;
                }
                let mut d = DVector::zeros(n_z);
                d[i] = s;
                d[j] = sign * s;
                dirs.push(d);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1CE);
    while dirs.len() < budget {
        let d = DVector::from_fn(n_z, |_, _| {
            rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal)
        });
        let norm = d.norm();
        if norm > 1e-9 {
            dirs.push(d / norm);
        }
    }
    dirs.truncate(budget.max(n_z));
    dirs
}

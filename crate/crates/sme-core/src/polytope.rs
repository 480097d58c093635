use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::lp::{solve_inequalities, solve_standard, IneqProblem, LpOutcome};
use crate::SmeError;

/// One linear constraint `normal . gamma <= offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// A polytope in `R^{n_z}` stored in halfspace form. Normals are normalized
/// to unit 2-norm on insertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowPolytope {
    pub dim: usize,
    pub halfspaces: Vec<Halfspace>,
}

/// Result of a support-function evaluation `h(u) = max u . gamma`.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Finite {
        value: f64,
        maximizer: Option<DVector<f64>>,
    },
    Unbounded,
    Infeasible,
}

impl RowPolytope {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            halfspaces: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    /// Adds `normal . gamma <= offset`; returns false when the normal is zero
    /// and the constraint is either vacuous or contradictory (caller decides
    /// via `offset`).
    pub fn add(&mut self, normal: &[f64], offset: f64) {
        debug_assert_eq!(normal.len(), self.dim);
        let scale = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        debug_assert!(scale > 0.0, "zero normals are handled by the caller");
        self.halfspaces.push(Halfspace {
            normal: normal.iter().map(|v| v / scale).collect(),
            offset: offset / scale,
        });
    }

    /// Point membership with absolute slack tolerance `tol`.
    pub fn contains(&self, point: &DVector<f64>, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| {
            let lhs: f64 = h.normal.iter().zip(point.iter()).map(|(a, x)| a * x).sum();
            lhs <= h.offset + tol * (1.0 + h.offset.abs())
        })
    }

    /// Support function by solving the LP dual
    /// `min b.y  s.t.  sum y_i a_i = u, y >= 0`.
    pub fn support(&self, direction: &DVector<f64>) -> Result<Support, SmeError> {
        debug_assert_eq!(direction.len(), self.dim);
        let m = self.halfspaces.len();
        if m == 0 {
            return Ok(if direction.amax() == 0.0 {
                Support::Finite {
                    value: 0.0,
                    maximizer: None,
                }
            } else {
                Support::Unbounded
            });
        }
        let c: Vec<f64> = self.halfspaces.iter().map(|h| h.offset).collect();
        let mut a = vec![vec![0.0; m]; self.dim];
        for (i, h) in self.halfspaces.iter().enumerate() {
            for (k, v) in h.normal.iter().enumerate() {
                a[k][i] = *v;
            }
        }
        let b: Vec<f64> = direction.iter().cloned().collect();
        match solve_standard(&c, &a, &b)? {
            LpOutcome::Optimal { value, basis, .. } => {
                let maximizer = self.recover_point(&basis, direction, value);
                Ok(Support::Finite { value, maximizer })
            }
            // Dual unbounded means the primal feasible set is empty.
            LpOutcome::Unbounded => Ok(Support::Infeasible),
            // Dual infeasible: the primal is unbounded unless it is empty too.
            LpOutcome::Infeasible => {
                if self.feasible_point()?.is_some() {
                    Ok(Support::Unbounded)
                } else {
                    Ok(Support::Infeasible)
                }
            }
        }
    }

    /// Rebuilds the primal maximizer from the active rows named by the dual
    /// basis. Returns None when recovery is numerically inconsistent.
    fn recover_point(
        &self,
        basis: &[usize],
        direction: &DVector<f64>,
        value: f64,
    ) -> Option<DVector<f64>> {
        let active: Vec<usize> = basis
            .iter()
            .cloned()
            .filter(|&j| j < self.halfspaces.len())
            .collect();
        if active.is_empty() {
            return None;
        }
        let rows = active.len();
        let a = DMatrix::from_fn(rows, self.dim, |r, c| self.halfspaces[active[r]].normal[c]);
        let b = DVector::from_fn(rows, |r, _| self.halfspaces[active[r]].offset);
        let svd = a.svd(true, true);
        let point = svd.solve(&b, 1e-10).ok()?;
        let got = direction.dot(&point);
        if (got - value).abs() <= 1e-6 * (1.0 + value.abs()) && self.contains(&point, 1e-6) {
            Some(point)
        } else {
            None
        }
    }

    /// Any feasible point, or None when the polytope is empty.
    pub fn feasible_point(&self) -> Result<Option<DVector<f64>>, SmeError> {
        let p = IneqProblem {
            n_free: self.dim,
            n_nonneg: 0,
            objective: vec![0.0; self.dim],
            constraints: self
                .halfspaces
                .iter()
                .map(|h| (h.normal.clone(), h.offset))
                .collect(),
        };
        match solve_inequalities(&p)? {
            LpOutcome::Optimal { x, .. } => Ok(Some(DVector::from_vec(x))),
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        }
    }

    pub fn is_feasible(&self) -> Result<bool, SmeError> {
        Ok(self.feasible_point()?.is_some())
    }

    /// Center of the largest inscribed ball.
    pub fn chebyshev_center(&self) -> Result<DVector<f64>, SmeError> {
        // Variables: gamma (free), r (nonneg); maximize r.
        let mut objective = vec![0.0; self.dim + 1];
        objective[self.dim] = -1.0;
        let constraints = self
            .halfspaces
            .iter()
            .map(|h| {
                let mut a = h.normal.clone();
                // Normals are unit, so the ball-clearance coefficient is 1.
                a.push(1.0);
                (a, h.offset)
            })
            .collect();
        let p = IneqProblem {
            n_free: self.dim,
            n_nonneg: 1,
            objective,
            constraints,
        };
        match solve_inequalities(&p)? {
            LpOutcome::Optimal { x, .. } => Ok(DVector::from_vec(x[..self.dim].to_vec())),
            LpOutcome::Infeasible => Err(SmeError::InfeasibleRow { row: 0 }),
            LpOutcome::Unbounded => Err(SmeError::UnboundedRow { row: 0 }),
        }
    }

    /// Removes halfspaces whose removal does not change the feasible region.
    /// The redundancy test maximizes the candidate normal over the remaining
    /// constraints.
    pub fn prune_redundant(&mut self) -> Result<usize, SmeError> {
        let mut removed = 0;
        let mut i = 0;
        while i < self.halfspaces.len() {
            if self.halfspaces.len() == 1 {
                break;
            }
            let cand = self.halfspaces[i].clone();
            let rest = RowPolytope {
                dim: self.dim,
                halfspaces: self
                    .halfspaces
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, h)| h.clone())
                    .collect(),
            };
            let dir = DVector::from_vec(cand.normal.clone());
            let redundant = match rest.support(&dir)? {
                Support::Finite { value, .. } => value <= cand.offset + 1e-9,
                Support::Unbounded => false,
                Support::Infeasible => true,
            };
            if redundant {
                self.halfspaces.remove(i);
                removed += 1;
            } else {
                i += 1;
            }
        }
        Ok(removed)
    }

    /// Axis-aligned bounds `[-h(-e_k), h(e_k)]` per coordinate; None when the
    /// polytope is unbounded in that direction.
    pub fn axis_bounds(&self) -> Result<Vec<(Option<f64>, Option<f64>)>, SmeError> {
        let mut out = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let mut e = DVector::zeros(self.dim);
            e[k] = 1.0;
            let hi = match self.support(&e)? {
                Support::Finite { value, .. } => Some(value),
                Support::Unbounded => None,
                Support::Infeasible => return Err(SmeError::InfeasibleRow { row: 0 }),
            };
            e[k] = -1.0;
            let lo = match self.support(&e)? {
                Support::Finite { value, .. } => Some(-value),
                Support::Unbounded => None,
                Support::Infeasible => return Err(SmeError::InfeasibleRow { row: 0 }),
            };
            out.push((lo, hi));
        }
        Ok(out)
    }

    /// Vertex enumeration for low dimension (`dim <= 3`): every affinely
    /// independent constraint subset contributes a candidate intersection.
    pub fn enumerate_vertices(&self) -> Result<Vec<DVector<f64>>, SmeError> {
        assert!(self.dim <= 3, "vertex enumeration is limited to dim <= 3");
        let n = self.dim;
        let m = self.halfspaces.len();
        let mut verts: Vec<DVector<f64>> = Vec::new();
        let mut idx = vec![0usize; n];
        // Iterate over all n-subsets of constraints.
        fn subsets(m: usize, n: usize, start: usize, idx: &mut Vec<usize>, pos: usize, out: &mut Vec<Vec<usize>>) {
            if pos == n {
                out.push(idx.clone());
                return;
            }
            for i in start..m {
                idx[pos] = i;
                subsets(m, n, i + 1, idx, pos + 1, out);
            }
        }
        let mut combos = Vec::new();
        if m >= n && n >= 1 {
            subsets(m, n, 0, &mut idx, 0, &mut combos);
        }
        for combo in combos {
            let a = DMatrix::from_fn(n, n, |r, c| self.halfspaces[combo[r]].normal[c]);
            let b = DVector::from_fn(n, |r, _| self.halfspaces[combo[r]].offset);
            let lu = a.lu();
            let Some(point) = lu.solve(&b) else { continue };
            if !point.iter().all(|v| v.is_finite()) {
                continue;
            }
            if self.contains(&point, 1e-7) && !verts.iter().any(|v| (v - &point).amax() < 1e-8) {
                verts.push(point);
            }
        }
        Ok(verts)
    }
}

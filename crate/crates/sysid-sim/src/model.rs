use nalgebra::{DMatrix, DVector};

use crate::SimError;

/// True system parameters `theta = [A B]` with `n_z = n_x + n_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    a_matrix: DMatrix<f64>,
    b_matrix: DMatrix<f64>,
    theta: DMatrix<f64>,
}

impl SystemModel {
    pub fn new(a_matrix: DMatrix<f64>, b_matrix: DMatrix<f64>) -> Result<Self, SimError> {
        let n_x = a_matrix.nrows();
        if n_x == 0 {
            return Err(SimError::InvalidParameter("n_x must be at least 1".into()));
        }
        if a_matrix.ncols() != n_x {
            return Err(SimError::DimensionMismatch {
                context: "A must be square",
                expected: n_x,
                got: a_matrix.ncols(),
            });
        }
        if b_matrix.nrows() != n_x {
            return Err(SimError::DimensionMismatch {
                context: "B row count must equal n_x",
                expected: n_x,
                got: b_matrix.nrows(),
            });
        }
        let n_u = b_matrix.ncols();
        let mut theta = DMatrix::zeros(n_x, n_x + n_u);
        theta.view_mut((0, 0), (n_x, n_x)).copy_from(&a_matrix);
        if n_u > 0 {
            theta.view_mut((0, n_x), (n_x, n_u)).copy_from(&b_matrix);
        }
        Ok(Self {
            a_matrix,
            b_matrix,
            theta,
        })
    }

    /// Autonomous system (`n_u = 0`).
    pub fn autonomous(a_matrix: DMatrix<f64>) -> Result<Self, SimError> {
        let n_x = a_matrix.nrows();
        Self::new(a_matrix, DMatrix::zeros(n_x, 0))
    }

    pub fn n_x(&self) -> usize {
        self.a_matrix.nrows()
    }

    pub fn n_u(&self) -> usize {
        self.b_matrix.ncols()
    }

    pub fn n_z(&self) -> usize {
        self.n_x() + self.n_u()
    }

    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a_matrix
    }

    pub fn b_matrix(&self) -> &DMatrix<f64> {
        &self.b_matrix
    }

    /// Concatenated `[A B]`.
    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    /// One noiseless transition `A x + B u`.
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut next = &self.a_matrix * x;
        if self.n_u() > 0 {
            next += &self.b_matrix * u;
        }
        next
    }
}

use nalgebra::DMatrix;

use crate::Trajectory;

/// Minimum eigenvalue of `(1/m) sum z z^T` on each contiguous length-`m`
/// segment starting at multiples of `m`. One value per full segment.
pub fn check_pe(traj: &Trajectory, m: usize) -> Vec<f64> {
    assert!(m >= 1, "segment length must be positive");
    let n_z = traj.n_z();
    let mut out = Vec::new();
    let mut start = 0;
    while start + m <= traj.len() {
        let mut gram = DMatrix::zeros(n_z, n_z);
        for step in &traj.steps[start..start + m] {
            gram += &step.z * step.z.transpose();
        }
        gram /= m as f64;
        let eigs = gram.symmetric_eigen().eigenvalues;
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        // Clamp tiny negative eigensolver noise; the Gram matrix is PSD.
        out.push(min.max(0.0));
        start += m;
    }
    out
}

//! Continuous Lyapunov equation A X + X Aᵀ + D = 0 for the 4x4 moment system.

use nalgebra::{Matrix4, SMatrix, SVector};

use crate::error::{Error, Result};

type Kron = SMatrix<f64, 16, 16>;

/// Relative residual allowed on every solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Frobenius norm of A X + X Aᵀ + D.
pub fn residual(a: &Matrix4<f64>, d: &Matrix4<f64>, x: &Matrix4<f64>) -> f64 {
    (a * x + x * a.transpose() + d).norm()
}

/// Bound the residual is checked against, tol (‖A‖‖X‖ + ‖D‖).
pub fn residual_bound(a: &Matrix4<f64>, d: &Matrix4<f64>, x: &Matrix4<f64>) -> f64 {
    RESIDUAL_TOLERANCE * (a.norm() * x.norm() + d.norm())
}

/// Solves through the 16x16 Kronecker form with one refinement sweep.
///
/// `A` and `D` are rescaled by the norm of `A` first; the solution is
/// invariant under a common rescaling and the scaled system is better conditioned.
pub fn solve(a: &Matrix4<f64>, d: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let a_s = a / scale;
    let d_s = d / scale;
    // Column-major vec: vec(A X) = (I ⊗ A) vec X, vec(X Aᵀ) = (A ⊗ I) vec X.
    let mut k = Kron::zeros();
    for i in 0..4 {
        for j in 0..4 {
            for p in 0..4 {
                k[(j * 4 + i, j * 4 + p)] += a_s[(i, p)];
                k[(j * 4 + i, p * 4 + i)] += a_s[(j, p)];
            }
        }
    }
    let lu = k.lu();
    let rhs = SVector::<f64, 16>::from_iterator(d_s.iter().map(|v| -v));
    let mut x = lu.solve(&rhs).ok_or(Error::Singular("Lyapunov operator"))?;
    let r = rhs - k * x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let x = Matrix4::from_column_slice(x.as_slice());
    Ok((x + x.transpose()) * 0.5)
}

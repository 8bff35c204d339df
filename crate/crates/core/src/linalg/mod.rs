//! Sparse symmetric storage, an envelope Cholesky factorization, and the
//! constrained generalized eigensolver used by the Jacobi spectrum.

mod eigen;
mod skyline;
mod sparse;

pub use eigen::{lowest_eigenpairs, EigenOptions, EigenSolution, SolverPath};
pub use skyline::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use sparse::CsrMatrix;

/// Euclidean dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

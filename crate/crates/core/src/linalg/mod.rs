//! Dense real/complex linear algebra used by the certificates.

mod eigen;
mod lu;
mod lyapunov;
mod matrix;

pub use eigen::{
    eigen_decomposition, eigen_decomposition_with_limit, eigenvalues, is_hurwitz,
    spectral_order, EigenDecomposition, Spectrum, DEFAULT_CONDITION_LIMIT, MAX_EIGEN_DIM,
};
pub use lu::{inverse, Lu};
pub use lyapunov::{solve_lyapunov, solve_lyapunov_complex};
pub use matrix::{ComplexMatrix, Dense, Matrix, Scalar};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for properties that hold exactly by construction (symmetry,
/// zero row sums).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for residuals of iterative or factored results.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Scalar>(a: &Dense<T>, b: &Dense<T>) -> Dense<T> {
    let (br, bc) = b.shape();
    Dense::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Hermitian part `(H^* + H) / 2`. The result is exactly Hermitian.
pub fn sym_part(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = h.ensure_square()?;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
        for j in i + 1..n {
            let v = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    Ok(out)
}

/// Symmetric part `(M + M^T) / 2` of a real matrix, exactly symmetric.
pub fn sym_part_real(m: &Matrix) -> Result<Matrix> {
    m.symmetrized()
}

fn hermitian_tolerance(s: &ComplexMatrix) -> f64 {
    STRUCTURAL_TOL * s.max_norm().max(1.0)
}

/// Eigenvalues of a Hermitian matrix, descending.
///
/// The input is checked against [`STRUCTURAL_TOL`] (scaled by its largest
/// entry) and then exactly symmetrized before the solve.
pub fn hermitian_eigenvalues(s: &ComplexMatrix) -> Result<Vec<f64>> {
    s.ensure_square()?;
    let asymmetry = s.hermitian_defect();
    if asymmetry > hermitian_tolerance(s) {
        return Err(Error::NotHermitian { asymmetry });
    }
    let mut values = eigenvalues(&sym_part(s)?)?.real_parts();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Eigenvalues of a real symmetric matrix, descending.
pub fn symmetric_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    s.ensure_square()?;
    let asymmetry = s.hermitian_defect();
    if asymmetry > STRUCTURAL_TOL * s.max_norm().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    hermitian_eigenvalues(&s.to_complex())
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_hermitian_eigenvalue(s: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(s)?[0])
}

/// `s ≺ -epsilon I`, i.e. the largest eigenvalue of Hermitian `s` is below
/// `-epsilon`.
pub fn is_negative_definite(s: &ComplexMatrix, epsilon: f64) -> Result<bool> {
    Ok(max_hermitian_eigenvalue(s)? < -epsilon)
}

/// Symmetric positive definiteness via a Cholesky factorization attempt.
pub fn is_positive_definite(s: &Matrix) -> Result<bool> {
    let n = s.ensure_square()?;
    let asymmetry = s.hermitian_defect();
    if asymmetry > STRUCTURAL_TOL * s.max_norm().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let s = s.symmetrized()?;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Ok(false);
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    Ok(true)
}

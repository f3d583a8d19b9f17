use super::lu::Lu;
use super::matrix::{ComplexMatrix, Dense, Matrix, Scalar};
use super::STRUCTURAL_TOL;
use crate::error::{Error, Result};

/// Solves `X a + a^H X = -w` for Hermitian `w` by vectorization:
/// `(aᵀ ⊗ I + I ⊗ a^H) vec(X) = -vec(w)` with column-major `vec`, factored
/// by dense LU. The solution is returned as `(X + X^H) / 2`.
fn solve_vectorized<T: Scalar>(a: &Dense<T>, w: &Dense<T>) -> Result<Dense<T>> {
    let n = a.ensure_square()?;
    w.ensure_shape(n, n)?;
    let asymmetry = w.hermitian_defect();
    if asymmetry > STRUCTURAL_TOL * w.max_norm().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }

    let dim = n * n;
    let mut k = Dense::<T>::zeros(dim, dim);
    // row index i + j n addresses X[i][j]
    for j in 0..n {
        for i in 0..n {
            let row = i + j * n;
            // (X a)[i][j] = sum_l X[i][l] a[l][j]
            for l in 0..n {
                let col = i + l * n;
                k[(row, col)] = k[(row, col)] + a[(l, j)];
            }
            // (a^H X)[i][j] = sum_r conj(a[r][i]) X[r][j]
            for r in 0..n {
                let col = r + j * n;
                k[(row, col)] = k[(row, col)] + a[(r, i)].conjugate();
            }
        }
    }
    let rhs: Vec<T> = (0..dim).map(|idx| -w[(idx % n, idx / n)]).collect();
    let x = Lu::factor(&k)?.solve(&rhs)?;
    let sol = Dense::from_fn(n, n, |i, j| x[i + j * n]);
    let half = T::from_real(0.5);
    Ok(Dense::from_fn(n, n, |i, j| {
        (sol[(i, j)] + sol[(j, i)].conjugate()) * half
    }))
}

/// Solves the Lyapunov equation `Q a + aᵀ Q = -w` for symmetric `Q`.
///
/// Fails with [`Error::Singular`] when two eigenvalues of `a` sum to zero.
/// For Hurwitz `a` and `w ≻ 0` the solution is positive definite.
pub fn solve_lyapunov(a: &Matrix, w: &Matrix) -> Result<Matrix> {
    solve_vectorized(a, w)
}

/// Complex Hermitian counterpart: `X a + a^H X = -w`.
pub fn solve_lyapunov_complex(a: &ComplexMatrix, w: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve_vectorized(a, w)
}

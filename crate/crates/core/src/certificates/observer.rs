//! Output-injection gain design for observer coupling.
//!
//! For a detectable pair `(A, C)` there is a `P ≻ 0` with
//! `PA + AᵀP - CᵀC ≺ -εI`; then `F = P⁻¹Cᵀ` and any coupling strength with
//! `c·Re{λ_2} < -1` certify consensus of the observer-coupled network,
//! since `{P(A + cλ_k F C)}^s = (PA)^s + c Re{λ_k} CᵀC`.
//!
//! The search is bounded and every candidate is validated a posteriori:
//!
//! * Hurwitz `A`: Lyapunov solves `PA + AᵀP = -(εI + I + βCᵀC)` for
//!   `β ∈ {0, 0.5, 1}`.
//! * Otherwise: the stabilizing solution `X` of the filter Riccati equation
//!   `AX + XAᵀ - XCᵀCX + wI = 0`, taken from the stable invariant subspace of
//!   its Hamiltonian, gives `P = X⁻¹` with `PA + AᵀP - CᵀC = -w P²`; the
//!   weight `w` runs over a fixed grid.

use num_complex::Complex64;

use super::ensure_spd;
use crate::error::{Error, Result};
use crate::linalg::{
    eigen_decomposition, inverse, is_hurwitz, is_positive_definite, solve_lyapunov,
    symmetric_eigenvalues, ComplexMatrix, Matrix,
};

const LYAPUNOV_BETAS: [f64; 3] = [0.0, 0.5, 1.0];
const RICCATI_WEIGHTS: [f64; 8] = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 0.1, 0.01];
/// Candidate budget for the whole search.
const MAX_CANDIDATES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverDesign {
    pub p: Matrix,
    /// `F = P⁻¹ Cᵀ`, `n x q`.
    pub f: Matrix,
    /// `λ_max(PA + AᵀP - CᵀC)`, below `-ε`.
    pub max_eigenvalue: f64,
    pub epsilon: f64,
    /// Human-readable name of the candidate that succeeded.
    pub route: String,
    pub candidates_tried: usize,
}

impl ObserverDesign {
    /// The smallest coupling strength allowed by the rule `c·Re{λ_2} < -1`,
    /// i.e. `1/|Re λ_2|`; any strictly larger `c` certifies. `None` when
    /// `Re λ_2 ≥ 0`.
    pub fn min_coupling(&self, lambda2: Complex64) -> Option<f64> {
        (lambda2.re < 0.0).then(|| 1.0 / lambda2.re.abs())
    }

    /// Whether `c` satisfies `c·Re{λ_2} < -1`.
    pub fn coupling_certifies(&self, c: f64, lambda2: Complex64) -> bool {
        c * lambda2.re < -1.0
    }
}

/// `λ_max(PA + AᵀP - CᵀC)`.
pub fn design_inequality_max_eigenvalue(a: &Matrix, c: &Matrix, p: &Matrix) -> Result<f64> {
    let pa = p.matmul(a)?;
    let form = pa
        .try_add(&pa.transpose())?
        .try_sub(&c.transpose().matmul(c)?)?
        .symmetrized()?;
    Ok(symmetric_eigenvalues(&form)?[0])
}

/// Finds `P ≻ 0` with `PA + AᵀP - CᵀC ≺ -εI` and returns it with
/// `F = P⁻¹Cᵀ`. Fails with [`Error::DesignFailed`] when no candidate in the
/// bounded search validates, which happens for undetectable pairs and for
/// `ε` too large for the pair.
pub fn design_observer_gain(a: &Matrix, c: &Matrix, epsilon: f64) -> Result<ObserverDesign> {
    let n = a.ensure_square()?;
    if c.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: (c.rows(), n),
            got: c.shape(),
        });
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be finite and positive, got {epsilon}"
        )));
    }

    let ctc = c.transpose().matmul(c)?;
    let eye = Matrix::identity(n);
    let mut tried = 0usize;

    let accept = |p: Matrix, route: String, tried: usize| -> Option<ObserverDesign> {
        let p = p.symmetrized().ok()?;
        if ensure_spd(&p, "P").is_err() {
            return None;
        }
        let top = design_inequality_max_eigenvalue(a, c, &p).ok()?;
        if !(top < -epsilon) {
            return None;
        }
        let f = inverse(&p).ok()?.matmul(&c.transpose()).ok()?;
        Some(ObserverDesign {
            p,
            f,
            max_eigenvalue: top,
            epsilon,
            route,
            candidates_tried: tried,
        })
    };

    let (stable, _) = is_hurwitz(&a.to_complex(), 0.0)?;
    if stable {
        for beta in LYAPUNOV_BETAS {
            if tried == MAX_CANDIDATES {
                break;
            }
            tried += 1;
            let w = eye.scale(1.0 + epsilon).try_add(&ctc.scale(beta))?;
            if let Ok(p) = solve_lyapunov(a, &w) {
                if let Some(d) = accept(p, format!("lyapunov(beta={beta})"), tried) {
                    return Ok(d);
                }
            }
        }
    }

    for w in RICCATI_WEIGHTS {
        if tried == MAX_CANDIDATES {
            break;
        }
        tried += 1;
        let Some(x) = filter_riccati(a, &ctc, w) else {
            continue;
        };
        if !matches!(is_positive_definite(&x), Ok(true)) {
            continue;
        }
        let Ok(p) = inverse(&x) else { continue };
        if let Some(d) = accept(p, format!("riccati(w={w})"), tried) {
            return Ok(d);
        }
    }

    Err(Error::DesignFailed(format!(
        "no candidate P among {tried} satisfied PA + A^T P - C^T C < -{epsilon} I; \
         (A, C) may not be detectable or epsilon is too large"
    )))
}

/// Stabilizing solution of `AX + XAᵀ - X (CᵀC) X + wI = 0`, if the
/// Hamiltonian `[[Aᵀ, -CᵀC], [-wI, -A]]` has exactly `n` stable eigenvalues
/// and is diagonalizable.
fn filter_riccati(a: &Matrix, ctc: &Matrix, w: f64) -> Option<Matrix> {
    let n = a.rows();
    let ham = Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => a[(j, i)],
        (true, false) => -ctc[(i, j - n)],
        (false, true) => {
            if i - n == j {
                -w
            } else {
                0.0
            }
        }
        (false, false) => -a[(i - n, j - n)],
    });
    let dec = eigen_decomposition(&ham.to_complex()).ok()?;
    let stable: Vec<usize> = (0..2 * n).filter(|&k| dec.values[k].re < 0.0).collect();
    if stable.len() != n {
        return None;
    }
    let u1 = ComplexMatrix::from_fn(n, n, |i, j| dec.q_inv[(i, stable[j])]);
    let u2 = ComplexMatrix::from_fn(n, n, |i, j| dec.q_inv[(n + i, stable[j])]);
    let x = u2.matmul(&inverse(&u1).ok()?).ok()?;
    x.real_part().symmetrized().ok()
}

//! Lyapunov-function certificate `V = yᵀ(Q ⊗ P)y` on the stacked
//! differences.
//!
//! With `Q` solving `Q L* + L*ᵀ Q = -I`,
//!
//! ```text
//! dV/dt = 2 yᵀ[Q ⊗ (PA)^s] y + 2c yᵀ[(QL*)^s ⊗ PΓ] y ≤ 2 (c1 + c·c2) yᵀy
//! ```
//!
//! where `c1 = max μ_k ν_j` over the eigenvalues of `Q` and `(PA)^s`, and
//! `c2 = γ_2 θ_n` is the least negative eigenvalue of `(QL*)^s` times the
//! smallest eigenvalue of `PΓ`. Consensus follows once `c·c2 + c1 < 0`.

use super::{ensure_spd, ConsensusCertificate, Criterion, SystemSpec};
use crate::coupling::{reduced_coupling, CouplingMatrix};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, solve_lyapunov, symmetric_eigenvalues, Matrix, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem3Constants {
    /// Solution of `Q L* + L*ᵀ Q = -I`.
    pub q: Matrix,
    /// Eigenvalues of `Q`, descending.
    pub mu: Spectrum,
    /// Eigenvalues of `(PA)^s`, descending.
    pub nu: Spectrum,
    /// Eigenvalues of `(QL*)^s`, descending.
    pub gamma: Spectrum,
    /// Eigenvalues of `PΓ`, descending.
    pub theta: Spectrum,
    pub c1: f64,
    pub c2: f64,
    /// `c1 / -c2` when `c1 > 0`, else `0`; any `c > c_min` certifies.
    pub c_min: f64,
}

/// Computes `Q`, the four spectra and `c1`, `c2`, `c_min`.
///
/// Requires `P ≻ 0`, `PΓ` symmetric positive definite and `L*` Hurwitz.
pub fn theorem3_constants(
    a: &Matrix,
    gamma: &Matrix,
    p: &Matrix,
    l: &CouplingMatrix,
) -> Result<Theorem3Constants> {
    let n = a.ensure_square()?;
    gamma.ensure_shape(n, n)?;
    p.ensure_shape(n, n)?;
    ensure_spd(p, "P")?;
    let pg = p.matmul(gamma)?;
    ensure_spd(&pg, "P*Gamma")?;

    let l_star = reduced_coupling(l);
    let max_real = eigenvalues(&l_star.to_complex())?.max_real();
    if !(max_real < 0.0) {
        return Err(Error::NotHurwitz { max_real });
    }
    let q = solve_lyapunov(&l_star, &Matrix::identity(l_star.rows()))?;

    let mu = symmetric_eigenvalues(&q)?;
    let nu = symmetric_eigenvalues(&p.matmul(a)?.symmetrized()?)?;
    let gam = symmetric_eigenvalues(&q.matmul(&l_star)?.symmetrized()?)?;
    let theta = symmetric_eigenvalues(&pg.symmetrized()?)?;

    let c1 = mu
        .iter()
        .flat_map(|&m| nu.iter().map(move |&v| m * v))
        .fold(f64::NEG_INFINITY, f64::max);
    let c2 = gam[0] * theta[theta.len() - 1];
    let c_min = if c1 > 0.0 { c1 / -c2 } else { 0.0 };

    Ok(Theorem3Constants {
        q,
        mu: Spectrum::from_real(&mu),
        nu: Spectrum::from_real(&nu),
        gamma: Spectrum::from_real(&gam),
        theta: Spectrum::from_real(&theta),
        c1,
        c2,
        c_min,
    })
}

/// Verdict `c·c2 + c1 < 0` (strict), margin `-(c·c2 + c1)`.
pub fn check_theorem3(s: &SystemSpec, p: &Matrix) -> Result<ConsensusCertificate> {
    let k = theorem3_constants(&s.a, &s.gamma, p, &s.coupling)?;
    let bound = s.c * k.c2 + k.c1;
    let mut cert = ConsensusCertificate::new(Criterion::Theorem3, bound < 0.0, -bound)
        .param("c", s.c)
        .param("c1", k.c1)
        .param("c2", k.c2)
        .param("c_min", k.c_min)
        .note("verdict: c*c2 + c1 < 0 (the decay condition on dV/dt; the weaker c*c2 < c1 is not sufficient)")
        .note("Q solves Q L* + L*^T Q = -I; c1 = max mu_k*nu_j over the m-1 eigenvalues of Q");
    cert.p = Some(p.clone());
    cert.q = Some(k.q);
    Ok(cert)
}

//! Consensus certificates.
//!
//! Every check returns a [`ConsensusCertificate`] carrying the verdict, a
//! margin (positive exactly when the verdict holds), per-mode values and the
//! witnesses and tolerances it used, so a report can be reproduced from its
//! inputs alone.
//!
//! Modes are indexed by the nonzero eigenvalues `λ_2..λ_m` of `L`, taken
//! from the spectrum of `L*` in descending order of real part. `λ_2` is
//! the first of them, the slowest mode.

mod lyapunov_bound;
mod observer;

pub use lyapunov_bound::{check_theorem3, theorem3_constants, Theorem3Constants};
pub use observer::{design_inequality_max_eigenvalue, design_observer_gain, ObserverDesign};

use std::fmt;

use num_complex::Complex64;

use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    is_hurwitz, is_positive_definite, max_hermitian_eigenvalue, solve_lyapunov_complex, sym_part,
    symmetric_eigenvalues, ComplexMatrix, Matrix, STRUCTURAL_TOL,
};
use crate::spectral::analyze_spectrum;

/// Which criterion produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Every modal matrix `A + cλ_kΓ` is Hurwitz.
    Theorem1,
    /// A common `P ≻ 0` with `{P(A + cλ_kΓ)}^s ≺ -εI` for every mode.
    Theorem2,
    /// `PA + AᵀP + c Re{λ_2} PΓ ≺ -εI` for symmetric positive definite `PΓ`.
    Theorem2Simplified,
    /// Modal Hurwitz test for observer coupling, `Γ = FC`.
    Corollary1,
    /// Common-`P` inequality for observer coupling, `Γ = FC`.
    Corollary2,
    /// Lyapunov function `yᵀ(Q ⊗ P)y` with `c·c2 + c1 < 0`.
    Theorem3,
}

impl Criterion {
    pub fn tag(self) -> &'static str {
        match self {
            Criterion::Theorem1 => "theorem1",
            Criterion::Theorem2 => "theorem2",
            Criterion::Theorem2Simplified => "theorem2-simplified",
            Criterion::Corollary1 => "corollary1",
            Criterion::Corollary2 => "corollary2",
            Criterion::Theorem3 => "theorem3",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One mode of a modal criterion: `value` is the worst real part of
/// `A + cλΓ` (modal test) or the largest eigenvalue of the tested Hermitian
/// form (common-`P` test).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub lambda: Complex64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusCertificate {
    pub criterion: Criterion,
    pub verdict: bool,
    pub margin: f64,
    pub per_mode: Vec<ModeReport>,
    pub p: Option<Matrix>,
    pub q: Option<Matrix>,
    /// Named numeric parameters and thresholds used by the check.
    pub parameters: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl ConsensusCertificate {
    fn new(criterion: Criterion, verdict: bool, margin: f64) -> Self {
        Self {
            criterion,
            verdict,
            margin,
            per_mode: Vec::new(),
            p: None,
            q: None,
            parameters: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn param(mut self, name: &str, value: f64) -> Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }
}

const MODE_ORDER_NOTE: &str =
    "modes ordered by descending real part of lambda, ties by descending imaginary part";

/// Output feedback pair for observer coupling: `Γ = F C`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputCoupling {
    /// `n x q` gain.
    pub f: Matrix,
    /// `q x n` measurement map.
    pub c: Matrix,
}

/// A linearly coupled system `dx_i/dt = A x_i + c Σ_j l_ij Γ x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub a: Matrix,
    pub gamma: Matrix,
    pub c: f64,
    pub coupling: CouplingMatrix,
    /// Present when `gamma` was formed as `F C`.
    pub output: Option<OutputCoupling>,
}

impl SystemSpec {
    /// Checks that `A` and `Γ` are `n x n` and that `c` is finite and
    /// nonnegative.
    pub fn new(a: Matrix, gamma: Matrix, c: f64, coupling: CouplingMatrix) -> Result<Self> {
        let n = a.ensure_square()?;
        gamma.ensure_shape(n, n)?;
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coupling strength must be finite and nonnegative, got {c}"
            )));
        }
        Ok(Self {
            a,
            gamma,
            c,
            coupling,
            output: None,
        })
    }

    /// Observer coupling with `Γ = F C`, `F` being `n x q` and `C` `q x n`.
    pub fn observer(
        a: Matrix,
        f: Matrix,
        c_out: Matrix,
        c: f64,
        coupling: CouplingMatrix,
    ) -> Result<Self> {
        let n = a.ensure_square()?;
        if f.rows() != n || c_out.cols() != n || f.cols() != c_out.rows() {
            return Err(Error::DimensionMismatch {
                expected: (n, c_out.rows()),
                got: f.shape(),
            });
        }
        let gamma = f.matmul(&c_out)?;
        let mut spec = Self::new(a, gamma, c, coupling)?;
        spec.output = Some(OutputCoupling { f, c: c_out });
        Ok(spec)
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn agents(&self) -> usize {
        self.coupling.agents()
    }

    pub fn with_coupling_strength(&self, c: f64) -> Result<Self> {
        let mut s = Self::new(self.a.clone(), self.gamma.clone(), c, self.coupling.clone())?;
        s.output = self.output.clone();
        Ok(s)
    }
}

/// `(λ_k, A + cλ_kΓ)` for each nonzero eigenvalue of `L`, in reduced
/// spectrum order.
pub fn modal_matrices(s: &SystemSpec) -> Result<Vec<(Complex64, ComplexMatrix)>> {
    let spectrum = analyze_spectrum(&s.coupling)?;
    let a = s.a.to_complex();
    let g = s.gamma.to_complex();
    Ok(spectrum
        .reduced
        .values()
        .iter()
        .map(|&lambda| {
            let m = a.try_add(&g.scale(lambda * s.c)).expect("same shape");
            (lambda, m)
        })
        .collect())
}

fn ensure_nonnegative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be finite and nonnegative, got {value}"
        )))
    }
}

fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be finite and positive, got {value}"
        )))
    }
}

/// Rejects a `P` that is not symmetric positive definite.
pub(crate) fn ensure_spd(p: &Matrix, what: &'static str) -> Result<()> {
    p.ensure_square()?;
    let asymmetry = p.hermitian_defect();
    if asymmetry > STRUCTURAL_TOL * p.max_norm().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    if !is_positive_definite(p)? {
        return Err(Error::NotPositiveDefinite { what });
    }
    Ok(())
}

/// Modal test: every `A + cλ_kΓ` is Hurwitz with `max Re eig < -margin`.
///
/// The certificate margin is `-max_k max Re eig(A + cλ_kΓ)`.
pub fn check_theorem1(s: &SystemSpec, margin: f64) -> Result<ConsensusCertificate> {
    modal_hurwitz(s, margin, Criterion::Theorem1)
}

fn modal_hurwitz(s: &SystemSpec, margin: f64, criterion: Criterion) -> Result<ConsensusCertificate> {
    ensure_nonnegative("margin", margin)?;
    let modes = modal_matrices(s)?;
    let mut per_mode = Vec::with_capacity(modes.len());
    let mut worst = f64::NEG_INFINITY;
    for (lambda, m) in &modes {
        let (_, w) = is_hurwitz(m, margin)?;
        worst = worst.max(w);
        per_mode.push(ModeReport {
            lambda: *lambda,
            value: w,
        });
    }
    let mut cert = ConsensusCertificate::new(criterion, worst < -margin, -worst)
        .param("c", s.c)
        .param("required_margin", margin)
        .note("verdict: max_k max Re eig(A + c*lambda_k*Gamma) < -required_margin")
        .note(MODE_ORDER_NOTE);
    cert.per_mode = per_mode;
    Ok(cert)
}

/// Common-`P` test: `{P(A + cλ_kΓ)}^s ≺ -εI` for every mode with one `P` and one
/// `ε`. The margin is the slack `-max_k λ_max - ε`.
pub fn check_theorem2(s: &SystemSpec, p: &Matrix, epsilon: f64) -> Result<ConsensusCertificate> {
    common_p(s, p, epsilon, Criterion::Theorem2)
}

fn common_p(
    s: &SystemSpec,
    p: &Matrix,
    epsilon: f64,
    criterion: Criterion,
) -> Result<ConsensusCertificate> {
    ensure_positive("epsilon", epsilon)?;
    p.ensure_shape(s.state_dim(), s.state_dim())?;
    ensure_spd(p, "P")?;
    let pc = p.to_complex();
    let modes = modal_matrices(s)?;
    let mut per_mode = Vec::with_capacity(modes.len());
    let mut worst = f64::NEG_INFINITY;
    for (lambda, m) in &modes {
        let h = sym_part(&pc.matmul(m)?)?;
        let top = max_hermitian_eigenvalue(&h)?;
        worst = worst.max(top);
        per_mode.push(ModeReport {
            lambda: *lambda,
            value: top,
        });
    }
    let mut cert = ConsensusCertificate::new(criterion, worst < -epsilon, -worst - epsilon)
        .param("c", s.c)
        .param("epsilon", epsilon)
        .note("verdict: max_k lambda_max({P(A + c*lambda_k*Gamma)}^s) < -epsilon, one P and one epsilon for all modes")
        .note(MODE_ORDER_NOTE);
    cert.per_mode = per_mode;
    cert.p = Some(p.clone());
    Ok(cert)
}

/// Simplified common-`P` condition `PA + AᵀP + c Re{λ_2} PΓ ≺ -εI`, valid
/// when `PΓ` is symmetric positive definite. The margin is the slack
/// `-λ_max - ε`.
pub fn check_theorem2_simplified(
    s: &SystemSpec,
    p: &Matrix,
    epsilon: f64,
) -> Result<ConsensusCertificate> {
    ensure_positive("epsilon", epsilon)?;
    p.ensure_shape(s.state_dim(), s.state_dim())?;
    ensure_spd(p, "P")?;
    let pg = p.matmul(&s.gamma)?;
    ensure_spd(&pg, "P*Gamma")?;
    let pg = pg.symmetrized()?;

    let lambda2 = analyze_spectrum(&s.coupling)?.lambda2;
    let pa = p.matmul(&s.a)?;
    let form = pa
        .try_add(&pa.transpose())?
        .try_add(&pg.scale(s.c * lambda2.re))?
        .symmetrized()?;
    let top = symmetric_eigenvalues(&form)?[0];
    let mut cert = ConsensusCertificate::new(
        Criterion::Theorem2Simplified,
        top < -epsilon,
        -top - epsilon,
    )
    .param("c", s.c)
    .param("epsilon", epsilon)
    .param("re_lambda2", lambda2.re)
    .note("verdict: lambda_max(PA + A^T P + c*Re(lambda2)*P*Gamma) < -epsilon");
    cert.per_mode.push(ModeReport {
        lambda: lambda2,
        value: top,
    });
    cert.p = Some(p.clone());
    Ok(cert)
}

/// How an observer-coupled system is certified.
#[derive(Debug, Clone, PartialEq)]
pub enum ObserverCheck {
    /// Modal Hurwitz test with the given margin.
    Modal { margin: f64 },
    /// Common-`P` inequality.
    CommonP { p: Matrix, epsilon: f64 },
}

/// Certifies observer coupling `Γ = FC` by delegating to the matching
/// model-(2) check.
pub fn check_observer(s: &SystemSpec, check: &ObserverCheck) -> Result<ConsensusCertificate> {
    let Some(out) = &s.output else {
        return Err(Error::InvalidArgument(
            "observer check needs a system built from F and C".into(),
        ));
    };
    let cert = match check {
        ObserverCheck::Modal { margin } => modal_hurwitz(s, *margin, Criterion::Corollary1)?,
        ObserverCheck::CommonP { p, epsilon } => common_p(s, p, *epsilon, Criterion::Corollary2)?,
    };
    Ok(cert
        .param("outputs", out.c.rows() as f64)
        .note("Gamma = F*C"))
}

/// Most candidates [`find_common_p`] will try.
const COMMON_P_CANDIDATES: usize = 20;

/// Best-effort search for a `P` certifying the common-`P` test.
///
/// Candidates are the real parts of the Hermitian Lyapunov solutions
/// `X M_k + M_k^H X = -I` for each modal matrix, slowest mode first, then
/// their sum and finally the identity. A candidate whose Hermitian forms
/// are all negative definite is normalized to unit spectral norm, scaled
/// up if needed to clear `ε`, and returned once [`check_theorem2`] accepts
/// it. `None` does not prove that no such `P` exists.
pub fn find_common_p(s: &SystemSpec, epsilon: f64) -> Option<Matrix> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return None;
    }
    let modes = modal_matrices(s).ok()?;
    let n = s.state_dim();
    let eye = ComplexMatrix::identity(n);

    let mut candidates: Vec<Matrix> = Vec::new();
    let mut sum = Matrix::zeros(n, n);
    for (_, m) in modes.iter().take(COMMON_P_CANDIDATES - 2) {
        if let Ok(x) = solve_lyapunov_complex(m, &eye) {
            let p = x.real_part().symmetrized().ok()?;
            sum = sum.try_add(&p).ok()?;
            candidates.push(p);
        }
    }
    candidates.push(sum);
    candidates.push(Matrix::identity(n));

    for candidate in candidates {
        if !matches!(is_positive_definite(&candidate), Ok(true)) {
            continue;
        }
        let Ok(top) = symmetric_eigenvalues(&candidate).map(|v| v[0]) else {
            continue;
        };
        let p = candidate.scale(1.0 / top);
        let pc = p.to_complex();
        let worst = modes
            .iter()
            .map(|(_, m)| {
                pc.matmul(m)
                    .and_then(|pm| sym_part(&pm))
                    .and_then(|h| max_hermitian_eigenvalue(&h))
                    .unwrap_or(f64::INFINITY)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if !(worst < 0.0) {
            continue;
        }
        let p = if worst < -epsilon {
            p
        } else {
            p.scale(2.0 * epsilon / -worst)
        };
        if matches!(check_theorem2(s, &p, epsilon), Ok(cert) if cert.verdict) {
            return Some(p);
        }
    }
    None
}

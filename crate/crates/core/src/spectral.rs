//! Spectra of `L` and `L*` and the correspondence between them.

use num_complex::Complex64;

use crate::coupling::{reduced_coupling, CouplingMatrix};
use crate::error::Result;
use crate::linalg::{eigenvalues, Spectrum};

/// The smallest-modulus eigenvalue of `L` must be this close to zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-6;
/// Pairing distances above this are flagged in the report.
pub const CORRESPONDENCE_FLAG_TOL: f64 = 1e-4;

/// Spectra of a coupling matrix and of its reduced form.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpectrum {
    /// Spectrum of `L`.
    pub full: Spectrum,
    /// Spectrum of `L*`.
    pub reduced: Spectrum,
    /// The eigenvalue of `L` designated as the zero eigenvalue.
    pub zero_eigenvalue: Complex64,
    /// Reduced eigenvalue with the largest real part (the slowest mode).
    pub lambda2: Complex64,
    /// Largest distance in the greedy pairing of `eig(L) \ {λ₁}` with
    /// `eig(L*)`, including `|λ₁|` itself.
    pub correspondence_error: f64,
}

impl CouplingSpectrum {
    /// Whether the correspondence holds within [`CORRESPONDENCE_FLAG_TOL`]
    /// and the designated zero eigenvalue is within [`ZERO_EIGENVALUE_TOL`].
    pub fn correspondence_ok(&self) -> bool {
        self.zero_eigenvalue.norm() < ZERO_EIGENVALUE_TOL
            && self.correspondence_error < CORRESPONDENCE_FLAG_TOL
    }
}

/// Computes both spectra and pairs them.
pub fn analyze_spectrum(l: &CouplingMatrix) -> Result<CouplingSpectrum> {
    let full = eigenvalues(&l.matrix().to_complex())?;
    let reduced = eigenvalues(&reduced_coupling(l).to_complex())?;

    let mut rest: Vec<Complex64> = full.values().to_vec();
    let zero_idx = rest
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("m >= 2");
    let zero_eigenvalue = rest.remove(zero_idx);
    let pairing = greedy_pairing_distance(&rest, reduced.values());

    Ok(CouplingSpectrum {
        lambda2: reduced.values()[0],
        correspondence_error: pairing.max(zero_eigenvalue.norm()),
        zero_eigenvalue,
        full,
        reduced,
    })
}

/// Repeatedly matches the globally closest unmatched pair and returns the
/// largest matched distance. Infinite if the lengths differ.
pub fn greedy_pairing_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut worst = 0.0f64;
    for _ in 0..n {
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|&i| !used_a[i]) {
            for j in (0..n).filter(|&j| !used_b[j]) {
                let d = (a[i] - b[j]).norm();
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        used_a[best.1] = true;
        used_b[best.2] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// True iff every reduced eigenvalue has real part below `-tol`.
pub fn connectivity_hint(spec: &CouplingSpectrum, tol: f64) -> bool {
    spec.reduced.values().iter().all(|z| z.re < -tol)
}

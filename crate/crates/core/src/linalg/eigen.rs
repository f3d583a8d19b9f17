//! General complex eigenvalue problems.
//!
//! Householder reduction to upper Hessenberg form followed by single-shift
//! QR iteration with Wilkinson shifts, all in complex arithmetic. Real input
//! is promoted, so real nonsymmetric coupling matrices and complex modal
//! matrices share one code path. Eigenvectors, when requested, come from
//! back substitution on the triangular Schur factor.

use num_complex::Complex64;

use super::lu::Lu;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Largest dimension accepted by the dense eigensolver.
pub const MAX_EIGEN_DIM: usize = 64;

/// Eigenvector matrices with a 1-norm condition number above this are
/// reported as defective.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e8;

/// QR sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Real parts within this (scaled) distance are ordered by imaginary part.
const ORDER_TIE_TOL: f64 = 1e-10;

/// Eigenvalues in a fixed order: descending real part, then descending
/// imaginary part among values whose real parts agree to within a relative
/// `1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>) -> Self {
        let order = spectral_order(&values);
        Self {
            values: order.into_iter().map(|i| values[i]).collect(),
        }
    }

    /// Spectrum of real values (e.g. of a symmetric matrix).
    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest real part, or `-inf` when empty.
    pub fn max_real(&self) -> f64 {
        self.values.first().map_or(f64::NEG_INFINITY, |z| z.re)
    }

    /// Smallest real part, or `+inf` when empty.
    pub fn min_real(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

/// Index permutation that puts `values` in [`Spectrum`] order.
pub fn spectral_order(values: &[Complex64]) -> Vec<usize> {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = ORDER_TIE_TOL * scale;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .re
            .total_cmp(&values[a].re)
            .then(values[b].im.total_cmp(&values[a].im))
            .then(a.cmp(&b))
    });
    // Group runs of nearly equal real parts, then order each run by imaginary part.
    let mut start = 0;
    while start < idx.len() {
        let anchor = values[idx[start]].re;
        let mut end = start + 1;
        while end < idx.len() && anchor - values[idx[end]].re <= tol {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| {
            values[b]
                .im
                .total_cmp(&values[a].im)
                .then(values[b].re.total_cmp(&values[a].re))
                .then(a.cmp(&b))
        });
        start = end;
    }
    idx
}

/// `M = Q⁻¹ Λ Q`, with the columns of `q_inv` the (unit-norm) right
/// eigenvectors and `values[k]` the eigenvalue of column `k`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub q_inv: ComplexMatrix,
    pub values: Vec<Complex64>,
    pub q: ComplexMatrix,
    /// 1-norm condition number of `q_inv`.
    pub condition: f64,
}

impl EigenDecomposition {
    pub fn spectrum(&self) -> Spectrum {
        Spectrum::new(self.values.clone())
    }

    /// `Q⁻¹ diag(Λ) Q`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| self.q_inv[(i, j)] * self.values[j]);
        scaled.matmul(&self.q).expect("square factors")
    }
}

/// All eigenvalues of a square complex matrix, with multiplicity.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Spectrum> {
    let schur = schur(m, false)?;
    let n = m.rows();
    Ok(Spectrum::new((0..n).map(|i| schur.t[(i, i)]).collect()))
}

/// Diagonalizes `m` with the default condition limit.
pub fn eigen_decomposition(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    eigen_decomposition_with_limit(m, DEFAULT_CONDITION_LIMIT)
}

/// Diagonalizes `m`, failing with [`Error::NotDiagonalizable`] when the
/// eigenvector matrix has condition number above `condition_limit`.
pub fn eigen_decomposition_with_limit(
    m: &ComplexMatrix,
    condition_limit: f64,
) -> Result<EigenDecomposition> {
    let n = m.ensure_square()?;
    let Schur { t, z } = schur(m, true)?;
    let z = z.expect("requested Schur vectors");
    let y = triangular_eigenvectors(&t);
    let mut v = z.matmul(&y)?;
    for j in 0..n {
        let norm = (0..n).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                v[(i, j)] /= norm;
            }
        }
    }

    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let order = spectral_order(&values);
    let values: Vec<Complex64> = order.iter().map(|&k| values[k]).collect();
    let q_inv = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);

    let q = match Lu::factor(&q_inv) {
        Ok(lu) => lu.inverse(),
        Err(Error::Singular) => {
            return Err(Error::NotDiagonalizable {
                condition: f64::INFINITY,
            })
        }
        Err(e) => return Err(e),
    };
    let condition = q_inv.one_norm() * q.one_norm();
    if !(condition <= condition_limit) {
        return Err(Error::NotDiagonalizable { condition });
    }
    Ok(EigenDecomposition {
        q_inv,
        values,
        q,
        condition,
    })
}

/// `(verdict, worst)` where `worst = max Re eig(m)` and the verdict is
/// `worst < -margin`.
pub fn is_hurwitz(m: &ComplexMatrix, margin: f64) -> Result<(bool, f64)> {
    let worst = eigenvalues(m)?.max_real();
    Ok((worst < -margin, worst))
}

struct Schur {
    t: ComplexMatrix,
    z: Option<ComplexMatrix>,
}

fn schur(m: &ComplexMatrix, want_vectors: bool) -> Result<Schur> {
    let n = m.ensure_square()?;
    if n > MAX_EIGEN_DIM {
        return Err(Error::InvalidArgument(format!(
            "eigensolver limited to dimension {MAX_EIGEN_DIM}, got {n}"
        )));
    }
    let mut h = m.clone();
    let mut z = want_vectors.then(|| ComplexMatrix::identity(n));
    reduce_to_hessenberg(&mut h, z.as_mut());
    hessenberg_qr(&mut h, z.as_mut())?;
    Ok(Schur { t: h, z })
}

fn reduce_to_hessenberg(a: &mut ComplexMatrix, mut z: Option<&mut ComplexMatrix>) {
    let n = a.rows();
    let zero = Complex64::new(0.0, 0.0);
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // Left: rows k+1.., columns k..
        for j in k..n {
            let dot = v
                .iter()
                .enumerate()
                .fold(zero, |acc, (r, vi)| acc + vi.conj() * a[(k + 1 + r, j)]);
            let f = dot * beta;
            for (r, vi) in v.iter().enumerate() {
                a[(k + 1 + r, j)] -= vi * f;
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = zero;
        }

        // Right: all rows, columns k+1..
        let apply_right = |mat: &mut ComplexMatrix| {
            for i in 0..n {
                let dot = v
                    .iter()
                    .enumerate()
                    .fold(zero, |acc, (r, vi)| acc + mat[(i, k + 1 + r)] * vi);
                let f = dot * beta;
                for (r, vi) in v.iter().enumerate() {
                    mat[(i, k + 1 + r)] -= f * vi.conj();
                }
            }
        };
        apply_right(a);
        if let Some(zm) = z.as_deref_mut() {
            apply_right(zm);
        }
    }
}

/// Rotation `[c s; -conj(s) c]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    let phase = a / an;
    (an / r, phase * b.conj() / r)
}

fn hessenberg_qr(h: &mut ComplexMatrix, mut z: Option<&mut ComplexMatrix>) -> Result<()> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut total = 0usize;
    let budget = MAX_SWEEPS_PER_EIGENVALUE * n;

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = scale;
            }
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            sweeps = 0;
            continue;
        }

        sweeps += 1;
        total += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE || total > budget {
            return Err(Error::NoConvergence { iterations: total });
        }

        let mu = if sweeps % 10 == 0 {
            // Exceptional shift to break cycles.
            let mut s = h[(hi, hi - 1)].re.abs();
            if hi >= 2 {
                s += h[(hi - 1, hi - 2)].re.abs();
            }
            h[(hi, hi)] + Complex64::new(0.75 * s, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Complex64::new(0.0, 0.0);
            rotations.push((c, s));
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = l + offset;
            let rot_cols = |mat: &mut ComplexMatrix, rows: usize| {
                for i in 0..rows {
                    let x = mat[(i, k)];
                    let y = mat[(i, k + 1)];
                    mat[(i, k)] = x * c + y * s.conj();
                    mat[(i, k + 1)] = -x * s + y * c;
                }
            };
            rot_cols(h, (k + 2).min(hi + 1));
            if let Some(zm) = z.as_deref_mut() {
                rot_cols(zm, n);
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(())
}

/// Eigenvalue of the trailing 2x2 block `[a b; c d]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let mu1 = mean + disc;
    let mu2 = mean - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Right eigenvectors of an upper triangular matrix as columns of a unit
/// upper triangular matrix.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let small = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[(i, k)] = -acc / denom;
        }
    }
    y
}

//! Brute-force eigenvalue oracle: expand `det(λI - M)` by cofactors, then
//! find the polynomial roots with Laguerre iteration, deflation and Newton
//! polishing. Nothing here shares code with the library's QR solver.

#![allow(dead_code)]

use num_complex::Complex64;

/// Polynomial with ascending real coefficients.
type Poly = Vec<f64>;

fn poly_mul(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add_scaled(acc: &mut Poly, p: &[f64], s: f64) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += s * b;
    }
}

fn entry(m: &[Vec<f64>], i: usize, j: usize) -> Poly {
    if i == j {
        vec![-m[i][j], 1.0]
    } else {
        vec![-m[i][j]]
    }
}

fn cofactor_det(m: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> Poly {
    if rows.len() == 1 {
        return entry(m, rows[0], cols[0]);
    }
    let r = rows[0];
    let rest: Vec<usize> = rows[1..].to_vec();
    let mut acc = vec![0.0];
    for (k, &c) in cols.iter().enumerate() {
        let minor_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = poly_mul(&entry(m, r, c), &cofactor_det(m, &rest, &minor_cols));
        poly_add_scaled(&mut acc, &term, if k % 2 == 0 { 1.0 } else { -1.0 });
    }
    acc
}

/// Coefficients of `det(λI - M)`, ascending, monic.
pub fn characteristic_polynomial(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let idx: Vec<usize> = (0..n).collect();
    let mut p = cofactor_det(m, &idx, &idx);
    p.resize(n + 1, 0.0);
    p
}

fn eval(p: &[Complex64], z: Complex64) -> (Complex64, Complex64, Complex64) {
    let mut f = Complex64::new(0.0, 0.0);
    let mut d1 = f;
    let mut d2 = f;
    for &c in p.iter().rev() {
        d2 = d2 * z + d1;
        d1 = d1 * z + f;
        f = f * z + c;
    }
    (f, d1, d2 * 2.0)
}

fn laguerre(p: &[Complex64], mut z: Complex64) -> Complex64 {
    let n = (p.len() - 1) as f64;
    for it in 0..500 {
        let (f, d1, d2) = eval(p, z);
        if f.norm() == 0.0 {
            return z;
        }
        let g = d1 / f;
        let h = g * g - d2 / f;
        let sq = ((h * n - g * g) * (n - 1.0)).sqrt();
        let (dp, dm) = (g + sq, g - sq);
        let den = if dp.norm() >= dm.norm() { dp } else { dm };
        let step = if den.norm() > 0.0 {
            Complex64::new(n, 0.0) / den
        } else {
            Complex64::from_polar(1.0 + z.norm(), it as f64)
        };
        // break limit cycles with an occasional fractional step
        let step = if it % 20 == 19 { step * 0.5 } else { step };
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            return z;
        }
    }
    z
}

/// Newton steps on the undeflated polynomial.
fn polish(p: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..50 {
        let (f, d1, _) = eval(p, z);
        if d1.norm() == 0.0 {
            break;
        }
        let step = f / d1;
        let next = z - step;
        if eval(p, next).0.norm() > f.norm() {
            break;
        }
        z = next;
        if step.norm() <= 1e-17 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// All complex roots of an ascending-coefficient polynomial with a nonzero
/// leading coefficient.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let full: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let mut work = full.clone();
    let mut roots = Vec::new();
    while work.len() > 1 {
        let z = laguerre(&work, Complex64::new(0.0, 0.0));
        let z = polish(&full, z);
        roots.push(z);
        // synthetic division by (x - z)
        let n = work.len() - 1;
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        let mut carry = work[n];
        for k in (0..n).rev() {
            q[k] = carry;
            carry = work[k] + carry * z;
        }
        work = q;
    }
    roots
}

pub fn oracle_eigenvalues(m: &[Vec<f64>]) -> Vec<Complex64> {
    polynomial_roots(&characteristic_polynomial(m))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest achievable max distance over all pairings of `a` with `b`.
pub fn best_matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    permutations(a.len())
        .into_iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(i, &j)| (a[i] - b[j]).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

//! Seeded generators for random couplings and systems.

#![allow(dead_code)]

use consensus_core::coupling::{validate_coupling, CouplingMatrix};
use consensus_core::linalg::{eigenvalues, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..=scale))
}

/// Any valid coupling: each off-diagonal present with a random density,
/// weights in (0, 2].
pub fn random_coupling(rng: &mut ChaCha8Rng, m: usize) -> CouplingMatrix {
    let density: f64 = rng.gen_range(0.2..=1.0);
    let raw = Matrix::from_fn(m, m, |i, j| {
        if i != j && rng.gen_bool(density) {
            rng.gen_range(1e-3..=2.0)
        } else {
            0.0
        }
    });
    with_zero_row_sums(raw)
}

/// A coupling whose graph contains the directed ring `i <- i+1`, so the
/// zero eigenvalue is simple.
pub fn connected_coupling(rng: &mut ChaCha8Rng, m: usize) -> CouplingMatrix {
    let extra: f64 = rng.gen_range(0.0..=0.6);
    let raw = Matrix::from_fn(m, m, |i, j| {
        if i == j {
            0.0
        } else if j == (i + 1) % m {
            rng.gen_range(0.2..=1.5)
        } else if rng.gen_bool(extra) {
            rng.gen_range(0.05..=1.5)
        } else {
            0.0
        }
    });
    with_zero_row_sums(raw)
}

fn with_zero_row_sums(mut raw: Matrix) -> CouplingMatrix {
    for i in 0..raw.rows() {
        raw[(i, i)] = 0.0;
        raw[(i, i)] = -raw.row(i).iter().sum::<f64>();
    }
    validate_coupling(&raw).expect("valid by construction")
}

/// Symmetric positive definite matrix with eigenvalues at least `floor`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Matrix {
    let b = random_matrix(rng, n, n, 1.0);
    let g = b.transpose().matmul(&b).unwrap();
    g.try_add(&Matrix::identity(n).scale(floor)).unwrap()
}

/// Largest real part of the eigenvalues of a real matrix.
pub fn abscissa(a: &Matrix) -> f64 {
    eigenvalues(&a.to_complex()).unwrap().max_real()
}

/// `a` shifted by a multiple of the identity so its abscissa is `target`.
pub fn with_abscissa(a: &Matrix, target: f64) -> Matrix {
    let shift = target - abscissa(a);
    a.try_add(&Matrix::identity(a.rows()).scale(shift)).unwrap()
}

/// Largest pairwise Euclidean distance among the given states.
pub fn spread(states: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            worst = worst.max(d.sqrt());
        }
    }
    worst
}

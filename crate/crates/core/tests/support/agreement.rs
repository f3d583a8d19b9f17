//! Random systems for comparing the modal Hurwitz verdict with simulation.

#![allow(dead_code)]

use consensus_core::certificates::{check_theorem1, SystemSpec};
use consensus_core::coupling::reduced_coupling;
use consensus_core::linalg::{eigen_decomposition, kron, Matrix};
use consensus_core::simulator::{
    consensus_reached, decay_rate_estimate, disagreement, random_initial_state, simulate_full, SimConfig,
};
use rand::Rng;

use super::gen::{connected_coupling, spread, random_matrix, random_spd, rng, with_abscissa};

pub const CONSENSUS_TOL: f64 = 1e-6;
/// Pass cases need at least this much certificate margin, unstable cases
/// at least this much positive real part.
pub const MARGIN_GATE: f64 = 0.05;
pub const RATE_REL_TOL: f64 = 0.10;
/// Fraction of the run used for the rate fit. It leaves out the first 30%,
/// where faster modes still contribute, and is wide enough to average most
/// of the norm modulation of a slowly rotating non-normal slowest mode.
pub const RATE_WINDOW: f64 = 0.7;
const RECORDS: usize = 2000;
const MAX_REDRAWS: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Class {
    /// Certified with margin at least the gate.
    Pass,
    /// Some mode with real part at least the gate.
    Unstable,
    /// In between; not tested.
    Marginal,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub seed: u64,
    pub class: Class,
    /// `max_k max Re eig(A + cλ_kΓ)`.
    pub worst: f64,
    pub initial: f64,
    pub last: f64,
    pub reached: bool,
    pub diverged: bool,
    pub horizon: f64,
    /// Fitted rate, when the reduced system diagonalizes.
    pub rate: Option<f64>,
    pub redraws: u64,
}

impl Outcome {
    /// Whether simulation disagrees with the certificate.
    pub fn contradiction(&self) -> bool {
        match self.class {
            Class::Pass => !self.reached,
            Class::Unstable => self.last <= self.initial,
            Class::Marginal => false,
        }
    }

    pub fn rate_error(&self) -> Option<f64> {
        self.rate.map(|r| (r - self.worst).abs() / self.worst.abs())
    }
}

/// Dimensions `n ≤ 4`, `m ≤ 8`; `A` has spectral abscissa in `[-0.5, 0]`
/// so the consensus trajectory itself stays bounded, while the coupling
/// strength and `Γ` (identity, positive definite, or arbitrary) produce
/// both stable and unstable difference dynamics.
pub fn random_system(seed: u64) -> SystemSpec {
    let mut r = rng(seed ^ 0x5eed_0000);
    let n = r.gen_range(1..=4);
    let m = r.gen_range(2..=8);
    let a = with_abscissa(&random_matrix(&mut r, n, n, 1.0), r.gen_range(-0.5..=0.0));
    let gamma = match r.gen_range(0..3) {
        0 => Matrix::identity(n),
        1 => random_spd(&mut r, n, 0.1),
        _ => random_matrix(&mut r, n, n, 1.0),
    };
    let c = r.gen_range(0.05..=2.5);
    SystemSpec::new(a, gamma, c, connected_coupling(&mut r, m)).unwrap()
}

fn reduced_system_matrix(s: &SystemSpec) -> Matrix {
    let ls = reduced_coupling(&s.coupling);
    let k = ls.rows();
    kron(&Matrix::identity(k), &s.a)
        .try_add(&kron(&ls, &s.gamma).scale(s.c))
        .unwrap()
}

pub fn run_case(seed: u64) -> Outcome {
    let s = random_system(seed);
    let (m, n) = (s.agents(), s.state_dim());
    let cert = check_theorem1(&s, 0.0).unwrap();
    let worst = -cert.margin;
    let class = if worst <= -MARGIN_GATE {
        Class::Pass
    } else if worst >= MARGIN_GATE {
        Class::Unstable
    } else {
        Class::Marginal
    };

    let reduced = reduced_system_matrix(&s);
    let norm = reduced.one_norm().max(s.a.one_norm()).max(1.0);
    let dt = (0.25 / norm).min(0.01);

    let mut redraws = 0;
    loop {
        let x_seed = seed.wrapping_mul(1_000_003).wrapping_add(redraws);
        let x0 = random_initial_state(m, n, x_seed);
        let d0 = spread(&x0);
        let horizon = 2.0 * (d0 / CONSENSUS_TOL).ln() / worst.abs().max(MARGIN_GATE);
        let steps = (horizon / dt).ceil() as usize;
        let cfg = SimConfig::new(dt, horizon, (steps / RECORDS).max(1)).unwrap();
        let traj = simulate_full(&s, &x0, &cfg).unwrap();
        let d = disagreement(&traj).unwrap();
        let (reached, _) = consensus_reached(&traj, CONSENSUS_TOL).unwrap();
        let last = d.last().unwrap();

        let out = Outcome {
            seed,
            class,
            worst,
            initial: d0,
            last,
            reached,
            diverged: traj.diverged,
            horizon,
            rate: None,
            redraws,
        };
        // an unstable run that fails to grow has an initial state with no
        // component along the growing modes: draw another one
        if class == Class::Unstable && last <= d0 && redraws < MAX_REDRAWS {
            redraws += 1;
            continue;
        }
        let rate = if class == Class::Pass && eigen_decomposition(&reduced.to_complex()).is_ok() {
            decay_rate_estimate(&d, RATE_WINDOW).ok()
        } else {
            None
        };
        return Outcome { rate, ..out };
    }
}

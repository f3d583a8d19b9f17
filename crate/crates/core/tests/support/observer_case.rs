//! Random detectable pairs pushed through gain design, certification and
//! simulation of the observer-coupled network.

#![allow(dead_code)]

use consensus_core::certificates::{
    check_observer, check_theorem1, design_inequality_max_eigenvalue, design_observer_gain,
    ObserverCheck, SystemSpec,
};
use consensus_core::linalg::{eigenvalues, hermitian_eigenvalues, inverse, ComplexMatrix, Matrix};
use consensus_core::simulator::{
    consensus_reached, random_initial_state, reduce_initial_state, simulate_full,
    simulate_reduced, SimConfig,
};
use consensus_core::spectral::analyze_spectrum;
use num_complex::Complex64;
use rand::Rng;

use super::gen::{abscissa, spread, connected_coupling, random_matrix, rng, with_abscissa};

pub const DESIGN_EPSILON: f64 = 1e-3;
pub const CONSENSUS_TOL: f64 = 1e-6;
/// Coupling strength relative to the threshold `1/|Re λ_2|`.
pub const COUPLING_FACTOR: f64 = 1.1;
/// PBH rank test: smallest singular value of `[λI - A; C]` above this.
/// Far above rounding level on purpose: a pair that is only barely
/// detectable admits no `P` once `ε` exceeds roughly `σ_min²`.
pub const PBH_TOL: f64 = 0.1;
const RECORDS: usize = 2000;

/// PBH test: every eigenvalue with `Re ≥ 0` is seen by `C`.
pub fn is_detectable(a: &Matrix, c: &Matrix) -> bool {
    let n = a.rows();
    let spectrum = eigenvalues(&a.to_complex()).unwrap();
    spectrum.values().iter().filter(|l| l.re >= 0.0).all(|&lambda| {
        let shifted = ComplexMatrix::identity(n)
            .scale(lambda)
            .try_sub(&a.to_complex())
            .unwrap();
        let cc = c.to_complex();
        let gram = shifted
            .adjoint()
            .matmul(&shifted)
            .unwrap()
            .try_add(&cc.adjoint().matmul(&cc).unwrap())
            .unwrap();
        let smallest = *hermitian_eigenvalues(&gram).unwrap().last().unwrap();
        smallest.max(0.0).sqrt() > PBH_TOL
    })
}

/// `(A, C)` with `n ≤ 3`, `q ≤ 2`. A third of the draws hide a stable
/// block from the output in a random basis, so the pair is detectable
/// without being observable. `A` has abscissa in `[-0.3, 0.3]`.
pub fn random_detectable_pair(seed: u64) -> (Matrix, Matrix) {
    let mut r = rng(seed ^ 0x0b5e_0000);
    loop {
        let n = r.gen_range(1..=3);
        let q = r.gen_range(1..=2);
        let (a, c) = if n >= 2 && r.gen_bool(1.0 / 3.0) {
            let k = r.gen_range(1..n);
            let a1 = random_matrix(&mut r, k, k, 1.0);
            let a2 = with_abscissa(&random_matrix(&mut r, n - k, n - k, 1.0), -0.5);
            let a12 = random_matrix(&mut r, k, n - k, 1.0);
            let block = Matrix::from_fn(n, n, |i, j| match (i < k, j < k) {
                (true, true) => a1[(i, j)],
                (true, false) => a12[(i, j - k)],
                (false, false) => a2[(i - k, j - k)],
                (false, true) => 0.0,
            });
            // output sees only the first block: C = [C1 0]
            let c1 = random_matrix(&mut r, q, k, 1.0);
            let c_block = Matrix::from_fn(q, n, |i, j| if j < k { c1[(i, j)] } else { 0.0 });
            let t = random_matrix(&mut r, n, n, 1.0)
                .try_add(&Matrix::identity(n).scale(2.0))
                .unwrap();
            let Ok(t_inv) = inverse(&t) else { continue };
            (
                t.matmul(&block).unwrap().matmul(&t_inv).unwrap(),
                c_block.matmul(&t_inv).unwrap(),
            )
        } else {
            (random_matrix(&mut r, n, n, 1.0), random_matrix(&mut r, q, n, 1.0))
        };
        let a = with_abscissa(&a, r.gen_range(-0.3..=0.3));
        if is_detectable(&a, &c) {
            return (a, c);
        }
    }
}

#[derive(Debug, Clone)]
pub struct ObserverOutcome {
    pub seed: u64,
    pub designed: bool,
    /// `λ_max(PA + AᵀP - CᵀC) < -ε` recomputed from the returned `P`.
    pub revalidated: bool,
    pub certified: bool,
    pub reached: bool,
    pub coupling: f64,
    pub lambda2: Complex64,
    pub detail: String,
}

impl ObserverOutcome {
    pub fn ok(&self) -> bool {
        self.designed && self.revalidated && self.certified && self.reached
    }
}

pub fn run_observer_case(seed: u64) -> ObserverOutcome {
    let (a, c_out) = random_detectable_pair(seed);
    let mut r = rng(seed ^ 0x1a9_0000);
    let m = r.gen_range(2..=6);
    let l = connected_coupling(&mut r, m);
    let lambda2 = analyze_spectrum(&l).unwrap().lambda2;
    let mut out = ObserverOutcome {
        seed,
        designed: false,
        revalidated: false,
        certified: false,
        reached: false,
        coupling: f64::NAN,
        lambda2,
        detail: String::new(),
    };

    let design = match design_observer_gain(&a, &c_out, DESIGN_EPSILON) {
        Ok(d) => d,
        Err(e) => {
            out.detail = e.to_string();
            return out;
        }
    };
    out.designed = true;
    out.revalidated =
        design_inequality_max_eigenvalue(&a, &c_out, &design.p).unwrap() < -DESIGN_EPSILON;

    let c = COUPLING_FACTOR * design.min_coupling(lambda2).unwrap();
    out.coupling = c;
    let s = SystemSpec::observer(a, design.f.clone(), c_out, c, l).unwrap();
    let check = ObserverCheck::CommonP {
        p: design.p.clone(),
        epsilon: DESIGN_EPSILON,
    };
    out.certified = check_observer(&s, &check).unwrap().verdict;

    let margin = check_theorem1(&s, 0.0).unwrap().margin;
    let x0 = random_initial_state(m, s.state_dim(), seed);
    let norm = s.a.one_norm() + c * s.gamma.one_norm() * s.coupling.matrix().one_norm();
    let dt = (0.25 / norm.max(1.0)).min(0.01);
    // With an unstable A the common trajectory grows, and rounding of
    // order eps*|x| would mask a small disagreement in agent coordinates;
    // the difference coordinates carry the same pairwise distances
    // without the common mode.
    let unstable_a = abscissa(&s.a) > 0.0;
    let y0 = reduce_initial_state(&x0);
    let d0 = spread(&x0);
    let horizon = 2.0 * (d0 / CONSENSUS_TOL).ln() / margin.max(1e-3);
    let steps = (horizon / dt).ceil() as usize;
    let cfg = SimConfig::new(dt, horizon, (steps / RECORDS).max(1)).unwrap();
    let traj = if unstable_a {
        simulate_reduced(&s, &y0, &cfg).unwrap().with_reference_agent()
    } else {
        simulate_full(&s, &x0, &cfg).unwrap()
    };
    out.reached = consensus_reached(&traj, CONSENSUS_TOL).unwrap().0;
    out.detail = format!(
        "route {}, margin {margin:.3e}, horizon {horizon:.1}, {} coordinates, diverged {}",
        design.route,
        if unstable_a { "difference" } else { "agent" },
        traj.diverged
    );
    out
}

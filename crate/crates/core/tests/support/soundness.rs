//! Inputs for the implication chain between certificates: a pass of the
//! common-`P` or Lyapunov-bound criteria must imply a pass of the modal
//! Hurwitz criterion on the same system.

#![allow(dead_code)]

use consensus_core::certificates::{
    check_theorem1, check_theorem2, check_theorem2_simplified, check_theorem3, find_common_p,
    SystemSpec,
};
use consensus_core::linalg::{inverse, Matrix};
use rand::Rng;

use super::gen::{connected_coupling, random_coupling, random_matrix, random_spd, rng, with_abscissa};

#[derive(Debug, Default, Clone, Copy)]
pub struct ChainTally {
    pub systems: usize,
    pub t2_pass: usize,
    pub t2s_pass: usize,
    pub t3_pass: usize,
    pub t1_pass: usize,
    /// Passes of t2, t2s or t3 on a system that fails t1.
    pub violations: usize,
}

impl ChainTally {
    pub fn absorb(&mut self, other: ChainTally) {
        self.systems += other.systems;
        self.t2_pass += other.t2_pass;
        self.t2s_pass += other.t2s_pass;
        self.t3_pass += other.t3_pass;
        self.t1_pass += other.t1_pass;
        self.violations += other.violations;
    }
}

/// A system whose `Γ = P₀⁻¹ S` makes `P₀Γ` symmetric positive definite,
/// so the simplified and Lyapunov-bound criteria apply with `P = P₀`.
pub fn chain_system(seed: u64) -> (SystemSpec, Matrix) {
    let mut r = rng(seed ^ 0xc4a1_0000);
    let n = r.gen_range(1..=3);
    let m = r.gen_range(2..=6);
    let a = with_abscissa(&random_matrix(&mut r, n, n, 1.0), r.gen_range(-1.0..=1.5));
    let p0 = random_spd(&mut r, n, 0.2);
    let gamma = if r.gen_bool(0.75) {
        inverse(&p0).unwrap().matmul(&random_spd(&mut r, n, 0.2)).unwrap()
    } else {
        random_matrix(&mut r, n, n, 1.0)
    };
    let l = if r.gen_bool(0.8) {
        connected_coupling(&mut r, m)
    } else {
        random_coupling(&mut r, m)
    };
    let c = r.gen_range(0.0..=4.0);
    (SystemSpec::new(a, gamma, c, l).unwrap(), p0)
}

pub fn run_chain(seed: u64) -> ChainTally {
    let (s, p0) = chain_system(seed);
    let mut t = ChainTally {
        systems: 1,
        ..Default::default()
    };
    let t1 = check_theorem1(&s, 0.0).unwrap().verdict;
    t.t1_pass += t1 as usize;

    let mut witnesses = vec![(p0.clone(), 1e-6), (Matrix::identity(s.state_dim()), 1e-3)];
    if let Some(p) = find_common_p(&s, 1e-6) {
        witnesses.push((p, 1e-6));
    }
    for (p, eps) in &witnesses {
        if check_theorem2(&s, p, *eps).unwrap().verdict {
            t.t2_pass += 1;
            t.violations += !t1 as usize;
        }
        // the simplified and bound criteria reject a P whose PΓ is not
        // symmetric positive definite; that is a refusal, not a verdict
        if let Ok(cert) = check_theorem2_simplified(&s, p, *eps) {
            if cert.verdict {
                t.t2s_pass += 1;
                t.violations += !t1 as usize;
            }
        }
        if let Ok(cert) = check_theorem3(&s, p) {
            if cert.verdict {
                t.t3_pass += 1;
                t.violations += !t1 as usize;
            }
        }
    }
    t
}

//! Fixed-step integration of the coupled, reduced and modal systems, and
//! the diagnostics used to compare them with certificates.

mod diagnostics;
mod rk4;

pub use diagnostics::{
    consensus_reached, decay_rate_estimate, disagreement, lyapunov_trace, TimeSeries,
    DECAY_FLOOR, MIN_FIT_POINTS,
};
pub use rk4::{SimConfig, DIVERGENCE_LIMIT, MAX_STEPS};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::certificates::SystemSpec;
use crate::coupling::reduced_coupling;
use crate::error::{Error, Result};
use crate::linalg::{eigen_decomposition, ComplexMatrix, EigenDecomposition, Matrix};

/// Which system a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    /// Agent states `x_1..x_m`.
    Full,
    /// Differences `y_i = x_i - x_1`, `i = 2..m`.
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMetadata {
    pub kind: TrajectoryKind,
    /// SHA-256 over the system matrices, coupling strength and run kind.
    pub system_digest: String,
    /// Seed of the initial state, when it was drawn at random.
    pub seed: Option<u64>,
}

/// Recorded states of `agents` vectors of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One flattened `agents * dim` vector per timestamp, agent-major.
    pub states: Vec<Vec<f64>>,
    pub agents: usize,
    pub dim: usize,
    /// The run stopped early because a state norm exceeded
    /// [`DIVERGENCE_LIMIT`].
    pub diverged: bool,
    pub metadata: TrajectoryMetadata,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State of agent `i` (0-based) at record `k`.
    pub fn agent_state(&self, k: usize, i: usize) -> &[f64] {
        &self.states[k][i * self.dim..(i + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectories hold the initial state")
    }

    /// For a reduced trajectory, the agent states in the frame of agent 1:
    /// a zero vector followed by `y_2..y_m`. Pairwise distances, and hence
    /// [`disagreement`], match those of the full system.
    pub fn with_reference_agent(&self) -> Trajectory {
        let mut out = self.clone();
        out.agents += 1;
        for s in &mut out.states {
            let mut v = vec![0.0; self.dim];
            v.extend_from_slice(s);
            *s = v;
        }
        out
    }

    /// Differences `x_i - x_1` of a full trajectory, laid out like a
    /// reduced trajectory.
    pub fn differences(&self) -> Trajectory {
        let n = self.dim;
        let mut out = self.clone();
        out.agents = self.agents - 1;
        out.metadata.kind = TrajectoryKind::Reduced;
        for s in &mut out.states {
            let (first, rest) = s.split_at(n);
            let d: Vec<f64> = rest
                .iter()
                .enumerate()
                .map(|(k, v)| v - first[k % n])
                .collect();
            *s = d;
        }
        out
    }
}

/// Trajectory of a single complex mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub lambda: Complex64,
    pub diverged: bool,
}

fn system_digest(s: &SystemSpec, kind: &str) -> String {
    let mut h = Sha256::new();
    h.update(kind.as_bytes());
    for m in [&s.a, &s.gamma, s.coupling.matrix()] {
        h.update((m.rows() as u64).to_le_bytes());
        h.update((m.cols() as u64).to_le_bytes());
        for v in m.as_slice() {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    h.update(s.c.to_bits().to_le_bytes());
    format!("{:x}", h.finalize())
}

fn stack(vectors: &[Vec<f64>], count: usize, dim: usize, what: &str) -> Result<Vec<f64>> {
    if vectors.len() != count || vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: (count, dim),
            got: (vectors.len(), vectors.first().map_or(0, Vec::len)),
        });
    }
    let flat: Vec<f64> = vectors.concat();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} has non-finite entries")));
    }
    Ok(flat)
}

/// Integrates `dx_i/dt = A x_i + c Σ_j l_ij Γ x_j` from `x0` (one
/// `n`-vector per agent).
///
/// The coupling is evaluated as `c Γ Σ_{j≠i} l_ij (x_j - x_i)`, which
/// equals the sum above for zero-row-sum `L` and vanishes exactly on the
/// consensus manifold.
pub fn simulate_full(s: &SystemSpec, x0: &[Vec<f64>], cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let (m, n) = (s.agents(), s.state_dim());
    let x = stack(x0, m, n, "x0")?;
    let l = s.coupling.matrix();
    let (a, g, c) = (&s.a, &s.gamma, s.c);
    let mut u = vec![0.0; n];

    let rec = rk4::integrate(x, cfg, |x, out| {
        for i in 0..m {
            let xi = &x[i * n..(i + 1) * n];
            u.iter_mut().for_each(|v| *v = 0.0);
            for j in (0..m).filter(|&j| j != i) {
                let w = l[(i, j)];
                if w == 0.0 {
                    continue;
                }
                let xj = &x[j * n..(j + 1) * n];
                for k in 0..n {
                    u[k] += w * (xj[k] - xi[k]);
                }
            }
            let oi = &mut out[i * n..(i + 1) * n];
            for r in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += a[(r, k)] * xi[k] + c * g[(r, k)] * u[k];
                }
                oi[r] = acc;
            }
        }
    });

    Ok(Trajectory {
        times: rec.times,
        states: rec.states,
        agents: m,
        dim: n,
        diverged: rec.diverged,
        metadata: TrajectoryMetadata {
            kind: TrajectoryKind::Full,
            system_digest: system_digest(s, "full"),
            seed: None,
        },
    })
}

/// Integrates `dy_i/dt = A y_i + c Σ_j L*_ij Γ y_j` for the `m-1`
/// differences.
pub fn simulate_reduced(s: &SystemSpec, y0: &[Vec<f64>], cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let (m, n) = (s.agents() - 1, s.state_dim());
    let y = stack(y0, m, n, "y0")?;
    let ls = reduced_coupling(&s.coupling);
    let (a, g, c) = (&s.a, &s.gamma, s.c);
    let mut u = vec![0.0; n];

    let rec = rk4::integrate(y, cfg, |y, out| {
        for i in 0..m {
            u.iter_mut().for_each(|v| *v = 0.0);
            for j in 0..m {
                let w = ls[(i, j)];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    u[k] += w * y[j * n + k];
                }
            }
            let yi = &y[i * n..(i + 1) * n];
            let oi = &mut out[i * n..(i + 1) * n];
            for r in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += a[(r, k)] * yi[k] + c * g[(r, k)] * u[k];
                }
                oi[r] = acc;
            }
        }
    });

    Ok(Trajectory {
        times: rec.times,
        states: rec.states,
        agents: m,
        dim: n,
        diverged: rec.diverged,
        metadata: TrajectoryMetadata {
            kind: TrajectoryKind::Reduced,
            system_digest: system_digest(s, "reduced"),
            seed: None,
        },
    })
}

/// Integrates one mode `dz/dt = (A + cλΓ) z` through its real 2n-dimensional
/// embedding.
pub fn simulate_modal(
    a: &Matrix,
    gamma: &Matrix,
    c: f64,
    lambda: Complex64,
    z0: &[Complex64],
    cfg: &SimConfig,
) -> Result<ModalTrajectory> {
    cfg.validate()?;
    let n = a.ensure_square()?;
    gamma.ensure_shape(n, n)?;
    if z0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, 1),
            got: (z0.len(), 1),
        });
    }
    let mode: ComplexMatrix = a.to_complex().try_add(&gamma.to_complex().scale(lambda * c))?;
    let (re, im) = (mode.real_part(), mode.imag_part());
    let mut state: Vec<f64> = z0.iter().map(|z| z.re).collect();
    state.extend(z0.iter().map(|z| z.im));

    let rec = rk4::integrate(state, cfg, |x, out| {
        let (xr, xi) = x.split_at(n);
        for r in 0..n {
            let (mut acc_r, mut acc_i) = (0.0, 0.0);
            for k in 0..n {
                acc_r += re[(r, k)] * xr[k] - im[(r, k)] * xi[k];
                acc_i += im[(r, k)] * xr[k] + re[(r, k)] * xi[k];
            }
            out[r] = acc_r;
            out[n + r] = acc_i;
        }
    });

    Ok(ModalTrajectory {
        times: rec.times,
        states: rec
            .states
            .into_iter()
            .map(|s| (0..n).map(|k| Complex64::new(s[k], s[n + k])).collect())
            .collect(),
        lambda,
        diverged: rec.diverged,
    })
}

/// Modal coordinates `z = (V⁻¹ ⊗ I) y` of a stacked difference vector,
/// where the columns of `V` are the eigenvectors of `L*`.
pub fn modal_coordinates(decomp: &EigenDecomposition, y: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let k = decomp.values.len();
    (0..k)
        .map(|i| {
            let n = y.first().map_or(0, Vec::len);
            (0..n)
                .map(|r| (0..k).map(|j| decomp.q[(i, j)] * y[j][r]).sum())
                .collect()
        })
        .collect()
}

/// Runs every mode of `L*` from the modal image of `y0`, in spectrum order.
///
/// Refuses a defective `L*` with [`Error::NotDiagonalizable`]: the modal
/// split only describes the reduced system when `L*` diagonalizes.
pub fn simulate_modes(
    s: &SystemSpec,
    y0: &[Vec<f64>],
    cfg: &SimConfig,
) -> Result<(EigenDecomposition, Vec<ModalTrajectory>)> {
    let (m, n) = (s.agents() - 1, s.state_dim());
    stack(y0, m, n, "y0")?;
    let decomp = eigen_decomposition(&reduced_coupling(&s.coupling).to_complex())?;
    let z0 = modal_coordinates(&decomp, y0);
    let runs = decomp
        .values
        .iter()
        .zip(&z0)
        .map(|(&lambda, z)| simulate_modal(&s.a, &s.gamma, s.c, lambda, z, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok((decomp, runs))
}

/// `m` agent states with entries uniform in `[-1, 1]`, from a seeded
/// ChaCha8 stream.
pub fn random_initial_state(agents: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..agents)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect()
}

/// `y0 = R x0`: differences from agent 1.
pub fn reduce_initial_state(x0: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x0.iter()
        .skip(1)
        .map(|xi| xi.iter().zip(&x0[0]).map(|(a, b)| a - b).collect())
        .collect()
}

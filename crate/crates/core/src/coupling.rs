//! Coupling matrices and the reduction to differences.
//!
//! A coupling matrix `L` has zero row sums and nonnegative off-diagonal
//! entries; `l_ij` weighs how strongly agent `i` is pulled toward agent
//! `j`. The reduction `R` maps stacked states to the differences
//! `y_i = x_i - x_1` (i = 2..m), and `L* = R L R†` drives those differences.
//!
//! # Edge direction
//!
//! An edge `(i, j, w)` means **agent `i` uses agent `j`'s state**: it adds
//! `w` to `l_ij` (row `i`, column `j`) and subtracts `w` from `l_ii`.
//! Indices in an [`EdgeList`] are 1-based.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, STRUCTURAL_TOL};

/// Off-diagonal entries in `[-OFFDIAG_CLAMP_TOL, 0)` are clamped to zero.
pub const OFFDIAG_CLAMP_TOL: f64 = 1e-12;

/// A validated coupling matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: Matrix,
}

impl CouplingMatrix {
    /// Number of agents.
    pub fn agents(&self) -> usize {
        self.entries.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    /// `alpha * L`; positive scaling keeps the matrix valid.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "coupling scale must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self {
            entries: self.entries.scale(alpha),
        })
    }
}

impl TryFrom<Matrix> for CouplingMatrix {
    type Error = Error;

    fn try_from(raw: Matrix) -> Result<Self> {
        validate_coupling(&raw)
    }
}

/// Validates a raw matrix as a coupling matrix.
///
/// Tiny negative off-diagonals (above `-1e-12`) are clamped to zero and row
/// sums within `1e-10` of zero are repaired by adjusting the diagonal.
/// Anything else is rejected with a message naming the violated invariant.
pub fn validate_coupling(raw: &Matrix) -> Result<CouplingMatrix> {
    let m = raw.ensure_square()?;
    if m < 2 {
        return Err(Error::TooFewAgents(m));
    }
    let mut l = raw.clone();
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let v = l[(i, j)];
            if v < -OFFDIAG_CLAMP_TOL {
                return Err(Error::InvalidCoupling(format!(
                    "nonnegative off-diagonal violated: l[{},{}] = {v}",
                    i + 1,
                    j + 1
                )));
            }
            if v < 0.0 {
                l[(i, j)] = 0.0;
            }
        }
    }
    for i in 0..m {
        let sum: f64 = l.row(i).iter().sum();
        let scale = l.row(i).iter().map(|x| x.abs()).fold(1.0, f64::max);
        if sum.abs() > STRUCTURAL_TOL * scale {
            return Err(Error::InvalidCoupling(format!(
                "zero-row-sum violated: row {} sums to {sum}",
                i + 1
            )));
        }
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| l[(i, j)]).sum();
        l[(i, i)] = -off;
    }
    Ok(CouplingMatrix { entries: l })
}

/// Weighted directed edges on agents `1..=agents`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    agents: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl EdgeList {
    /// Checks indices, self-loops and weights.
    pub fn new(agents: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if agents < 2 {
            return Err(Error::TooFewAgents(agents));
        }
        for &(i, j, w) in &edges {
            if i == 0 || j == 0 || i > agents || j > agents {
                return Err(Error::InvalidEdgeList(format!(
                    "edge ({i}, {j}) has an index outside 1..={agents}"
                )));
            }
            if i == j {
                return Err(Error::InvalidEdgeList(format!("self-loop on agent {i}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidEdgeList(format!(
                    "edge ({i}, {j}) has weight {w}; weights must be finite and nonnegative"
                )));
            }
        }
        Ok(Self { agents, edges })
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }
}

/// Builds `L` from edges; duplicate edges accumulate.
pub fn laplacian_from_edges(g: &EdgeList) -> CouplingMatrix {
    let m = g.agents;
    let mut l = Matrix::zeros(m, m);
    for &(i, j, w) in &g.edges {
        l[(i - 1, j - 1)] += w;
    }
    for i in 0..m {
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| l[(i, j)]).sum();
        l[(i, i)] = -off;
    }
    CouplingMatrix { entries: l }
}

/// The `(m-1) x m` difference operator: first column `-1`, then `I_{m-1}`.
pub fn reduction_matrix(m: usize) -> Result<Matrix> {
    if m < 2 {
        return Err(Error::TooFewAgents(m));
    }
    Ok(Matrix::from_fn(m - 1, m, |i, j| match j {
        0 => -1.0,
        _ if j == i + 1 => 1.0,
        _ => 0.0,
    }))
}

/// Moore–Penrose inverse of [`reduction_matrix`]: every entry is `-1/m`
/// except the diagonal of the lower `(m-1) x (m-1)` block, which is
/// `(m-1)/m`.
pub fn reduction_pinverse(m: usize) -> Result<Matrix> {
    if m < 2 {
        return Err(Error::TooFewAgents(m));
    }
    let mf = m as f64;
    Ok(Matrix::from_fn(m, m - 1, |i, j| {
        if i == j + 1 {
            (mf - 1.0) / mf
        } else {
            -1.0 / mf
        }
    }))
}

/// `L* = R L R†` by its closed form `L*_{ij} = l_{i+1, j+1} - l_{1, j+1}`
/// (0-based `i, j` over `0..m-1`).
pub fn reduced_coupling(l: &CouplingMatrix) -> Matrix {
    let lm = &l.entries;
    let m = lm.rows();
    Matrix::from_fn(m - 1, m - 1, |i, j| lm[(i + 1, j + 1)] - lm[(0, j + 1)])
}

/// `R L R†` by explicit products; used to cross-check the closed form.
pub fn reduced_coupling_product(l: &CouplingMatrix) -> Matrix {
    let m = l.agents();
    let r = reduction_matrix(m).expect("m >= 2");
    let rp = reduction_pinverse(m).expect("m >= 2");
    r.matmul(&l.entries)
        .and_then(|rl| rl.matmul(&rp))
        .expect("conformable")
}

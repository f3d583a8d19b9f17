//! Certification and simulation of consensus in linearly coupled
//! multi-agent systems
//!
//! ```text
//! dx_i/dt = A x_i + c Σ_j l_ij Γ x_j,   i = 1..m
//! ```
//!
//! Consensus is studied through the differences `y_i = x_i - x_1`, whose
//! dynamics are governed by the reduced coupling matrix `L* = R L R†`. The
//! spectrum of `L*` is the nonzero part of the spectrum of `L`, so the
//! coupled problem splits into modal systems `A + c λ_k Γ`, one per nonzero
//! eigenvalue. Each criterion in [`certificates`] produces a
//! [`certificates::ConsensusCertificate`] that can be cross-checked against
//! direct integration in [`simulator`].

pub mod certificates;
pub mod coupling;
pub mod error;
pub mod linalg;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

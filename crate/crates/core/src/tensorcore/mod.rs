//! Complex linear algebra over named, party-assigned registers: states,
//! operators, tensor products, partial trace, entropy, Fourier matrices, and
//! isometry-to-unitary completion.
//!
//! Basis convention: mixed-radix indexing with the leftmost register most
//! significant, everywhere. Entropies are base 2.

mod density;
mod layout;
mod state;
mod unitary;

pub use density::DensityMatrix;
pub use layout::{Party, Register, RegisterLayout};
pub use state::StateVector;
pub use unitary::{complete_isometry, fourier_matrix, UnitaryOp};

/// Normalization tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-12;
/// Max-entry tolerance for U†U = I.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for Hermiticity checks.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Slack below zero allowed for density-matrix eigenvalues.
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance for unit-trace checks.
pub const TRACE_TOL: f64 = 1e-10;
/// Max-entry tolerance for V†V = I of isometry columns.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

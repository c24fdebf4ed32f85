//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, validation, and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Two layouts share a register name where disjoint names are required.
    #[error("register name collision: {0:?}")]
    RegisterCollision(String),

    /// A register name was looked up but does not exist in the layout.
    #[error("unknown register: {0:?}")]
    UnknownRegister(String),

    /// A dimension or shape does not match what the operation requires.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Layouts differ where an exact match (names, dims, parties, order) is required.
    #[error("layout mismatch in {0}")]
    LayoutMismatch(&'static str),

    /// A state vector is not normalized within tolerance.
    #[error("state not normalized: norm = {norm:.17e}")]
    NotNormalized { norm: f64 },

    /// A matrix fails the unitarity check U†U = I.
    #[error("matrix not unitary: max |U\u{2020}U - I| entry = {max_deviation:.3e}")]
    NotUnitary { max_deviation: f64 },

    /// A matrix fails the Hermiticity check.
    #[error("matrix not Hermitian: max |M - M\u{2020}| entry = {max_deviation:.3e}")]
    NotHermitian { max_deviation: f64 },

    /// A matrix has an eigenvalue below the PSD tolerance.
    #[error("matrix not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    /// A density matrix trace differs from one beyond tolerance.
    #[error("trace not one: trace = {trace:.17e}")]
    TraceNotOne { trace: f64 },

    /// Isometry columns are not orthonormal within tolerance.
    #[error("columns not orthonormal: max |V\u{2020}V - I| entry = {max_deviation:.3e}")]
    NotOrthonormal { max_deviation: f64 },

    /// A probability entry is negative or a distribution fails to normalize.
    #[error("invalid probability in {context}: {value:.17e}")]
    InvalidProbability { context: &'static str, value: f64 },

    /// The strategy search space exceeds the enumeration guard.
    #[error("search space too large: {strategies:.3e} strategies exceeds limit {limit:.3e}")]
    SearchSpaceTooLarge { strategies: f64, limit: f64 },

    /// An argument is outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical routine failed or a cross-check did not hold.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

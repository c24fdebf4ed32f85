//! boxlab: simulation and verification of no-signalling correlation boxes,
//! their unitary dilations, and causal bounds on Bell functionals.
//!
//! The crate is organized in layers:
//!
//! - [`tensorcore`] supplies the multi-register state machinery: named
//!   registers with mixed-radix indexing, state vectors, density matrices,
//!   unitaries with embedding, partial traces, and entanglement entropy.
//! - [`boxes`] models conditional-probability boxes P(a,b|x,y), the
//!   extremal box family, no-signalling checks, and the Bell functionals.
//! - [`lhv`] enumerates local deterministic strategies and computes exact
//!   classical maxima by brute force.
//! - [`dilation`] lifts boxes to unitary evolutions on extended registers.
//! - [`protocol`] runs the coherent phase-estimation chain on a dilation and
//!   quantifies what it reveals.
//! - [`tsirelson`] evaluates the causal bound chain on branch weights.
//! - [`seesaw`] searches for quantum strategies by alternating optimization.
//!
//! Basis convention everywhere: registers listed left to right, leftmost
//! most significant; entropies in bits.

pub mod boxes;
pub mod dilation;
pub mod error;
pub mod lhv;
mod linalg;
pub mod protocol;
pub mod seesaw;
pub mod tensorcore;
pub mod tsirelson;

pub use error::{Error, Result};

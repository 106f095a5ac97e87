//! Exact diagonalization of a 12-qubit XXZ / Heisenberg model on a
//! D6h-symmetric hexagram, with point-group classification of states,
//! quench dynamics in the configuration basis, and entanglement scans.

pub mod analytic;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod lattice;
pub mod linalg;
pub mod spectrum;
pub mod symmetry;
pub mod tolerances;

pub use error::{Error, Result};

//! Collective neutrino oscillation simulation on a statevector backend.
//!
//! Each neutrino is one qubit, `|0>` for electron flavor and `|1>` for the
//! heavy-lepton flavor. The Hamiltonian splits into a one-body vacuum part
//! and a two-body forward-scattering part scaled by `mu(t)`; see [`model`].

pub mod dense;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod output;
pub mod pauli;
pub mod qas;
pub mod statevector;
pub mod stats;
pub mod trotter;

pub use error::{Error, Result};

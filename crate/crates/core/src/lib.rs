//! Truncated-Fock-space simulator for a bosonic mode under random telegraph,
//! 1/f, and Gaussian dephasing plus photon loss, with trace-distance revival
//! accounting, Wigner negativity, and teleportation-based error correction
//! for rotation-symmetric bosonic codes.

pub mod error;
pub mod fock;
pub mod noise;
pub mod nonmarkov;
pub mod quad;
pub mod states;
pub mod trajectories;

pub use error::{Error, Result};

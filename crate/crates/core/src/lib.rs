//! Polarization quantum optics on truncated multimode Fock spaces.
//!
//! The crate builds the P-quasispin operators of m spatiotemporal modes with
//! two polarizations each, constructs generalized coherent states of the
//! SU(2) polarization group and of biphoton groups, and evaluates
//! Q-functions, characteristic functions, squeezing diagnostics and
//! geometric phases. Every closed form is paired with a brute-force
//! operator evaluation.

pub mod basis_states;
pub mod config;
pub mod error;
pub mod fock;
pub mod gcs;
pub mod geomphase;
pub mod io;
pub mod polarization;
pub mod quasiprob;
mod halfint;
pub mod special;
pub mod squeezing;
pub mod verify;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use fock::{FockBasis, Operator, Pol, QuantumState};
pub use halfint::HalfInt;
pub use num_complex::Complex64;

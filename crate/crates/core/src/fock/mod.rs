//! Truncated Fock spaces, operators, states and exponentials.

mod basis;
pub mod expm;
mod ladder;
mod operator;
mod state;

pub use basis::{basis_dimension, FockBasis, Pol};
pub use expm::{exp_action, exp_action_padded, hermitian_eigen, unitary_from_generator, PaddedAction, Spectral};
pub use ladder::{annihilation_op, creation_op, number_op, total_number_op};
pub use operator::{Hermiticity, Operator};
pub use state::{QuantumState, StateKind};

use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Largest basis dimension `build_basis` accepts.
    pub max_dim: usize,
    /// Relative hermiticity threshold used when tagging operators.
    pub hermitian: f64,
    /// Relative anti-hermiticity threshold for generators.
    pub anti_hermitian: f64,
    /// Normalization threshold for pure and mixed states.
    pub normalization: f64,
    /// Most negative eigenvalue tolerated in a density matrix.
    pub negative_eigenvalue: f64,
    /// Norm allowed to leak past the photon cutoff.
    pub tail: f64,
    /// Convergence threshold of the geometric-phase refinement.
    pub convergence: f64,
    /// Step cap for the geometric-phase refinement.
    pub k_cap: usize,
    /// Absolute threshold below which a variance counts as zero.
    pub eps_abs: f64,
    /// Relative tolerance when matching variance signatures.
    pub rel: f64,
    /// Highest moment order checked for the polarization vacuum.
    pub s_max: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            max_dim: 20_000,
            hermitian: 1e-12,
            anti_hermitian: 1e-10,
            normalization: 1e-12,
            negative_eigenvalue: 1e-10,
            tail: 1e-8,
            convergence: 1e-6,
            k_cap: 1 << 20,
            eps_abs: 1e-10,
            rel: 1e-6,
            s_max: 4,
        }
    }
}

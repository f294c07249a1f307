use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis dimension {dim} exceeds the configured limit {limit}")]
    DimensionOverflow { dim: u128, limit: usize },
    #[error("mode index {j} out of range for m = {m}")]
    BadModeIndex { j: usize, m: usize },
    #[error("generator is not anti-hermitian (deviation {deviation:e})")]
    NotAntiHermitian { deviation: f64 },
    #[error("operands live on different Fock bases")]
    BasisMismatch,
    #[error("operator has a negative eigenvalue {value:e}")]
    NegativeEigenvalue { value: f64 },
    #[error("state has no photons (<N> = {mean_n:e})")]
    VacuumState { mean_n: f64 },
    #[error("invalid quantum-number labels: {0}")]
    LabelInvalid(String),
    #[error("photon number {needed} exceeds the cutoff n_max = {n_max}")]
    CutoffExceeded { needed: usize, n_max: usize },
    #[error("truncation tail {leak:e} exceeds tolerance {tol:e}")]
    TailTooLarge { leak: f64, tol: f64 },
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("quadrature under-resolved: {0}")]
    QuadratureUnderResolved(String),
    #[error("quasispin sector p = {p} is empty below the cutoff")]
    EmptySector { p: f64 },
    #[error("invalid parameter: {0}")]
    ParamInvalid(String),
    #[error("state is not P-scalar (<P^2> = {casimir:e})")]
    NotPScalar { casimir: f64 },
    #[error("no convergence after K = {k} steps (last change {delta:e})")]
    NoConvergence { k: usize, delta: f64 },
    #[error("invalid path: {0}")]
    PathInvalid(String),
    #[error("family {0} has no closed form for this operation")]
    FamilyUnsupported(String),
    #[error("invalid state: {0}")]
    StateInvalid(String),
    #[error("{field}: {reason}")]
    SpecInvalid { field: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn spec(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::SpecInvalid { field: field.into(), reason: reason.into() }
    }
}

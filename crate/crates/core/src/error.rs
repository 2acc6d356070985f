use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {levels} levels")]
    LevelOutOfRange { index: usize, levels: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("truncation loss {loss:.3e} exceeds 1e-6; raise n_max")]
    Truncation { loss: f64 },

    #[error("zero detuning Δ{0}")]
    ZeroDetuning(usize),

    #[error("|λ1| = |λ2|: the squeezing factor diverges")]
    InfiniteSqueezing,

    #[error("λ1 = λ2 = 0: no squeezed steady state exists")]
    NoCoupling,

    #[error("displacement equation αλ1 + α*λ2 = -β is singular")]
    SingularDisplacement,

    #[error("target unreachable: {0}")]
    Unreachable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt:.3e} too large: dt·‖H‖ = {product:.3} exceeds 0.1")]
    StepTooLarge { dt: f64, product: f64 },

    #[error("norm drift {0:.3e} exceeds tolerance")]
    NormDrift(f64),

    #[error("trace drift {0:.3e} exceeds 1e-7")]
    TraceDrift(f64),

    #[error("Hermiticity drift {0:.3e} exceeds 1e-7")]
    HermiticityDrift(f64),

    #[error("unphysical bath: |M|² = {m_sq:.6} > N(N+1) = {bound:.6}")]
    UnphysicalBath { m_sq: f64, bound: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

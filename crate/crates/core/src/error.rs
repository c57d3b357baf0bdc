use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("{what}: expected {expected} entries, got {got}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("fields live on different lattices")]
    LatticeMismatch,

    #[error("flux sectors differ")]
    FluxMismatch,

    #[error("source term has nonzero mean {mean:e} (norm {norm:e})")]
    NonZeroMean { mean: f64, norm: f64 },

    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid flux matrix: {0}")]
    InvalidFlux(String),

    #[error("two-form is not self-dual (anti-self-dual part {residual:e})")]
    NotSelfDual { residual: f64 },

    #[error("direction {0} out of range 0..4")]
    DirectionOutOfRange(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("direction is not a descent direction (pairing {pairing:e})")]
    NotDescent { pairing: f64 },

    #[error("gauge fixing changed the energy by {drift:e} (relative)")]
    GaugeDrift { drift: f64 },

    #[error("trajectory too short: {0} recorded iterates, need at least 3")]
    TrajectoryTooShort(usize),

    #[error("malformed configuration file: {0}")]
    Format(String),

    #[error("unsupported configuration version {0}")]
    Version(i64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

/// Errors produced by the solvers, designs and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix shape mismatch: {0}")]
    Shape(String),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("dimension {0} exceeds the supported maximum of {1}")]
    TooLarge(usize, usize),

    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),

    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),

    #[error("robust Riccati pair has no admissible solution: {0}")]
    NoAdmissibleSolution(String),

    #[error("matrix is not Hurwitz (max real eigenvalue part {0:e})")]
    NotHurwitz(f64),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("uncertain parameter {0} outside [-1, 1]")]
    DeltaOutOfRange(f64),

    #[error("forward filter error {0} outside [0, 1]")]
    SigmaOutOfRange(f64),

    #[error("singular input matrix")]
    SingularInput,

    #[error("state covariance is singular")]
    SingularSigma,

    #[error("degenerate smoother denominator ({0:e})")]
    DegenerateDenominator(f64),

    #[error("fixed-point iteration diverged: {0}")]
    FixedPointDiverged(String),

    #[error("simulation unstable at step {step}: state norm {norm:e}")]
    Unstable { step: u64, norm: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

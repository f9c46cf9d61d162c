use thiserror::Error;

/// Failures raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("normalization {alpha} is below the spectral norm {norm} of the encoded matrix")]
    Normalization { alpha: f64, norm: f64 },

    #[error("normalization must be positive and finite, got {0}")]
    InvalidAlpha(f64),

    #[error("cannot build a Frobenius block encoding of the zero matrix")]
    ZeroMatrix,

    #[error("system qubit counts differ: {left} vs {right}")]
    SystemSizeMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("scaling by zero is degenerate; build a zero encoding instead")]
    ZeroScale,

    #[error("sum of normalizations is zero")]
    ZeroNormalization,

    #[error("polynomial bound infeasible for beta = {beta}: {reason}; use a larger beta")]
    InfeasibleBeta { beta: f64, reason: String },

    #[error("invalid polynomial parameters: {0}")]
    InvalidPolynomial(String),

    #[error("singular value {sigma:.3e} lies below the window edge {edge:.3e}; condition number was underestimated")]
    ConditionViolation { sigma: f64, edge: f64 },

    #[error("matrix is numerically singular (smallest singular value {0:.3e})")]
    Singular(f64),

    #[error("Riccati step {step}: N + B^T P B is not positive definite")]
    Conditioning { step: usize },

    #[error("Kalman step {step}: innovation covariance is not positive definite")]
    FilterDegeneracy { step: usize },

    #[error("Gamma is not positive definite")]
    SingularGamma,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("conditioning target {target} unreachable after {attempts} attempts (worst {worst:.3})")]
    GeneratorExhausted { target: f64, attempts: usize, worst: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{phase} step {step}: {source}")]
    AtStep {
        phase: &'static str,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{phase}: {source}")]
    InPhase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_step(self, phase: &'static str, step: usize) -> Self {
        Error::AtStep {
            phase,
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_phase(self, phase: &'static str) -> Self {
        Error::InPhase {
            phase,
            source: Box::new(self),
        }
    }

    /// The innermost error, with step and phase context peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } | Error::InPhase { source, .. } => source.root(),
            other => other,
        }
    }

    /// Whether this is a configuration problem rather than a numerical one.
    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::InvalidProblem(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

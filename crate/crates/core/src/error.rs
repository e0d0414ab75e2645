use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("spectrum not converged: level {level} moved by {shift:.3e} GHz when the basis grew")]
    NotConverged { level: usize, shift: f64 },

    #[error("dimension budget exceeded: {dim} > {max}")]
    DimensionBudget { dim: usize, max: usize },

    #[error("index out of range: {index} >= {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("label {0} is not tracked")]
    UntrackedLabel(String),

    #[error("labeling failed: {0}")]
    Labeling(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("kraus set is not trace preserving (defect {0:.3e})")]
    NotTracePreserving(f64),

    #[error("time step not converged: halving dt moved a matrix element by {0:.3e}")]
    StepNotConverged(f64),

    #[error("gate left the dispersive regime: |<{label}|U|{label}>| = {magnitude:.3}")]
    NotDispersive { label: String, magnitude: f64 },

    #[error("no 180 degree point reachable: conditional phase spans [{min:.4}, {max:.4}] rad over the search window")]
    NoPiPoint { min: f64, max: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("group closure failure: {0}")]
    Closure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{module}: {source}")]
    Context {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { key: key.into(), reason: reason.into() }
    }

    /// Tag an error with the module it surfaced from.
    pub fn within(self, module: &'static str) -> Self {
        Error::Context { module, source: Box::new(self) }
    }
}

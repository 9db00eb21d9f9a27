use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coordinate {x} lies outside the profile domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("profile is incompatible with the mesh geometry: {0}")]
    IncompatibleGeometry(String),

    #[error("no steady state at lambda = {lambda} (above the discrete pull-in voltage)")]
    NoSolution { lambda: f64 },

    #[error("steady Newton solver failed below the fold at lambda = {lambda}: {reason}")]
    NonConvergence { lambda: f64, reason: String },

    #[error("continuation stalled after lambda = {last_lambda}, sup w = {last_sup}")]
    StepFailure { last_lambda: f64, last_sup: f64 },

    #[error("eigen-solver hit its iteration limit (residual {residual:e})")]
    IterationLimit { residual: f64 },

    #[error("Crank-Nicolson Newton solve failed at t = {t:e}")]
    NewtonFailure { t: f64 },

    #[error("time step underflow at t = {t:e} (dt = {dt:e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("trajectory never reached the quench threshold")]
    NotQuenched,

    #[error("gap 1 - u fell below {0:e}; functional would overflow")]
    Overflow(f64),

    #[error("value {alpha} exceeds the admissible exponent {alpha_max}")]
    OutOfRange { alpha: f64, alpha_max: f64 },

    #[error("outside the domain of the formula: {0}")]
    DomainError(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

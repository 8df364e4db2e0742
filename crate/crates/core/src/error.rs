use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("drift matrix is not stable: spectral abscissa {abscissa:e} 1/s")]
    Unstable { abscissa: f64 },

    #[error("Lyapunov residual {residual:e} exceeds bound {bound:e}")]
    LyapunovResidual { residual: f64, bound: f64 },

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("integrator step size underflow at t = {t:e} s (h = {h:e} s)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("unphysical covariance: smallest eigenvalue of cov + i*omega/2 is {min_eigenvalue:e}")]
    UnphysicalCovariance { min_eigenvalue: f64 },

    #[error("beamsplitter coupling needs g_eff < omega_m (g_eff = {g_eff:e}, omega_m = {omega_m:e})")]
    RwaOutOfRange { g_eff: f64, omega_m: f64 },

    #[error("truncated dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("steady state is not unique: smallest singular value of the bordered generator is {smallest:e}")]
    DegenerateSteadyState { smallest: f64 },

    #[error("truncation too small: boundary Fock population {population:e} exceeds {threshold:e}")]
    TruncationSuspect { population: f64, threshold: f64 },

    #[error("steady-state residual {residual:e} exceeds bound {bound:e}")]
    SteadyStateResidual { residual: f64, bound: f64 },

    #[error("timescale hierarchy violated: {quantity} = {value:e} exceeds 1e-2")]
    HierarchyViolation { quantity: &'static str, value: f64 },

    #[error("generator fit residual {residual:e} exceeds threshold {threshold:e}")]
    PoorFit { residual: f64, threshold: f64 },

    #[error("no feasible point; tightest violated constraint `{constraint}` (slack {slack:e})")]
    NoFeasiblePoint { constraint: String, slack: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), message: err.to_string() }
    }
}

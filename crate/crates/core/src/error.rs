use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("profile cannot be evaluated at x = {x}: {reason}")]
    Evaluation { x: f64, reason: String },

    #[error("x = {x} lies on a dielectric interface; use one-sided limits")]
    Interface { x: f64 },

    #[error("kappa*delta = {kd} exceeds the overflow guard; use the rescaled recurrence")]
    Range { kd: f64 },

    #[error("non-finite value in recurrence at particle {j}, kappa = {kappa}")]
    Overflow { j: usize, kappa: f64 },

    #[error("T22 = {t22} is not positive at particle {j}, kappa = {kappa}")]
    NonPositiveT22 { j: usize, kappa: f64, t22: f64 },

    #[error("index {index} out of range for chain of {len} particles")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("outgoing waves must not exceed the ingoing waves (|alpha|^2 - |beta|^2 = {det})")]
    InvalidTransfer { det: f64 },

    #[error("quadrature did not converge after {levels} levels (last difference {last_diff:e}, value {value:e})")]
    Convergence { levels: u32, last_diff: f64, value: f64 },

    #[error("particle {j}: {source}")]
    Particle {
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("ODE integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    #[error("invalid wave state at x = {x}: g(x,x) = {g} must be negative")]
    WaveState { x: f64, g: f64 },

    #[error("kappa = {kappa} is below the locality cutoff {cutoff} at x = {x} (geometrical optics not valid)")]
    Locality { x: f64, kappa: f64, cutoff: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("special function {func} failed: {reason}")]
    SpecialFunction { func: &'static str, reason: String },

    #[error("pole of the Gamma function at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn for_particle(self, j: usize) -> Self {
        Error::Particle {
            j,
            source: Box::new(self),
        }
    }

    /// Short machine-readable tag used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidChain(_) => "invalid_chain",
            Error::InvalidProfile(_) => "invalid_profile",
            Error::Evaluation { .. } => "evaluation",
            Error::Interface { .. } => "interface",
            Error::Range { .. } => "range",
            Error::Overflow { .. } => "overflow",
            Error::NonPositiveT22 { .. } => "non_positive_t22",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidTransfer { .. } => "invalid_transfer",
            Error::Convergence { .. } => "convergence",
            Error::Particle { .. } => "particle",
            Error::Integration { .. } => "integration",
            Error::WaveState { .. } => "wave_state",
            Error::Locality { .. } => "locality",
            Error::Domain(_) => "domain",
            Error::SpecialFunction { .. } => "special_function",
            Error::Pole { .. } => "pole",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

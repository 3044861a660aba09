use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("epsilon must lie in the open interval (0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("{what}: argument {value} outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("{what}: exponent {exponent} overflows f64 at s = {at}")]
    Overflow { what: &'static str, at: f64, exponent: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Newton iteration for Gauss-Legendre node {index} of m = {m} did not converge")]
    QuadratureNonConvergence { m: usize, index: usize },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    JacobiNonConvergence { sweeps: usize, off_norm: f64 },

    #[error("root iteration seeded at {seed} left the window [{lo}, {hi}]")]
    SeedLeftWindow { seed: f64, lo: f64, hi: f64 },

    #[error("found {found} distinct roots but {requested} were requested")]
    BracketCountMismatch { requested: usize, found: usize },

    #[error("only {achieved} of {wanted} eigenvalues passed the refinement-stability test")]
    ReliabilityShortfall {
        achieved: usize,
        wanted: usize,
        eigenvalues: Vec<f64>,
    },

    #[error("domain truncation error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    TailControl { estimate: f64, tolerance: f64 },

    #[error("Nystrom eigenvalue {index} is non-positive ({value:e})")]
    NonPositiveMu { index: usize, value: f64 },

    #[error("eigenvalue {value} below the lower spectral bound 1")]
    BelowSpectralBound { value: f64 },

    #[error("polynomial has a nonzero constant term")]
    ConstantTerm,
}

pub type Result<T> = std::result::Result<T, Error>;

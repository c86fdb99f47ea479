use thiserror::Error;

/// Errors produced by the numerical routines and the CLI front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {0} is a pole of the gamma function")]
    GammaPole(f64),

    #[error("zeta has a pole at s = 1")]
    ZetaPole,

    #[error("{what}: {value} is outside the supported domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("stencil has {weights} weights but the path has {values} samples")]
    LengthMismatch { weights: usize, values: usize },

    #[error("taylor start needs y'(0) and y''(0) for the problem")]
    MissingMetadata,

    #[error("singular recurrence denominator lambda_0 + D h^alpha = {0}")]
    SingularDenominator(f64),

    #[error("quadrature did not reach tolerance {tol}; achieved error estimate {estimate}")]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error("step {h} does not divide the interval [0, {end}] into an integer number of steps")]
    InvalidGrid { h: f64, end: f64 },

    #[error("ladder mismatch: {0}")]
    LadderMismatch(String),

    #[error("unknown {kind} '{name}'; valid options: {options}")]
    UnknownName {
        kind: &'static str,
        name: String,
        options: String,
    },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

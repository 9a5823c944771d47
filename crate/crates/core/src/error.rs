use thiserror::Error;

/// Failures raised anywhere in the moment → recurrence → identity pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid weight parameters: {0}")]
    InvalidParams(String),

    #[error("invalid numeric policy: {0}")]
    InvalidPolicy(String),

    #[error("weight is singular at z = t for gamma < 0")]
    SingularPoint,

    #[error("quadrature did not converge: {component} components above tolerance {tol:e} after {levels} levels (worst estimate {worst:e})")]
    QuadratureNonConvergence {
        component: usize,
        tol: f64,
        levels: u32,
        worst: f64,
    },

    #[error("precision loss in moment assembly at k = {k}: {bits_lost:.1} bits lost of {precision_bits}")]
    PrecisionLoss {
        k: usize,
        bits_lost: f64,
        precision_bits: u32,
    },

    #[error("precision exhausted in Hankel factorization at n = {n}: {reason}")]
    PrecisionExhausted { n: usize, reason: String },

    #[error("moment backends disagree: max relative difference {max_diff:e} at k = {k} (threshold {threshold:e}, precision {precision_bits})")]
    BackendDisagreement {
        k: usize,
        max_diff: f64,
        threshold: f64,
        precision_bits: u32,
    },

    #[error("integrand not integrable: {0}")]
    NotIntegrable(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("invalid finite-difference scheme: {0}")]
    InvalidScheme(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.
//!
//! A single enum keeps the operation signatures uniform; payloads are stored
//! as `f64` regardless of the scalar type the computation ran in.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("heat capacity rho_cv must be positive, got {0}")]
    NonPositiveHeatCapacity(f64),

    #[error("absolute temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("vector dimension must be 1 or 3, got {0}")]
    InvalidDimension(usize),

    #[error("state vectors disagree in dimension: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{model}: leading coefficient {name} is exactly zero; the rate equation degenerates")]
    DegenerateLeadingCoefficient {
        model: &'static str,
        name: &'static str,
    },

    #[error("xi must be nonzero (free energy requires its inverse)")]
    SingularXi,

    #[error("{model} needs explicit free-energy coefficients")]
    MissingCoefficients { model: &'static str },

    #[error("{model} has no degenerate parameter to reduce on")]
    NotReducible { model: &'static str },

    #[error("lambda is exactly zero; the quadratic form is undefined")]
    ZeroLambda,

    #[error("classification requires lambda != 0 and kappa != 0 (lambda_zero={lambda_zero}, kappa_zero={kappa_zero})")]
    ExcludedDegenerate { lambda_zero: bool, kappa_zero: bool },

    #[error("item {item}: parameter condition violated: {condition}")]
    ItemConditionViolated { item: u8, condition: String },

    #[error("item {item}: free coefficient {name}={value} outside admissible [{lo}, {hi}]")]
    FreeCoeffOutOfRange {
        item: u8,
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("cubic leading coefficient is zero within tolerance; polynomial degenerates")]
    DegenerateCubic,

    #[error("oscillatory tuning requires lambda, tau, kappa, nu and the mode weight all positive")]
    NoPositiveSolution,

    #[error("{op}: precondition violated: {what}")]
    PreconditionViolated { op: &'static str, what: String },

    #[error("initial data is missing {what}")]
    MissingInitialData { what: &'static str },

    #[error("mode {mode} (Lambda={lambda}) is unstable: max Re w = {max_re}; pass allow_unstable to override")]
    UnstableParameters {
        mode: usize,
        lambda: f64,
        max_re: f64,
    },

    #[error("modal system is ill-conditioned: {detail}")]
    IllConditionedSystem { detail: String },

    #[error("adaptive step size underflow at t={t}")]
    StepSizeUnderflow { t: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid initial profile: {0}")]
    InvalidProfile(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

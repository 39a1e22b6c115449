use thiserror::Error;

use crate::form::Generator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("form is not basic: gauge generator {0} survives normalization")]
    NonBasicForm(Generator),

    #[error("cannot substitute zero for lambda")]
    ZeroSubstitution,

    #[error("matrix is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),

    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: String },

    #[error("Ricci tensor is not positive at mu = {0} (canonical family requires mu < 3)")]
    RicciNotPositive(String),

    #[error("invariant is singular on the fixed ray mu = {0}")]
    OnFixedRay(String),

    #[error("step size underflow at t = {t}, mu = {mu}, rho = {rho}")]
    StepUnderflow { t: f64, mu: f64, rho: f64 },

    #[error("backward span too short: t_min = {0}, need t_min <= -5")]
    InsufficientSpan(f64),

    #[error("expected a form of degree {expected}, found degree {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("odd power of lambda cannot be written in mu = lambda^2")]
    OddLambdaPower,

    #[error("coefficient is not a real polynomial in lambda alone")]
    NotUnivariate,

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("frame index {0} out of range")]
    FrameIndex(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

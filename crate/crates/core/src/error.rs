use thiserror::Error;

/// Every failure the library can report.
///
/// Each variant maps onto a stable machine-readable code (see [`Error::code`])
/// which the command-line driver surfaces verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial is identically zero")]
    IdenticallyZero,

    #[error("polynomial vector has no Hill interval (||F||^2 > 1 everywhere)")]
    NoHillInterval,

    #[error("constant polynomial vector with ||F|| = {norm} > 1 has no Hill interval")]
    ConstantAboveOne { norm: f64 },

    #[error("Hill interval has a critical endpoint; the x-period is infinite")]
    CriticalEndpoint,

    #[error("operation requires a bounded Hill interval")]
    UnboundedInterval,

    #[error("[{lo}, {hi}] is not a Hill interval of F")]
    NotHillInterval { lo: f64, hi: f64 },

    #[error("deflated polynomial is not positive on the Hill interval (min {min_q:e})")]
    DegenerateDeflation { min_q: f64 },

    #[error("x = {x} lies outside the Hill interval [{lo}, {hi}]")]
    OutsideHillInterval { x: f64, lo: f64, hi: f64 },

    #[error("initial condition is off the H = 1/2 level set (H - 1/2 = {offset:e})")]
    BadEnergyLevel { offset: f64 },

    #[error("integrator exceeded {max_steps} steps before t = {t_end}")]
    MaxStepsExceeded { max_steps: usize, t_end: f64 },

    #[error("integrator step fell below the floor {h_min:e} at t = {t}")]
    StepSizeUnderflow { t: f64, h_min: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("trajectory ends at t = {t_last} before the requested t = {t_needed}")]
    SpanTooShort { t_last: f64, t_needed: f64 },

    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable snake-case identifier for this error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::IdenticallyZero => "identically_zero",
            Error::NoHillInterval => "no_hill_interval",
            Error::ConstantAboveOne { .. } => "constant_above_one",
            Error::CriticalEndpoint => "infinite_period_critical_pair",
            Error::UnboundedInterval => "unbounded_interval",
            Error::NotHillInterval { .. } => "interval_not_hill_interval",
            Error::DegenerateDeflation { .. } => "degenerate_deflation",
            Error::OutsideHillInterval { .. } => "x_init_outside_hill_interval",
            Error::BadEnergyLevel { .. } => "bad_energy_level",
            Error::MaxStepsExceeded { .. } => "max_steps_exceeded",
            Error::StepSizeUnderflow { .. } => "step_size_underflow",
            Error::TooFewSamples { .. } => "too_few_samples",
            Error::SpanTooShort { .. } => "span_too_short",
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::Dimension(_) => "dimension_mismatch",
            Error::Invalid(_) => "invalid_input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{a} is not coprime to the modulus {modulus}")]
    NotCoprime { a: i64, modulus: u64 },

    #[error("coefficient index {index} outside the truncation 1..={len}")]
    OutOfRange { index: u64, len: usize },

    #[error("p = {p}: {available} local coefficients available, {required} required")]
    InsufficientCoefficients { p: u64, available: usize, required: usize },

    #[error("series does not split polynomially at p = {p} with degree <= {max_degree}")]
    NotSplit { p: u64, max_degree: usize },

    #[error("a(1) = {0} is not 1 within tolerance")]
    NotNormalized(f64),

    #[error("{0} is not squarefree")]
    NotSquarefree(u64),

    #[error("m = {m} does not divide {bound}")]
    NotADivisor { m: u64, bound: u64 },

    #[error("degree is zero, internal shift undefined")]
    DegreeZero,

    #[error("invalid gamma factor data: {0}")]
    InvalidGamma(String),

    #[error("Re(s) = {sigma} must exceed 1 + growth exponent {growth}")]
    OutsideConvergence { sigma: f64, growth: f64 },

    #[error("critical point solver did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid twist parameters: {0}")]
    InvalidTwist(String),

    #[error("invalid phase parameters: {0}")]
    InvalidPhase(String),

    #[error("alpha cannot be raised to the degree exactly: {0}")]
    InexactAlpha(String),

    #[error("leading local coefficient A_{{d}}({p}) vanishes")]
    ZeroLeadingCoefficient { p: u64 },

    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),

    #[error("term (character {chi_index}, m = {m}) has integral index {index} but is not an active term")]
    UnexpectedIntegralIndex { chi_index: usize, m: u64, index: String },
}

use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the
/// individual modules so callers can match on what actually went wrong.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got} ({context})")]
    ShapeMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },
    #[error("layer {layer} is degenerate: standard deviation {std:e} <= 1e-12")]
    DegenerateLayer { layer: usize, std: f64 },
    #[error("all weights are zero; cannot normalise")]
    AllZeroWeights,
    #[error("entry ({row}, {col}) = {value} is outside [0, 1]; normalise the matrix first")]
    NotNormalised { row: usize, col: usize, value: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("all values are tied; rank correlation is undefined")]
    AllTied,
    #[error("objective is not finite at the initial simplex")]
    NonFiniteObjective,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("optimiser diverged: non-finite objective at the returned optimum")]
    OptimiserDiverged,
    #[error("target sortedness {target} exceeds the model cap {cap}; unreachable even at s = 0")]
    InfeasibleTarget { target: f64, cap: f64 },
    #[error("study requires at least one trial")]
    EmptyStudy,
    #[error("bad image shape: expected {expected} pixels for the given dimensions, got {got}")]
    BadShape { expected: usize, got: usize },
    #[error("blur kernel dimensions must be odd, got ({kh}, {kw})")]
    EvenKernel { kh: usize, kw: usize },
    #[error("class {class} has no samples")]
    MissingClass { class: usize },
    #[error("metric series is empty")]
    EmptySeries,
    #[error("criterion requires validation data, but none was provided")]
    MissingValidationData,
    #[error("loss became non-finite at step {step}")]
    NonFiniteLoss { step: usize },
    #[error("parse error in {file} at line {line}, column {column}: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invariant violation in {file}: {check}")]
    InvariantViolation { file: String, check: String },
    #[error("i/o error on {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Structural conditions a plant must satisfy before any trackability
/// or learning analysis applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Condition {
    /// Both transfer matrices strictly proper.
    C1,
    /// Exogenous input splits into an impulsive constant and a strictly proper part.
    C2,
    /// Relative degree one (first Markov parameter of full rank).
    C3,
    /// Over-actuated case: a nonsingular leading square block exists.
    C4,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Condition::C1 => "C1",
            Condition::C2 => "C2",
            Condition::C3 => "C3",
            Condition::C4 => "C4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("column {0} is identically zero; its degree is undefined")]
    ZeroColumn(usize),
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("pole at evaluation point: entry ({row}, {col}) has a vanishing denominator")]
    PoleAtPoint { row: usize, col: usize },
    #[error("matrix is singular at the evaluation point")]
    SingularAtPoint,
    #[error("could not draw a probe point avoiding all poles after {0} attempts")]
    ProbeExhausted(usize),
    #[error("expected a {expected} rational matrix, got {found}")]
    Properness { expected: &'static str, found: &'static str },
    #[error("condition {condition} violated: {detail}")]
    Condition { condition: Condition, detail: String },
    #[error("trackability checks need an analytic (rational-transform) trajectory; sampled trajectories are refused")]
    NonRationalTrajectory,
    #[error("trajectory is not trackable")]
    Untrackable,
    #[error("invalid gain operator: {0}")]
    InvalidGain(String),
    #[error("convergence condition not satisfied: spectral radius {rho:.6} >= 1")]
    ConvergenceCondition { rho: f64 },
    #[error("realization failed probe verification (relative error {0:.3e})")]
    RealizationMismatch(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("learning diverged at iteration {iteration} (sup error {sup_error:.3e})")]
    Divergence {
        iteration: usize,
        sup_error: f64,
        partial: Box<crate::ilc::IlcRunReport>,
    },
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

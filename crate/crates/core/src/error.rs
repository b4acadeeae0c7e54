use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Position in a UTF-8 text, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("duplicate identifier `{name}` at {pos}")]
    DuplicateIdentifier { pos: Pos, name: String },
    #[error("unresolved {kind} `{name}` at {pos}")]
    UnresolvedReference { pos: Pos, kind: &'static str, name: String },
    #[error("unknown observer clock `{0}`")]
    UnknownObserver(String),
    #[error("probability {0} outside [0,1]")]
    ProbabilityOutOfRange(f64),
    #[error("equality on clock `{0}` is not allowed in state properties")]
    ClockEquality(String),
}

impl ParseError {
    pub fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        ParseError::Syntax { pos, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("clock `{clock}` declared by both `{first}` and `{second}`")]
    ClockOverlap { clock: String, first: String, second: String },
    #[error("output partition violated for action `{action}`: {detail}")]
    OutputPartitionViolation { action: String, detail: String },
    #[error("guard kind violation in `{component}` ({place}): {detail}")]
    GuardKindViolation { component: String, place: String, detail: String },
    #[error("location `{component}.{location}` has output edges, no delay bound and no exprate")]
    MissingExpRate { component: String, location: String },
    #[error("automaton `{0}` has no initial location")]
    MissingInitial(String),
    #[error("input edge on `{action}` in `{component}` must have exactly one branch")]
    InputBranching { component: String, action: String },
    #[error("invalid declaration in `{component}`: {detail}")]
    InvalidDeclaration { component: String, detail: String },
}

/// All problems found while validating one document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Validation(#[from] ValidationErrors),
    #[error("unknown clock index {0}")]
    UnknownClock(usize),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("determinism violation: `{component}` has several enabled edges on `{action}`")]
    DeterminismViolation { component: String, action: String },
    #[error("component `{0}` has no enabled output")]
    NoEnabledOutput(String),
    #[error("integer `{var}` left its range with value {value}")]
    IntOutOfBounds { var: String, value: i64 },
    #[error("run exceeded {0} steps")]
    StepLimit(usize),
    #[error("components `{0}` and `{1}` are not composable: {2}")]
    NotComposable(String, String, String),
    #[error("run was generated for observer `{run}` up to {run_bound}, query asks `{query}` up to {query_bound}")]
    ObserverMismatch { run: String, run_bound: f64, query: String, query_bound: f64 },
    #[error("outcome source exhausted after {0} samples")]
    SourceExhausted(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unfolding exceeds depth bound {0}")]
    DepthExceeded(usize),
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
    #[error("infeasible demand: {0}")]
    InfeasibleDemand(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

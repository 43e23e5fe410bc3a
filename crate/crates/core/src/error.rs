use thiserror::Error;

/// Everything that can go wrong in the symbolic kernel and the analyses built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown symbol `{name}` at offset {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("expression at offset {offset} exceeds the size limit: {reason}")]
    TooLarge { offset: usize, reason: String },
    #[error("invalid phase space: {0}")]
    InvalidPhaseSpace(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("expression has a pole at the evaluation point")]
    PoleAtPoint,
    #[error("denominator reduces to zero on the constraint surface")]
    ZeroDenominatorOnShell,
    #[error("missing numeric value for `{0}`")]
    UnboundSymbol(String),
    #[error("matrix is singular: no nonzero pivot in column {column}")]
    SingularMatrix { column: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("second class constraints come in pairs, got {0}")]
    OddConstraintCount(usize),
    #[error("{constraints} constraints exceed the {max} allowed by {pairs} canonical pairs")]
    TooManyConstraints {
        constraints: usize,
        pairs: usize,
        max: usize,
    },
    #[error("constraints are not second class: {0}")]
    NotSecondClass(String),
    #[error("could not find an on-shell point (point {point}, {attempts} attempts)")]
    NoOnShellPoint { point: usize, attempts: usize },
    #[error("invalid counts: m = {m} exceeds n = {n}")]
    InvalidCounts { n: usize, m: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("expected a polynomial: {0}")]
    NonPolynomialInput(String),
    #[error("algebra report is not closed")]
    ReportNotClosed,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

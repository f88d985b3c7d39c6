use thiserror::Error;

use crate::wiring::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("port type is not enumerable (Euclid port present)")]
    NotEnumerable,
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("invalid port type: {0}")]
    InvalidPortType(String),
    #[error("duplicate port name `{0}`")]
    DuplicatePort(String),
    #[error("mixed Finite and Euclid ports in one typed finite set")]
    MixedKinds,
    #[error("typed function does not respect types: {0}")]
    TypeMismatch(String),
    #[error("invalid wiring diagram: {}", fmt_violations(.0))]
    InvalidWiring(Vec<Violation>),
    #[error("box mismatch: {0}")]
    BoxMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("wiring diagram has Finite ports and cannot be differentiated")]
    NotDifferentiable,
    #[error("wrong interpretation: {0}")]
    WrongInterpretation(String),
    #[error("arithmetic overflow in {0}")]
    ArithmeticOverflow(&'static str),
    #[error("negative value {0} is not a non-negative real")]
    NegativeValue(f64),
    #[error("size cap exceeded: {size} logical entries > cap {cap}")]
    SizeCapExceeded { size: u128, cap: u128 },
    #[error("traced ports have different types: {0}")]
    TraceTypeMismatch(String),
    #[error("disjoint union violated: element {0} occurs twice")]
    DisjointnessViolation(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("dynamics are not affine in the state: {0}")]
    NotAffine(String),
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("non-finite value while evaluating {0}")]
    NonFinite(String),
    #[error("eigenvalue routine supports n <= 64, got {0}")]
    SizeUnsupported(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

fn fmt_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

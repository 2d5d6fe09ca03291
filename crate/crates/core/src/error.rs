use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid rational {0:?} (expected \"p/q\" or an integer)")]
    Rational(String),
    #[error("invalid Pauli string {0:?}")]
    PauliString(String),
    #[error("invalid node {0:?}")]
    Node(String),
    #[error("invalid edge {0:?}")]
    Edge(String),
    #[error("invalid coloring: {0}")]
    Coloring(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {edge} gets the forbidden label {label} under this coloring")]
    ForbiddenLabel { edge: String, label: String },
    #[error("walk reached truncation level {level}; the graph must be built with a larger cutoff")]
    Truncation { level: u32 },
    #[error("node {0} is not part of the truncated graph")]
    MissingNode(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperatorError {
    #[error("operator lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("chain of {n} sites exceeds the limit of {max}")]
    TooLong { n: usize, max: usize },
    #[error("site {site} out of range for a chain of {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NessError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("amplitude for {edge} has shape {got:?}, node spaces require {want:?}")]
    Shape {
        edge: String,
        got: (usize, usize),
        want: (usize, usize),
    },
    #[error("walk-sum and MPO constructions disagree on {0} strings")]
    PathDisagreement(usize),
    #[error("chain length must be at least {min}, got {n}")]
    ChainTooShort { n: usize, min: usize },
    #[error("state has zero trace")]
    ZeroNorm,
}

use thiserror::Error;

/// Errors raised by the analysis layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VeeError {
    #[error("empty configuration")]
    Empty,
    #[error("covector {index} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("{labels} labels supplied for {covectors} covectors")]
    LabelCount { labels: usize, covectors: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("covector {0} is zero")]
    ZeroCovector(usize),
    #[error("covectors {0} and {1} are proportional")]
    ProportionalCovectors(usize, usize),
    #[error("covectors do not span: numerical rank {rank} < {dimension}")]
    SingularForm { rank: usize, dimension: usize },
    #[error("plane members {0} and {1} are numerically proportional")]
    DegeneratePlane(usize, usize),
    #[error("flat decomposition implemented for rank <= 3, got {0}")]
    RankTooHigh(usize),
    #[error("flat has {0} members, a multi flat needs at least 3")]
    NotMultiFlat(usize),
    #[error("configuration is not a vee-system (max residual {0:e})")]
    NotAVeeSystem(f64),
    #[error("configuration is reducible: {components} components in the flat incidence graph")]
    Reducible { components: usize },
    #[error("bad embedding: {0}")]
    BadEmbedding(String),
    #[error("index {index} out of range for {n} covectors")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

/// Errors raised by projective constructions and script handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("the two points spanning a line coincide")]
    DegenerateLine,
    #[error("the two lines coincide")]
    CoincidentLines,
    #[error("points are not collinear")]
    NotCollinear,
    #[error("two of the points coincide")]
    DuplicatePoints,
    #[error("step {step} ({target}) is degenerate: {reason}")]
    StepDegenerate {
        step: usize,
        target: String,
        reason: String,
    },
    #[error("script has a branch step but no branch was chosen")]
    BranchRequired,
    #[error("branch equation has no real roots")]
    NoRealRoots,
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("script line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Errors raised by catalogue loading and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogueError {
    #[error("unknown catalogue id {0:?}")]
    UnknownId(String),
    #[error("catalogue data: {0}")]
    Data(String),
    #[error("checksum mismatch: expected {expected}, got {actual}")]
    ChecksumMismatch { expected: String, actual: String },
    #[error("missing parameter {0:?}")]
    MissingParameter(String),
    #[error("unexpected parameter {0:?}")]
    UnexpectedParameter(String),
    #[error("inadmissible parameters: {0} is violated")]
    InadmissibleParameters(String),
    #[error("expression {expr:?}: {message}")]
    Expression { expr: String, message: String },
    #[error(transparent)]
    Vee(#[from] VeeError),
}

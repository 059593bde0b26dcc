use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("edge `{edge}`: vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { edge: String, vertex: usize, n: usize },
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("invalid frame signature a={a}, b={b}")]
    InvalidSignature { a: usize, b: usize },
    #[error("contracted block is not connected")]
    BlockNotConnected,
    #[error("invalid tie-down: {0}")]
    InvalidTieDown(String),
    #[error("red edge `{0}` not allowed here")]
    RedEdge(String),
    #[error("edge `{0}` was not rejected by the pebble game")]
    NotRejected(String),
    #[error("graph is not tight: {0}")]
    NotTight(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("missing label for `{0}`")]
    MissingLabel(String),
    #[error("label for `{id}` has length {got}, expected {expected}")]
    LabelLength { id: String, got: usize, expected: usize },
    #[error("red edge `{0}` has a nonzero label in the last b coordinates")]
    RedLabel(String),
    #[error("rigidity matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("coincident bar endpoints for `{0}`")]
    CoincidentPoints(String),
    #[error("invalid fan diagram: {0}")]
    InvalidFan(String),
    #[error("extensor step {step} exceeds dimension {k}")]
    StepOverflow { step: usize, k: usize },
    #[error("meet of steps {c} and {d} is undefined in dimension {k}")]
    MeetUndefined { c: usize, d: usize, k: usize },
    #[error("expression evaluates to a step-{0} extensor, not a scalar")]
    NotScalar(usize),
    #[error("graph is not irreducible: {0}")]
    NotIrreducible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

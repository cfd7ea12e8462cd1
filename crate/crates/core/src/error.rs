use thiserror::Error;

/// Errors produced while parsing or validating inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty graph description")]
    EmptyGraph,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("nonpositive weight on edge {{{0}, {1}}}")]
    NonpositiveWeight(usize, usize),
    #[error("duplicate edge line for {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {0} out of range 1..={1}")]
    VertexRange(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("partition size {0} out of range 1..={1}")]
    PartitionSize(usize, usize),
    #[error("divisor has a negative entry at vertex {0}")]
    NegativeEntry(usize),
    #[error("matrix shape mismatch: {0}x{1} * {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("edge ({0}, {1}) is not contractible")]
    NotContractible(usize, usize),
    #[error("weight vector requires at least two vertices")]
    TooSmallForWeights,
    #[error("invalid weight vector: {0}")]
    InvalidWeightVector(String),
    #[error("homogenization gap {0} not divisible by t-weight {1}")]
    GapNotDivisible(i64, u32),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

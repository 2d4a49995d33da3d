use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("self-loop on node {0} in base adjacency")]
    SelfLoop(u64),

    #[error("negative or non-finite weight {weight} on edge ({src}, {dst})")]
    BadWeight { src: u64, dst: u64, weight: f64 },

    #[error("graph is empty")]
    EmptyGraph,

    #[error("graph is disconnected ({components} components); extract the largest connected component first")]
    Disconnected { components: usize },

    #[error("zero degree node at index {0}")]
    ZeroDegree(usize),

    #[error("nodes isolated after sparsification: {0:?}")]
    IsolatedNodes(Vec<usize>),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix of size {n} exceeds the dense eigensolver cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("float conversion limited to K <= {max}, got K = {k}; use exact rational mode")]
    PrecisionLimit { k: usize, max: usize },

    #[error("solver did not converge; worst residual {worst_residual:e} (column {column})")]
    NonConvergence { worst_residual: f64, column: usize },

    #[error("{0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable short code used on the command-line error stream.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io(_) => "E_IO",
            Error::Parse { .. } => "E_PARSE",
            Error::InvalidInput(_)
            | Error::SelfLoop(_)
            | Error::BadWeight { .. }
            | Error::EmptyGraph => "E_INPUT",
            Error::InvalidParameter(_) | Error::Unsupported(_) => "E_USAGE",
            _ => "E_COMPUTE",
        }
    }

    /// Process exit code: 2 for I/O and usage problems, 1 for computation errors.
    pub fn exit_code(&self) -> i32 {
        match self.code() {
            "E_COMPUTE" => 1,
            _ => 2,
        }
    }
}

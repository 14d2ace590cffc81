use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("relation closure is cyclic: {0} and {1} are mutually below each other")]
    Cycle(usize, usize),
    #[error("index {index} out of range for size {size}")]
    Index { index: usize, size: usize },
    #[error("size {got} exceeds the cap of {cap}")]
    Size { got: usize, cap: usize },
    #[error("realizer does not realize the poset")]
    RealizerMismatch,
    #[error("{p} does not divide {h}")]
    Divisibility { p: usize, h: usize },
    #[error("poset does not have a unique minimum and maximum")]
    MinMax,
    #[error("capacity failure in {stage}: have {have}, need {need}")]
    Capacity { stage: String, have: usize, need: usize },
    #[error("search budget of {0} nodes exhausted")]
    Timeout(u64),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("bad parameter: {0}")]
    Parameter(String),
    #[error("no admissible bridging copy at step {0}")]
    Bridge(usize),
    #[error("retries exhausted: {0}")]
    RetriesExhausted(String),
    #[error("greedy selection exhausted: {0}")]
    GreedyExhausted(String),
    #[error("goodness requested but {0}")]
    Goodness(String),
    #[error("stage {stage} failed: {source}")]
    Stage { stage: String, source: Box<Error> },
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("expected a 2-dimensional grid, got {0}")]
    Dimension(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn at(self, stage: &str) -> Error {
        Error::Stage { stage: stage.to_string(), source: Box::new(self) }
    }

    /// Innermost error after unwrapping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Either a constructed object or a proof that none exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome<T> {
    Found(T),
    Infeasible(String),
}

impl<T> Outcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            Outcome::Found(t) => Some(t),
            Outcome::Infeasible(_) => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Outcome::Found(_))
    }
}

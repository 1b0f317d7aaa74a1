use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("need at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("n * avg_degree must be even (n = {n}, avg_degree = {avg_degree})")]
    OddDegreeSum { n: usize, avg_degree: usize },
    #[error("{edges} edges requested but a simple graph holds at most {max}")]
    TooDense { edges: usize, max: usize },
    #[error("self-loop at agent {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("agent {agent} out of range for n = {n}")]
    AgentOutOfRange { agent: usize, n: usize },
    #[error("group fraction {0} outside [0, 1]")]
    InvalidGroupFraction(f64),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("tolerance {0} outside [0, 1]")]
    ToleranceRange(f64),
    #[error("tolerance {0} is not a multiple of 0.01")]
    TolerancePrecision(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("need at least {min} singular values, got {k}")]
    TooFewValues { k: usize, min: usize },
    #[error("requested {k} singular values from a graph of {n} agents")]
    TooManyValues { k: usize, n: usize },
    #[error("embedding dimension {d} outside [1, {n}]")]
    InvalidDimension { d: usize, n: usize },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown sweep '{0}' (builtins: symmetric, asymmetric, groupsize, minority-large, minority-small)")]
    UnknownSweep(String),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("reps must be at least 1")]
    ZeroReps,
    #[error("cannot aggregate an empty result set")]
    EmptyResults,
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl ExperimentError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        ExperimentError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        ExperimentError::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

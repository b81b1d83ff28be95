use thiserror::Error;

use crate::model::{DemandId, LinkId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid demand {demand}: {reason}")]
    InvalidDemand { demand: DemandId, reason: String },

    #[error("no path from node {src} to node {dst}")]
    NoPath { src: NodeId, dst: NodeId },

    #[error("no pair of edge-disjoint paths from node {src} to node {dst}")]
    NoDisjointPair { src: NodeId, dst: NodeId },

    #[error("bit stream length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("infeasible instance: {reason}")]
    Infeasible { demand: Option<DemandId>, reason: String },

    #[error("search budget exhausted before any feasible solution was found")]
    BudgetExhausted,

    #[error("inconsistent solution: {0}")]
    Inconsistent(String),

    #[error("security violation ({condition}){}", link.map(|l| format!(" on link {l}")).unwrap_or_default())]
    SecurityViolation { condition: String, link: Option<LinkId> },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

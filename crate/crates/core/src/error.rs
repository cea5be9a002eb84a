//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node id {id} out of range for graph with {num_nodes} nodes")]
    NodeOutOfRange { id: usize, num_nodes: usize },

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("graph has no edges")]
    EmptyEdgeSet,

    #[error("node {node} is isolated; {context} requires positive degree")]
    IsolatedNode { node: usize, context: String },

    #[error("shape mismatch in {op}: expected {expected}, got {got}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("labels must contain at least two classes")]
    SingleClass,

    #[error("class {0} has no nodes")]
    EmptyClass(usize),

    #[error("class {0} has zero total degree")]
    ZeroDegreeClass(usize),

    #[error("mask selects no usable nodes")]
    EmptyMask,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value produced by `{op}`")]
    NonFinite { op: &'static str },

    #[error("backward root must be a 1x1 scalar")]
    NonScalarRoot,

    #[error("synthetic spec infeasible: {0}")]
    Infeasible(String),

    #[error("stub matching failed: {0}")]
    MatchingFailed(String),

    #[error("training diverged: non-finite loss at epoch {0}")]
    Diverged(usize),

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::network::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({u}, {v}) has concurrence {c}, outside [0, 1]")]
    ConcurrenceOutOfRange { u: NodeId, v: NodeId, c: f64 },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: NodeId, v: NodeId },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge endpoint {0} is not a node of the network")]
    DanglingEndpoint(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("node {0} has only one of x/y set")]
    PartialPosition(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("source and target are the same node ({0})")]
    SameNode(NodeId),
    #[error("node {0} appears more than once in the node set")]
    DuplicateMember(NodeId),
    #[error("node set has {0} members; at least 2 are required")]
    SubsetTooSmall(usize),
    #[error("strength table covers no node pairs")]
    EmptyTable,
    #[error("node {node} has degree {degree}; the quantum clustering coefficient needs at least 2 neighbors")]
    DegreeTooSmall { node: NodeId, degree: usize },
    #[error("threshold epsilon = {0} is outside [0, 1]")]
    InvalidEpsilon(f64),
    #[error("invalid concurrence distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid path-length PMF: {0}")]
    InvalidPmf(String),
    #[error("node {0} has no position")]
    MissingPositions(NodeId),
    #[error("partition does not match the network: {0}")]
    InconsistentPartition(String),
    #[error("strength table was built without paths")]
    PathsNotRetained,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the filesystem rather than of the input data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Parse(e) => e.is_io(),
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}

use thiserror::Error;

use crate::lattice::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("vertex {0} is not part of the geometry")]
    InvalidVertex(VertexId),

    #[error("box of side {n} centered at ({cx}, {cy}) does not fit with a margin of {margin} cells")]
    BoxDoesNotFit { n: usize, cx: i64, cy: i64, margin: usize },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("{edges} free edges exceed the enumeration cap of {cap}; use the pruned mode with a larger cap or the sampler")]
    EnumerationCap { edges: usize, cap: usize },

    #[error("frozen boundary: no assignment of the free edges satisfies the 1-2 law")]
    FrozenBoundary,

    #[error("configuration violates the 1-2 law at {0}")]
    InvalidConfiguration(VertexId),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("insufficient clusters: only {found} admissible clusters meet the box (need 3)")]
    InsufficientClusters { found: usize },

    #[error("surgery could not restore the 1-2 law at {vertex}")]
    Unrepairable { vertex: VertexId },

    #[error("partitions are over different ground sets")]
    GroundSetMismatch,

    #[error("{what} = {value} is out of range {range}")]
    OutOfRange { what: &'static str, value: usize, range: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

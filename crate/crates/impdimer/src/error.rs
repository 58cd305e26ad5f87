//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by graph construction, linear algebra, counting and oracles.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A grid specification violates one of its invariants.
    #[error("invalid grid specification: {0}")]
    InvalidSpec(String),
    /// A vertex expected on the boundary of the primal grid is interior.
    #[error("vertex {0} is not on the boundary")]
    NotOnBoundary(String),
    /// The requested boundary arc passes a terminal attachment slot.
    #[error("boundary arc between {0} contains a terminal")]
    ArcContainsTerminal(String),
    /// No terminal-free boundary arc exists for the requested endpoints.
    #[error("no terminal-free arc: {0}")]
    ArcNotFound(String),
    /// Arc endpoints coincide or are otherwise degenerate.
    #[error("degenerate arc: {0}")]
    DegenerateArc(String),
    /// A matrix needed to be invertible but is singular.
    #[error("singular matrix")]
    SingularMatrix,
    /// Matrix shapes do not conform.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A vertex id is not indexed by the matrix or graph.
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    /// Identification classes interleave along the outer face.
    #[error("identification classes cross along the boundary")]
    CrossingIdentification,
    /// A node of a circular graph does not lie on the recorded outer face.
    #[error("node {0} is not on the outer face")]
    NodeNotOnBoundary(usize),
    /// A circular graph needs at least one node.
    #[error("empty node list")]
    EmptyNodes,
    /// A partition is not bipartite in the contiguous-coloring sense.
    #[error("partition is not bipartite: {0}")]
    NonBipartite(String),
    /// A partition is crossing with respect to the circular node order.
    #[error("partition is crossing")]
    CrossingPartition,
    /// An impurity configuration is invalid for the requested formula.
    #[error("invalid impurity configuration: {0}")]
    InvalidConfig(String),
    /// The auxiliary boundary vertex of the near-boundary formula is undefined.
    #[error("auxiliary vertex undefined: {0}")]
    AuxiliaryUndefined(String),
    /// A configuration lies outside what the implemented formulas cover.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    /// An exhaustive oracle was asked to handle an instance above its guard rail.
    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    /// The graph is disconnected where connectivity is required.
    #[error("graph is disconnected")]
    Disconnected,
    /// A target set cannot be reached from the start vertex.
    #[error("target unreachable from vertex {0}")]
    Unreachable(usize),
    /// A numeric argument lies outside its admissible range.
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    /// Integer overflow in a machine-width counter.
    #[error("counter overflow")]
    Overflow,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

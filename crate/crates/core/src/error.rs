use thiserror::Error;

/// Errors surfaced by the library.
///
/// Variants are grouped so a caller (e.g. the CLI) can map them onto exit
/// codes: usage problems, data problems, and resource guards.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: self-loop edge {node} {node} rejected (use skip_self_loops to drop such lines)")]
    SelfLoop { line: usize, node: u64 },

    #[error("edge list produced an empty graph")]
    EmptyGraph,

    #[error("node {node} has no neighbors (strict mode rejects isolated nodes)")]
    IsolatedNode { node: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration too large: {paths} walk prefixes exceed the {limit} guard")]
    EnumerationTooLarge { paths: u64, limit: u64 },

    #[error("subset space too large: C({n},{k}) exceeds the {limit} guard")]
    SubsetSpaceTooLarge { n: usize, k: usize, limit: u64 },

    #[error("refusing exact algorithm: estimated {estimate:.3e} operations exceed the {limit:.1e} guard (pass force to override)")]
    SizeGuard { estimate: f64, limit: f64 },

    #[error("walk set mismatch: {0}")]
    WalkMismatch(String),

    #[error("node {node} is already selected")]
    AlreadySelected { node: u64 },

    #[error("metric undefined for this target set: {0}")]
    UndefinedMetric(String),

    #[error("unknown algorithm label '{0}'")]
    UnknownAlgorithm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

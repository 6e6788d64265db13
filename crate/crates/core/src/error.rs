use thiserror::Error;

/// Errors raised by the analytical model and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no feasible aggregation count: header {header} B plus one {packet_len} B BNC packet exceeds the {max_payload} B limit")]
    Infeasible {
        max_payload: usize,
        header: usize,
        packet_len: usize,
    },

    #[error("aggregation count N = {n} is outside the feasible range 1..={n_max}")]
    InfeasibleN { n: usize, n_max: usize },

    #[error("(s, k) = ({s}, {k}) is not a valid full-packet lineage for M = {m}, N = {n}")]
    InvalidPhase {
        s: usize,
        k: usize,
        m: usize,
        n: usize,
    },

    #[error("recursion depth {alpha} exceeds the limit {limit}")]
    RecursionDepth { alpha: usize, limit: usize },

    #[error("exhaustive enumeration needs {terms} terms, above the bound {bound}")]
    EnumerationTooLarge { terms: u64, bound: u64 },
}

pub type Result<T> = std::result::Result<T, ModelError>;

use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid lattice configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "enumeration of d={d} up to n={n_max} edges exceeds the feasibility cap \
         (max {cap} edges, roughly 10^{log10_estimated_nodes:.1} search nodes)"
    )]
    Infeasible {
        d: usize,
        n_max: usize,
        cap: usize,
        log10_estimated_nodes: f64,
    },

    #[error("n={n} is outside the enumerated range 1..={n_max}")]
    OutOfRange { n: usize, n_max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no maximizer: row n={n} has no nonzero counts")]
    NoMaximizer { n: usize },

    #[error("reference growth rate vanishes at beta={beta}; ratio undefined")]
    UndefinedRatio { beta: f64 },

    #[error("insufficient data for {context}: need {needed} points, have {got}")]
    InsufficientData {
        context: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("malformed table: {0}")]
    Table(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

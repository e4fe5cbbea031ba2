use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight family generated a non-positive weight {value} at index {index}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("cumulative weight overflowed at index {index}")]
    WeightOverflow { index: usize },

    #[error("explicit weight list has {len} entries; index {index} requested")]
    WeightIndexOutOfRange { index: usize, len: usize },

    #[error("partial-sum generator is unbounded: {0}")]
    UnboundedGenerator(String),

    #[error("series has no known bound on its partial sums")]
    NotBoundedSeries,

    #[error("invalid truncation window: {0}")]
    InvalidWindow(String),

    #[error("index (m={m}, n={n}) lies outside the table window")]
    OutOfWindow { m: usize, n: usize },

    #[error("window needs {cells} cells, budget is {budget}")]
    CellBudgetExceeded { cells: u128, budget: u128 },

    #[error("series is not finitely supported within column bound {j_max}")]
    NotFinitelySupported { j_max: usize },

    #[error("subset enumeration over {rows} rows exceeds the cap of {cap}")]
    EnumerationCap { rows: usize, cap: usize },

    #[error("truncated norm overflowed at shift n={n}")]
    NormOverflow { n: usize },

    #[error("oracle budget exceeded: {0}")]
    OracleBudget(String),
}

impl Error {
    /// True for errors caused by window or resource limits rather than by
    /// malformed parameters.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::InvalidWindow(_)
                | Error::OutOfWindow { .. }
                | Error::CellBudgetExceeded { .. }
                | Error::EnumerationCap { .. }
                | Error::OracleBudget(_)
                | Error::NotFinitelySupported { .. }
        )
    }
}

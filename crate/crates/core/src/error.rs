use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cost model: {0}")]
    InvalidCostModel(String),

    #[error("non-constant conditional capacity: {}", format_rows(.rows))]
    NonConstantCapacity { rows: Vec<(String, f64)> },

    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("support too large: {size} sequences exceeds the cap of {cap}")]
    SupportTooLarge { size: u128, cap: u128 },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("dp mode requires an i.i.d. source; decompose mixed sources by component")]
    DpRequiresIid,

    #[error("precision exhausted at {bits} fractional bits")]
    PrecisionExhausted { bits: u32 },

    #[error("sequence is not in the code's support")]
    UnknownSequence,

    #[error("code string is not a codeword")]
    UnknownCodeword,

    #[error("code string is a proper prefix of a codeword")]
    TruncatedCodeword,

    #[error("empty support")]
    EmptySupport,

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("epsilon {eps} lies on the excluded boundary w(1) = {w1}")]
    MixedBoundary { eps: f64, w1: f64 },

    #[error("center a = {a} is not admissible; expected {expected}")]
    InadmissibleCenter { a: f64, expected: f64 },

    #[error("fixed-length code set is empty")]
    EmptyFixedLengthSet,

    #[error("{0} mode needs an explicit code table")]
    MissingCodeTable(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::PrecisionExhausted { .. })
    }
}

fn format_rows(rows: &[(String, f64)]) -> String {
    rows.iter()
        .map(|(ctx, a)| format!("context {:?} -> {a:.12}", ctx))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;

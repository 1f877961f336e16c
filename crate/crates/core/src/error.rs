use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("item size S must be in [2, {max}], got {got}")]
    InvalidItemSize { got: u64, max: u64 },

    #[error("bin size {bin} outside [{min}, {max}]")]
    BinOutOfRange { bin: u64, min: u64, max: u64 },

    #[error("fill ({small} S, {large} L) does not fit in a bin of size {bin}")]
    Overfull { bin: u64, small: u64, large: u64 },

    #[error("fill ({small} S, {large} L) exceeds the remaining inventory ({have_small} S, {have_large} L)")]
    Overdraw {
        small: u64,
        large: u64,
        have_small: u64,
        have_large: u64,
    },

    #[error("no items left to pack")]
    EmptyInventory,

    #[error("bin sequence of length {len} exceeds the limit of {max}")]
    SequenceTooLong { len: usize, max: usize },

    #[error("DP table with {states} states exceeds the limit of {max}")]
    TableTooLarge { states: u128, max: u128 },

    #[error("brute-force search space of {size} leaves exceeds the limit of {max}")]
    SearchSpaceTooLarge { size: u128, max: u128 },

    #[error("example {id} is not defined for s={s}, l={l}: {reason}")]
    ExamplePrecondition {
        id: u8,
        s: u64,
        l: u64,
        reason: &'static str,
    },

    #[error("game did not terminate within {bins} bins")]
    NonTermination { bins: usize },

    #[error("unknown policy id `{0}`")]
    UnknownPolicy(String),

    #[error("unknown adversary `{0}`")]
    UnknownAdversary(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

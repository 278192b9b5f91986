use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension n = {n} is below 3")]
    DimensionTooSmall { n: u64 },

    #[error("dimension n = {n} is too large: cardinalities overflow 64 bits")]
    DimensionTooLarge { n: u64 },

    #[error("M = {m} equals the tight 7-design cardinality for n = {n}; tight designs are excluded")]
    TightBound { n: u64, m: u64 },

    #[error("M = {m} is below the tight 7-design cardinality {lower} for n = {n}")]
    BelowTightBound { n: u64, m: u64, lower: u64 },

    #[error("M = {m} exceeds the absolute bound {upper} for n = {n}")]
    AboveAbsoluteBound { n: u64, m: u64, upper: u64 },

    #[error("moment index {i} is outside 0..=7")]
    MomentIndex { i: u32 },

    #[error("p-adic valuation of zero is undefined")]
    ZeroValuation,

    #[error("{p} is not a prime")]
    NotPrime { p: u64 },

    #[error("R(n, M) vanishes at n = {n}, M = {m}; the product formulas are singular")]
    SingularDenominator { n: u64, m: u64 },

    #[error("interval denominator contains zero at {bits} bits")]
    PrecisionExhausted { bits: u32 },

    #[error("invalid scan range: n_min = {n_min}, n_max = {n_max}")]
    InvalidRange { n_min: u64, n_max: u64 },

    #[error("ledger {path}, line {line}: {reason}")]
    CorruptLedger {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("dimension {n}: stored results do not match the ledger checksum")]
    ChecksumMismatch { n: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: stored results were produced with different scan settings ({reason}); rerun without --resume")]
    SettingsMismatch { path: PathBuf, reason: String },

    #[error("cannot start worker pool: {0}")]
    ThreadPool(String),

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

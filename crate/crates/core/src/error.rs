use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no candidate scheme accepts {0}")]
    UnsupportedType(String),

    #[error("corrupt block: {0}")]
    CorruptBlock(String),

    #[error("empty input")]
    EmptyInput,

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("bad magic: not a bullion file")]
    BadMagic,

    #[error("truncated footer: {0}")]
    TruncatedFooter(String),

    #[error("column not found: {0}")]
    ColumnNotFound(String),

    #[error("row {row} out of range (num_rows = {num_rows})")]
    RowOutOfRange { row: u64, num_rows: u64 },

    #[error("unsupported encoding for in-place masking: {0}")]
    UnsupportedEncoding(String),

    #[error("masked page would grow past its allocated size ({new} > {limit} bytes)")]
    SizeExceeded { new: usize, limit: usize },

    #[error("file is locked by another process; deletion needs exclusive access")]
    ExclusiveAccessRequired,

    #[error("compliance level 0 cannot delete in place; rewrite the file instead")]
    RewriteRequired,

    #[error("too many distinct values to rehash into 32-bit codes")]
    DistinctOverflow,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("score column not found: {0}")]
    MissingScoreColumn(String),

    #[error("score column {0} is not numeric")]
    NonNumericScore(String),

    #[error("unknown column in ranking: {0}")]
    UnknownColumn(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("ingest error at row {row}, column {column}: {message}")]
    Ingest { row: usize, column: String, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable variant name for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnsupportedType(_) => "unsupported_type",
            Error::CorruptBlock(_) => "corrupt_block",
            Error::EmptyInput => "empty_input",
            Error::SchemaMismatch(_) => "schema_mismatch",
            Error::BadMagic => "bad_magic",
            Error::TruncatedFooter(_) => "truncated_footer",
            Error::ColumnNotFound(_) => "column_not_found",
            Error::RowOutOfRange { .. } => "row_out_of_range",
            Error::UnsupportedEncoding(_) => "unsupported_encoding",
            Error::SizeExceeded { .. } => "size_exceeded",
            Error::ExclusiveAccessRequired => "exclusive_access_required",
            Error::RewriteRequired => "rewrite_required",
            Error::DistinctOverflow => "distinct_overflow",
            Error::LengthMismatch(_) => "length_mismatch",
            Error::MissingScoreColumn(_) => "missing_score_column",
            Error::NonNumericScore(_) => "non_numeric_score",
            Error::UnknownColumn(_) => "unknown_column",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Ingest { .. } => "ingest",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::CorruptBlock(msg.into())
    }
}

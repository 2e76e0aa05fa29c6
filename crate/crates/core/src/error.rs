use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("lag {lag} lies outside the coefficient window ±{window}")]
    OutOfWindow { lag: i64, window: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate pair: j and k must differ (both are {0})")]
    DegeneratePair(i64),

    #[error("series too short: need at least {needed} values, got {got}")]
    Length { needed: usize, got: usize },

    #[error("empty request: {0}")]
    Empty(String),

    #[error("series diverges: coefficient sum Σ|l|^(-2σ) is infinite for σ = {0}")]
    DivergentSeries(f64),

    #[error("tensor of {entries} entries exceeds the cap of {cap}")]
    Size { entries: usize, cap: usize },

    #[error("missing column `{column}` in {path}")]
    Schema { column: String, path: PathBuf },

    #[error("no usable data in {0}")]
    EmptyData(String),

    #[error("verdict table for `{0}` has no usable s = 1 row")]
    MissingAnchor(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the input data rather than by how the
    /// library was called.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Length { .. }
                | Error::Schema { .. }
                | Error::EmptyData(_)
                | Error::MissingAnchor(_)
                | Error::Parse(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}

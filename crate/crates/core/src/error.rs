use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("resolution {0} exceeds the supported maximum {1}")]
    ResolutionTooLarge(u32, u32),

    #[error("expected 2^{resolution} values, got {got}")]
    LengthMismatch { resolution: u8, got: usize },

    #[error("non-finite value at cell {0}")]
    NonFinite(usize),

    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(u8, u8),

    #[error("frequency {n} is not cell-constant at resolution {resolution}")]
    FrequencyTooHigh { n: u64, resolution: u8 },

    #[error("partial-sum order {n} exceeds 2^{resolution}")]
    OrderTooLarge { n: u64, resolution: u8 },

    #[error("invalid lacunary sequence: {0}")]
    BadSequence(String),

    #[error("choice function out of range: {0}")]
    BadChoice(String),

    #[error("invalid tile: {0}")]
    BadTile(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),
}

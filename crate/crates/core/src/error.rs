use alloc::string::String;

use crate::hardware::{ExecutionUnit, Precision};

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the analytical models.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no {unit} peak at {precision} in hardware spec")]
    MissingPeak {
        unit: ExecutionUnit,
        precision: Precision,
    },
    #[error("invalid hardware spec: {0}")]
    InvalidSpec(String),
    #[error("invalid count: {0}")]
    InvalidCount(&'static str),
    #[error("index size must be 2, 4 or 8 bytes, got {0}")]
    InvalidIndexSize(u8),
    #[error("metadata byte size must be one of 0, 1, 2, 4, 8, got {0}")]
    InvalidByteSize(u8),
    #[error("invalid sparse matrix stats: {0}")]
    InvalidStats(&'static str),
    #[error("unknown stencil preset `{0}`")]
    UnknownStencil(String),
    #[error("invalid intensity range: {0}")]
    InvalidRange(&'static str),
    #[error("intensity must be positive and finite")]
    ZeroIntensity,
    #[error("balance must be positive and finite")]
    ZeroBalance,
    #[error("balance must be non-negative and finite")]
    InvalidBalance,
    #[error("alpha must be finite and >= 1, got {0}")]
    InvalidAlpha(f64),
    #[error("invalid time breakdown: {0}")]
    InvalidBreakdown(&'static str),
}

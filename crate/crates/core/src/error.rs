use thiserror::Error;

use crate::codes::CodeKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter `{name}`: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("conditional state undefined for a zero-probability outcome")]
    UndefinedConditional,

    #[error("operation not supported for {0:?} codes")]
    UnsupportedKind(CodeKind),

    #[error("index {index} out of range 1..={max}")]
    InvalidIndex { index: usize, max: usize },

    #[error("invalid announcement: {0}")]
    InvalidAnnouncement(String),

    #[error("invalid transcript: {0}")]
    InvalidTranscript(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("no sign change of the key rate on [0, 1] (R(0) = {r_low}, R(1) = {r_high})")]
    NoThreshold { r_low: f64, r_high: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

use thiserror::Error;

use crate::model::User;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("gain {name} must be finite and nonzero, got {value}")]
    InvalidGain { name: &'static str, value: f64 },
    #[error("power budget P must be finite and positive, got {0}")]
    InvalidPower(f64),
    #[error("gains must satisfy h1^2 >= h2^2 >= h3^2, got h1={h1}, h2={h2}, h3={h3}")]
    GainOrder { h1: f64, h2: f64, h3: f64 },
    #[error("rate {pair} must be finite and nonnegative, got {value}")]
    InvalidRate { pair: String, value: f64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DycError {
    #[error("level counts must satisfy n1 >= n2 >= n3, got ({0}, {1}, {2})")]
    LevelOrder(usize, usize, usize),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("message length mismatch for {pair}: plan expects {expected} bits, got {actual}")]
    DimensionMismatch { pair: String, expected: usize, actual: usize },
    #[error("relay observation has {actual} levels, expected {expected}")]
    ObservationLength { expected: usize, actual: usize },
    #[error("downlink level {level} forwards uplink level {source_level}, which carries nothing")]
    MissingRelaySymbol { level: usize, source_level: usize },
    #[error("{user} cannot decode: {reason}")]
    Undecodable { user: User, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("C(x) is undefined for x <= -1, got {0}")]
    Domain(f64),
    #[error("power {name} must be finite and nonnegative, got {value}")]
    InvalidPower { name: String, value: f64 },
    #[error("coupling violated: {0}")]
    Coupling(String),
    #[error("allocation infeasible: {0}")]
    Infeasible(String),
    #[error("weights must be finite, nonnegative and not all zero")]
    InvalidWeights,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("fine scale must be finite and positive, got {0}")]
    InvalidScale(f64),
    #[error("nesting ratio must be at least 2, got {0}")]
    InvalidNestingRatio(u64),
    #[error("codebook of size {q}^{n} does not fit in 64 bits")]
    CodebookTooLarge { q: u64, n: usize },
    #[error("message index {index} out of range for codebook of size {size}")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("expected a vector of dimension {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("scaling factor must be finite and nonzero, got {0}")]
    ZeroScaling(f64),
    #[error("{0:?} is not a codebook point")]
    NotACodeword(Vec<f64>),
    #[error("noise variance must be finite and nonnegative, got {0}")]
    InvalidNoise(f64),
}

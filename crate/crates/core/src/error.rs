// Copyright (c) The detcode Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by every layer of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("division by zero")]
    DivideByZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("mode m={m} is invalid for d={d} (need 1 <= m <= d)")]
    BadMode { d: usize, m: usize },
    #[error("field GF({p}) is too small for n={n} (need p >= n + 1)")]
    FieldTooSmall { p: u64, n: usize },
    #[error("byte ingestion needs p >= 257, got {0}")]
    FieldTooSmallForBytes(u64),
    #[error("expected {expected} symbols, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("parity equation violated for subset {0:?}")]
    ParityViolation(Vec<usize>),
    #[error("payload targets node {got}, expected {expected}")]
    WrongTarget { expected: usize, got: usize },
    #[error("{e} failures exceed d={d}")]
    TooManyFailures { e: usize, d: usize },
    #[error("helper set overlaps failed set at node {0}")]
    OverlapError(usize),
    #[error("not enough helpers: need {need}, have {have}")]
    NotEnoughHelpers { need: usize, have: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed encoding: {0}")]
    Format(String),
    #[error("node {0} is not available")]
    NodeUnavailable(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

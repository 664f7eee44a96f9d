//! Time-correlated multipath fading: tap-delay profiles, Gauss-Markov tap
//! processes with Clarke lag-one correlation, frequency responses, and
//! materialized channel traces.

mod bessel;
mod fading;
mod pdp;
mod trace;

use std::time::Duration;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub use bessel::bessel_j0;
pub use fading::{
    freq_response, lag_one_correlation, link_seed, subcarrier_frequencies, ChannelModel,
    DopplerSchedule, FadingField, FadingProcess,
};
pub use pdp::{PowerDelayProfile, Tap};
pub use trace::{generate_trace, FadingTrace, TraceReplay};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid power-delay profile: {0}")]
    InvalidProfile(String),
    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("user {0} is not part of this channel")]
    UnknownUser(usize),
    #[error("channel cannot move backwards from block {current} to {requested}")]
    TimeReversal { requested: u64, current: u64 },
    #[error("trace has {available} time slices, block {requested} requested")]
    TraceExhausted { requested: u64, available: u64 },
    #[error("malformed trace header: {0}")]
    MalformedHeader(String),
    #[error("malformed trace row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("truncated trace: {} of {expected} records missing", expected - found)]
    Truncated { expected: usize, found: usize },
    #[error("non-finite sample at record {index}")]
    NonFinite { index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that can report the true channel of a user set at a block index.
pub trait ChannelSource {
    fn num_tx(&self) -> usize;
    fn num_subcarriers(&self) -> usize;
    fn dt(&self) -> Duration;
    /// Per-subcarrier `N_u x N_t` responses at `block`, rows in `users` order.
    fn response(&mut self, block: u64, users: &[usize]) -> Result<Vec<DMatrix<Complex64>>, ChannelError>;
}

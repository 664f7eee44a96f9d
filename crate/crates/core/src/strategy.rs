//! Sounding policies: fixed-interval baselines and the dynamic policy driven
//! by the reference throughput
//!
//! ```text
//! R_TH(n) = sum_{m<=n} sum_j D(m, j) / (T_s + sum_{m<=n} T_AMPDU(m))
//! ```
//!
//! accumulated since the last sounding. The dynamic policy keeps transmitting
//! while `R_TH` strictly increases and sounds at its first non-increase, with
//! the first AMPDU after every sounding exempt from the comparison.

use std::fmt;
use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StrategyError {
    #[error("reference throughput is undefined before the first AMPDU after a sounding")]
    NoAmpduYet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoundingDecision {
    Sound,
    Transmit,
}

/// Outcome of one downlink AMPDU across the served group.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpduRecord {
    /// Successfully delivered bits per user.
    pub goodput_bits: Vec<u64>,
    pub duration: Duration,
}

impl AmpduRecord {
    pub fn total_bits(&self) -> u64 {
        self.goodput_bits.iter().sum()
    }
}

/// Flags, counters, and accumulators of the sounding controller.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyState {
    /// `s`: sound before the next AMPDU.
    pub sound_needed: bool,
    /// `f`: the next completed AMPDU is the first since a sounding.
    pub first_after_sounding: bool,
    /// `n`: AMPDUs since the last sounding.
    pub ampdus_since_sounding: u32,
    pub last_sound_time: Option<Duration>,
    pub rth_prev: Option<f64>,
    pub rth_curr: Option<f64>,
    pub accum_bits: u64,
    pub accum_ampdu_time: Duration,
    /// Airtime of the last sounding.
    pub sounding_overhead: Duration,
}

impl Default for StrategyState {
    fn default() -> Self {
        Self::new()
    }
}

impl StrategyState {
    /// Initial state: a sounding is due before the first AMPDU.
    pub fn new() -> Self {
        Self {
            sound_needed: true,
            first_after_sounding: false,
            ampdus_since_sounding: 0,
            last_sound_time: None,
            rth_prev: None,
            rth_curr: None,
            accum_bits: 0,
            accum_ampdu_time: Duration::ZERO,
            sounding_overhead: Duration::ZERO,
        }
    }

    /// A sounding started at `start` and took `overhead`; all reference
    /// throughput accumulators restart.
    pub fn record_sounding(&mut self, start: Duration, overhead: Duration) {
        self.first_after_sounding = true;
        self.ampdus_since_sounding = 0;
        self.last_sound_time = Some(start);
        self.rth_prev = None;
        self.rth_curr = None;
        self.accum_bits = 0;
        self.accum_ampdu_time = Duration::ZERO;
        self.sounding_overhead = overhead;
    }

    /// Folds a completed AMPDU into the accumulators and refreshes `R_TH`.
    pub fn record_ampdu(&mut self, record: &AmpduRecord) {
        self.ampdus_since_sounding += 1;
        self.accum_bits += record.total_bits();
        self.accum_ampdu_time += record.duration;
        self.rth_prev = self.rth_curr;
        self.rth_curr = self.reference_throughput().ok();
    }

    /// Reference throughput in bit/s from the running accumulators.
    pub fn reference_throughput(&self) -> Result<f64, StrategyError> {
        if self.ampdus_since_sounding == 0 {
            return Err(StrategyError::NoAmpduYet);
        }
        let elapsed = (self.sounding_overhead + self.accum_ampdu_time).as_secs_f64();
        Ok(self.accum_bits as f64 / elapsed)
    }
}

/// Records the AMPDU, then keeps transmitting if it was the first since the
/// last sounding or `R_TH` strictly increased; otherwise requests a sounding.
pub fn dynamic_decide(state: &mut StrategyState, record: &AmpduRecord) -> SoundingDecision {
    state.record_ampdu(record);
    let increased = matches!((state.rth_prev, state.rth_curr), (Some(p), Some(c)) if p < c);
    if state.first_after_sounding || increased {
        state.sound_needed = false;
        state.first_after_sounding = false;
        SoundingDecision::Transmit
    } else {
        state.sound_needed = true;
        SoundingDecision::Sound
    }
}

/// Sounds once `interval` has elapsed since the last sounding started.
pub fn fixed_decide(state: &StrategyState, now: Duration, interval: Duration) -> SoundingDecision {
    match state.last_sound_time {
        Some(last) if now.saturating_sub(last) < interval => SoundingDecision::Transmit,
        _ => SoundingDecision::Sound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Dynamic,
    Fixed { interval: Duration },
}

impl Strategy {
    pub fn fixed_ms(ms: u64) -> Self {
        Strategy::Fixed { interval: Duration::from_millis(ms) }
    }

    /// Applies the policy after an AMPDU completes at `now`.
    pub fn after_ampdu(&self, state: &mut StrategyState, record: &AmpduRecord, now: Duration) -> SoundingDecision {
        match *self {
            Strategy::Dynamic => dynamic_decide(state, record),
            Strategy::Fixed { interval } => {
                state.record_ampdu(record);
                state.first_after_sounding = false;
                let d = fixed_decide(state, now, interval);
                state.sound_needed = d == SoundingDecision::Sound;
                d
            }
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Dynamic => write!(f, "dynamic"),
            Strategy::Fixed { interval } => write!(f, "fixed_{}us", interval.as_micros()),
        }
    }
}

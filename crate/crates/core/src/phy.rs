//! SINR to rate mapping: MCS selection, OFDM PHY rate, AMPDU goodput, and
//! (effective) spectral efficiency.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PhyError {
    #[error("invalid MCS table: {0}")]
    InvalidTable(String),
    #[error("invalid OFDM configuration: {0}")]
    InvalidOfdm(String),
    #[error("invalid AMPDU configuration: {0}")]
    InvalidAmpdu(String),
    #[error("sounding interval {interval_s} s is shorter than the sounding overhead {overhead_s} s")]
    IntervalBelowOverhead { interval_s: f64, overhead_s: f64 },
    #[error("negative SINR {0}")]
    NegativeSinr(f64),
}

/// One modulation and coding scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub index: u8,
    pub bits_per_symbol: u32,
    /// Coding rate as (numerator, denominator).
    pub coding_rate: (u32, u32),
    pub min_sinr_db: f64,
}

impl McsEntry {
    /// Information bits per subcarrier per OFDM symbol.
    pub fn efficiency(&self) -> f64 {
        self.bits_per_symbol as f64 * self.coding_rate.0 as f64 / self.coding_rate.1 as f64
    }
}

/// VHT MCS 0-9: (bits per symbol, coding rate).
pub const VHT_MODULATIONS: [(u32, (u32, u32)); 10] = [
    (1, (1, 2)),
    (2, (1, 2)),
    (2, (3, 4)),
    (4, (1, 2)),
    (4, (3, 4)),
    (6, (2, 3)),
    (6, (3, 4)),
    (6, (5, 6)),
    (8, (3, 4)),
    (8, (5, 6)),
];

/// Ordered MCS table with strictly increasing rate and threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self, PhyError> {
        if entries.is_empty() {
            return Err(PhyError::InvalidTable("table is empty".into()));
        }
        for e in &entries {
            if e.bits_per_symbol == 0 || e.coding_rate.0 == 0 || e.coding_rate.0 > e.coding_rate.1 {
                return Err(PhyError::InvalidTable(format!("entry {} has an invalid modulation", e.index)));
            }
            if !e.min_sinr_db.is_finite() {
                return Err(PhyError::InvalidTable(format!("entry {} threshold is not finite", e.index)));
            }
        }
        for w in entries.windows(2) {
            if w[1].index <= w[0].index {
                return Err(PhyError::InvalidTable("indices must increase".into()));
            }
            if w[1].efficiency() <= w[0].efficiency() {
                return Err(PhyError::InvalidTable(format!("rate of MCS{} does not exceed MCS{}", w[1].index, w[0].index)));
            }
            if w[1].min_sinr_db <= w[0].min_sinr_db {
                return Err(PhyError::InvalidTable(format!(
                    "threshold of MCS{} does not exceed MCS{}",
                    w[1].index, w[0].index
                )));
            }
        }
        Ok(Self { entries })
    }

    /// VHT MCS 0-9 with thresholds at which `log2(1 + sinr / gap)` equals the
    /// MCS efficiency, rounded to 0.1 dB.
    pub fn shannon_gap(gap_db: f64) -> Self {
        let gap = 10f64.powf(gap_db / 10.0);
        let entries = VHT_MODULATIONS
            .iter()
            .enumerate()
            .map(|(i, &(bits, rate))| {
                let eff = bits as f64 * rate.0 as f64 / rate.1 as f64;
                let sinr = (2f64.powf(eff) - 1.0) * gap;
                McsEntry {
                    index: i as u8,
                    bits_per_symbol: bits,
                    coding_rate: rate,
                    min_sinr_db: (10.0 * sinr.log10() * 10.0).round() / 10.0,
                }
            })
            .collect();
        Self::new(entries).expect("gap table is monotone")
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    /// Highest entry whose threshold is at or below `sinr_db`; `None` below
    /// the lowest threshold.
    pub fn select(&self, sinr_db: f64) -> Option<&McsEntry> {
        self.entries.iter().rev().find(|e| e.min_sinr_db <= sinr_db)
    }
}

impl Default for McsTable {
    fn default() -> Self {
        Self::shannon_gap(3.0)
    }
}

pub fn select_mcs(sinr_db: f64, table: &McsTable) -> Option<&McsEntry> {
    table.select(sinr_db)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig {
    pub data_subcarriers: u32,
    /// Useful symbol time, 3.2 us in VHT.
    pub fft_duration: Duration,
    pub guard_interval: Duration,
    pub bandwidth_hz: f64,
}

impl OfdmConfig {
    pub fn symbol_duration(&self) -> Duration {
        self.fft_duration + self.guard_interval
    }

    pub fn validate(&self) -> Result<(), PhyError> {
        if self.data_subcarriers == 0 || self.fft_duration.is_zero() || !(self.bandwidth_hz > 0.0) {
            return Err(PhyError::InvalidOfdm("all parameters must be positive".into()));
        }
        let gi = self.guard_interval.as_nanos();
        if gi != 400 && gi != 800 {
            return Err(PhyError::InvalidOfdm(format!("guard interval must be 400 or 800 ns, got {gi} ns")));
        }
        Ok(())
    }
}

impl Default for OfdmConfig {
    /// 40 MHz VHT with short guard interval.
    fn default() -> Self {
        Self {
            data_subcarriers: 108,
            fft_duration: Duration::from_nanos(3200),
            guard_interval: Duration::from_nanos(400),
            bandwidth_hz: 40e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpduConfig {
    pub max_duration: Duration,
    pub mpdu_bits: u64,
    pub msdu_bits: u64,
}

impl AmpduConfig {
    pub fn validate(&self) -> Result<(), PhyError> {
        if self.max_duration.is_zero() {
            return Err(PhyError::InvalidAmpdu("maximum duration must be positive".into()));
        }
        if self.msdu_bits == 0 || self.msdu_bits >= self.mpdu_bits {
            return Err(PhyError::InvalidAmpdu(format!(
                "need 0 < MSDU ({}) < MPDU ({})",
                self.msdu_bits, self.mpdu_bits
            )));
        }
        Ok(())
    }
}

impl Default for AmpduConfig {
    fn default() -> Self {
        Self { max_duration: Duration::from_millis(2), mpdu_bits: 1556, msdu_bits: 1508 }
    }
}

/// Bits carried over `duration` at `mcs` on `num_streams` streams, floored.
fn raw_bits(mcs: &McsEntry, ofdm: &OfdmConfig, num_streams: u32, duration: Duration) -> u64 {
    let num = num_streams as u128
        * ofdm.data_subcarriers as u128
        * mcs.bits_per_symbol as u128
        * mcs.coding_rate.0 as u128
        * duration.as_nanos();
    let den = mcs.coding_rate.1 as u128 * ofdm.symbol_duration().as_nanos();
    (num / den) as u64
}

/// PHY rate in bit/s.
pub fn phy_rate(mcs: &McsEntry, ofdm: &OfdmConfig, num_streams: u32) -> f64 {
    num_streams as f64 * ofdm.data_subcarriers as f64 * mcs.efficiency() / ofdm.symbol_duration().as_secs_f64()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmpduPayload {
    pub mpdu_count: u64,
    pub goodput_bits: u64,
    pub duration: Duration,
}

/// A full-length AMPDU at `mcs` for one stream; partial MPDUs are dropped.
pub fn ampdu_payload(mcs: Option<&McsEntry>, ofdm: &OfdmConfig, ampdu: &AmpduConfig) -> AmpduPayload {
    let mpdu_count = match mcs {
        Some(m) => raw_bits(m, ofdm, 1, ampdu.max_duration) / ampdu.mpdu_bits,
        None => 0,
    };
    AmpduPayload { mpdu_count, goodput_bits: mpdu_count * ampdu.msdu_bits, duration: ampdu.max_duration }
}

/// `sum_i log2(1 + sinr_i)` over streams.
pub fn spectral_efficiency(sinrs: &[f64]) -> Result<f64, PhyError> {
    sinrs.iter().try_fold(0.0, |acc, &g| {
        if g < 0.0 {
            Err(PhyError::NegativeSinr(g))
        } else {
            Ok(acc + (1.0 + g).log2())
        }
    })
}

/// Spectral efficiency averaged over subcarriers; `per_subcarrier[s]` holds
/// the stream SINRs at subcarrier `s`.
pub fn mean_spectral_efficiency(per_subcarrier: &[Vec<f64>]) -> Result<f64, PhyError> {
    if per_subcarrier.is_empty() {
        return Ok(0.0);
    }
    let total = per_subcarrier.iter().map(|s| spectral_efficiency(s)).sum::<Result<f64, _>>()?;
    Ok(total / per_subcarrier.len() as f64)
}

/// `(1 - T_s / T_delta) * mean(C(T_s + m dt))` for `m = 1..M`.
pub fn effective_spectral_efficiency(
    interval_s: f64,
    overhead_s: f64,
    samples: &[f64],
) -> Result<f64, PhyError> {
    if interval_s < overhead_s || !(interval_s > 0.0) {
        return Err(PhyError::IntervalBelowOverhead { interval_s, overhead_s });
    }
    let fraction = 1.0 - overhead_s / interval_s;
    if fraction == 0.0 || samples.is_empty() {
        return Ok(0.0);
    }
    Ok(fraction * samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Nearest-rank percentile (`q` in [0, 1]) of an unsorted slice.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

pub fn db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

//! Explicit sounding airtime for single-user and multi-user beamforming.
//!
//! All arithmetic is in integer nanoseconds via [`Duration`].

use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MacError {
    #[error("a sounding needs at least one user")]
    NoUsers,
    #[error("invalid MAC timing: {0}")]
    InvalidTiming(String),
}

/// Size of a compressed beamforming report and the legacy rate it is sent at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfFormat {
    /// Fixed per-report overhead (preamble, headers, FCS) in bits at the
    /// legacy rate.
    pub base_bits: u64,
    /// Bits for one (phi, psi) angle pair.
    pub bits_per_angle_pair: u32,
    /// Subcarrier grouping factor.
    pub grouping: u32,
    pub legacy_rate_bps: u64,
    pub legacy_symbol: Duration,
}

impl Default for CbfFormat {
    fn default() -> Self {
        Self {
            base_bits: 1728,
            bits_per_angle_pair: 16,
            grouping: 2,
            legacy_rate_bps: 24_000_000,
            legacy_symbol: Duration::from_micros(4),
        }
    }
}

/// Givens angle pairs describing an `num_tx x num_rx` steering matrix.
pub fn angle_pairs(num_tx: u32, num_rx: u32) -> u32 {
    num_rx * (2 * num_tx - num_rx - 1) / 2
}

/// Angle payload of one report in bits, before the fixed overhead.
pub fn cbf_payload_bits(num_tx: u32, num_rx: u32, subcarriers: u32, format: &CbfFormat) -> u64 {
    let reported = subcarriers.div_ceil(format.grouping.max(1)) as u64;
    reported * angle_pairs(num_tx, num_rx) as u64 * format.bits_per_angle_pair as u64
}

/// Report airtime rounded up to a whole legacy OFDM symbol.
pub fn cbf_duration(num_tx: u32, num_rx: u32, subcarriers: u32, format: &CbfFormat) -> Duration {
    let bits = (format.base_bits + cbf_payload_bits(num_tx, num_rx, subcarriers, format)) as u128;
    let sym_ns = format.legacy_symbol.as_nanos();
    // symbols = ceil(bits / (rate * symbol_s))
    let den = format.legacy_rate_bps as u128 * sym_ns;
    let symbols = (bits * 1_000_000_000).div_ceil(den);
    Duration::from_nanos((symbols * sym_ns) as u64)
}

/// How the CBF airtime is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CbfTiming {
    Fixed(Duration),
    Computed { format: CbfFormat, num_tx: u32, num_rx: u32, subcarriers: u32 },
}

impl CbfTiming {
    pub fn duration(&self) -> Duration {
        match *self {
            CbfTiming::Fixed(d) => d,
            CbfTiming::Computed { format, num_tx, num_rx, subcarriers } => {
                cbf_duration(num_tx, num_rx, subcarriers, &format)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacTimingConfig {
    pub ndpa: Duration,
    pub ndp: Duration,
    pub brp: Duration,
    pub sifs: Duration,
    pub cbf: CbfTiming,
}

impl Default for MacTimingConfig {
    fn default() -> Self {
        Self {
            ndpa: Duration::from_micros(60),
            ndp: Duration::from_micros(48),
            brp: Duration::from_micros(48),
            sifs: Duration::from_micros(16),
            cbf: CbfTiming::Computed { format: CbfFormat::default(), num_tx: 4, num_rx: 1, subcarriers: 108 },
        }
    }
}

impl MacTimingConfig {
    pub fn cbf(&self) -> Duration {
        self.cbf.duration()
    }

    pub fn validate(&self) -> Result<(), MacError> {
        let named = [("ndpa", self.ndpa), ("ndp", self.ndp), ("brp", self.brp), ("sifs", self.sifs), ("cbf", self.cbf())];
        if let Some((name, _)) = named.iter().find(|(_, d)| d.is_zero()) {
            return Err(MacError::InvalidTiming(format!("{name} duration must be positive")));
        }
        if let CbfTiming::Computed { format, num_tx, num_rx, .. } = self.cbf {
            if format.legacy_rate_bps == 0 || format.legacy_symbol.is_zero() || format.grouping == 0 {
                return Err(MacError::InvalidTiming("CBF rate, symbol, and grouping must be positive".into()));
            }
            if num_rx == 0 || num_rx > num_tx {
                return Err(MacError::InvalidTiming(format!("need 1 <= num_rx ({num_rx}) <= num_tx ({num_tx})")));
            }
        }
        Ok(())
    }
}

/// NDPA, NDP, and one CBF, each followed by SIFS.
pub fn sounding_duration_su(cfg: &MacTimingConfig) -> Duration {
    cfg.ndpa + cfg.sifs + cfg.ndp + cfg.sifs + cfg.cbf() + cfg.sifs
}

/// NDPA and NDP, then one CBF per user with a poll before every report after
/// the first.
pub fn sounding_duration_mu(num_users: u32, cfg: &MacTimingConfig) -> Result<Duration, MacError> {
    if num_users == 0 {
        return Err(MacError::NoUsers);
    }
    Ok(cfg.ndpa
        + cfg.sifs
        + cfg.ndp
        + cfg.sifs
        + (cfg.sifs + cfg.cbf()) * num_users
        + (cfg.sifs + cfg.brp) * (num_users - 1))
}

/// Sounding airtime for a group of `num_users`.
pub fn sounding_duration(num_users: u32, cfg: &MacTimingConfig) -> Result<Duration, MacError> {
    match num_users {
        0 => Err(MacError::NoUsers),
        1 => Ok(sounding_duration_su(cfg)),
        n => sounding_duration_mu(n, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(ndpa: u64, ndp: u64, cbf: u64, brp: u64) -> MacTimingConfig {
        MacTimingConfig {
            ndpa: Duration::from_micros(ndpa),
            ndp: Duration::from_micros(ndp),
            brp: Duration::from_micros(brp),
            sifs: Duration::from_micros(16),
            cbf: CbfTiming::Fixed(Duration::from_micros(cbf)),
        }
    }

    #[test]
    fn angle_pair_count() {
        assert_eq!(angle_pairs(4, 1), 3);
        assert_eq!(angle_pairs(4, 2), 5);
        assert_eq!(angle_pairs(2, 1), 1);
    }

    #[test]
    fn default_cbf_is_180us() {
        assert_eq!(MacTimingConfig::default().cbf(), Duration::from_micros(180));
        assert_eq!(CbfTiming::Fixed(Duration::from_micros(180)).duration(), Duration::from_micros(180));
    }

    #[test]
    fn payload_linear_in_subcarriers() {
        let f = CbfFormat::default();
        assert_eq!(cbf_payload_bits(4, 1, 216, &f), 2 * cbf_payload_bits(4, 1, 108, &f));
        // odd counts round the group count up
        assert_eq!(cbf_payload_bits(4, 1, 3, &f), 2 * 3 * 16);
    }

    #[test]
    fn su_and_mu_durations() {
        let c = fixed(60, 48, 180, 48);
        assert_eq!(sounding_duration_su(&c), Duration::from_micros(336));
        assert_eq!(sounding_duration_mu(3, &c).unwrap(), Duration::from_micros(856));
        assert_eq!(sounding_duration_mu(1, &c).unwrap(), sounding_duration_su(&c));
        assert_eq!(sounding_duration_mu(0, &c), Err(MacError::NoUsers));

        let z = MacTimingConfig { ndpa: Duration::ZERO, ndp: Duration::ZERO, cbf: CbfTiming::Fixed(Duration::ZERO), ..c };
        assert_eq!(sounding_duration_su(&z), Duration::from_micros(48));

        let d: Vec<_> = (1..6).map(|n| sounding_duration_mu(n, &c).unwrap()).collect();
        assert!(d.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn defaults_validate() {
        assert!(MacTimingConfig::default().validate().is_ok());
        assert!(fixed(0, 48, 180, 48).validate().is_err());
    }
}

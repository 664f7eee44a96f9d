//! Session driver: interleaves soundings (which freeze a CSI snapshot) and
//! AMPDU transmissions (evaluated against the aging true channel).

mod link;
mod session;
mod sweep;

use std::time::Duration;

use thiserror::Error;

use crate::channel::{
    subcarrier_frequencies, ChannelError, ChannelModel, DopplerSchedule, PowerDelayProfile,
};
use crate::mac_timing::{MacError, MacTimingConfig};
use crate::mimo::{MimoError, DEFAULT_MAX_CONDITION};
use crate::phy::{AmpduConfig, McsTable, OfdmConfig, PhyError};

pub use link::{Link, PhysicalLink, UserOutcome};
pub use session::{
    run_link, run_session, EngineOptions, Event, RunSummary, SegmentBreakdown, SessionTimeline,
    TIMELINE_HEADER,
};
pub use sweep::{
    calibrate_lda_hda, compare_strategies, improvement, sinr_vs_age, sweep_intervals, CellFailure,
    Comparison, StrategyOutcome, SweepResult, SweepRow,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Mimo(#[from] MimoError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Mac(#[from] MacError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("sounding failed {attempts} consecutive times at t = {at_ns} ns: {last}")]
    PersistentSingularity { attempts: u32, at_ns: u128, last: MimoError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    LowDoppler,
    HighDoppler,
    Alternating,
}

impl ScenarioKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScenarioKind::LowDoppler => "low",
            ScenarioKind::HighDoppler => "high",
            ScenarioKind::Alternating => "alternating",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "low" => Some(ScenarioKind::LowDoppler),
            "high" => Some(ScenarioKind::HighDoppler),
            "alternating" => Some(ScenarioKind::Alternating),
            _ => None,
        }
    }
}

/// Radio environment and served group of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub doppler_low_hz: f64,
    pub doppler_high_hz: f64,
    pub alternation_period: Duration,
    pub alternation_starts_high: bool,
    /// Mean per-link SNR, i.e. total transmit power over noise for a
    /// unit-gain channel.
    pub mean_snr_db: f64,
    /// Served groups; more than one rotates round-robin at every sounding.
    pub groups: Vec<Vec<usize>>,
    pub duration: Duration,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::HighDoppler,
            doppler_low_hz: 0.6,
            doppler_high_hz: 3.0,
            alternation_period: Duration::from_millis(50),
            alternation_starts_high: true,
            mean_snr_db: 35.0,
            groups: vec![vec![0, 1, 2]],
            duration: Duration::from_secs(10),
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn with_kind(&self, kind: ScenarioKind) -> Self {
        Self { kind, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Keeps the first `size` users of every group.
    pub fn with_group_size(&self, size: usize) -> Self {
        let groups = self.groups.iter().map(|g| g[..size.min(g.len())].to_vec()).collect();
        Self { groups, ..self.clone() }
    }

    pub fn group(&self) -> &[usize] {
        &self.groups[0]
    }

    pub fn schedule(&self) -> DopplerSchedule {
        match self.kind {
            ScenarioKind::LowDoppler => DopplerSchedule::Constant(self.doppler_low_hz),
            ScenarioKind::HighDoppler => DopplerSchedule::Constant(self.doppler_high_hz),
            ScenarioKind::Alternating => DopplerSchedule::Alternating {
                high_hz: self.doppler_high_hz,
                low_hz: self.doppler_low_hz,
                period: self.alternation_period,
                start_high: self.alternation_starts_high,
            },
        }
    }

    /// Every user served in any group, sorted.
    pub fn population(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.groups.iter().flatten().cloned().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn noise_power(&self) -> f64 {
        10f64.powf(-self.mean_snr_db / 10.0)
    }

    pub fn validate(&self, num_tx: usize) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidScenario(m));
        if self.groups.is_empty() {
            return bad("no group configured".into());
        }
        for g in &self.groups {
            if g.is_empty() || g.len() > num_tx {
                return bad(format!("group size {} outside 1..={num_tx}", g.len()));
            }
            let mut s = g.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != g.len() {
                return bad(format!("group {g:?} repeats a user"));
            }
        }
        if self.duration.is_zero() {
            return bad("duration must be positive".into());
        }
        if !self.mean_snr_db.is_finite() {
            return bad("mean SNR must be finite".into());
        }
        if self.kind == ScenarioKind::Alternating && self.alternation_period.is_zero() {
            return bad("alternation period must be positive".into());
        }
        Ok(())
    }
}

/// PHY, MAC, and propagation parameters shared by every session.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub channel: ChannelModel,
    pub ofdm: OfdmConfig,
    pub ampdu: AmpduConfig,
    pub mcs: McsTable,
    /// Percentile of per-subcarrier SINR used for MCS selection.
    pub mcs_percentile: f64,
    pub mac: MacTimingConfig,
    pub max_condition: f64,
}

impl LinkConfig {
    /// Defaults with `num_subcarriers` simulated subcarriers sampling the
    /// 108-tone data band.
    pub fn with_subcarriers(num_subcarriers: usize) -> Self {
        let ofdm = OfdmConfig::default();
        Self {
            channel: ChannelModel {
                pdp: PowerDelayProfile::exponential(5, 3.0, 50e-9).expect("valid default profile"),
                num_tx: 4,
                subcarrier_freqs: subcarrier_frequencies(num_subcarriers, ofdm.data_subcarriers as usize, 312.5e3),
                dt: Duration::from_millis(1),
            },
            ofdm,
            ampdu: AmpduConfig::default(),
            mcs: McsTable::default(),
            mcs_percentile: 0.1,
            mac: MacTimingConfig::default(),
            max_condition: DEFAULT_MAX_CONDITION,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.channel.validate()?;
        self.ofdm.validate()?;
        self.ampdu.validate()?;
        self.mac.validate()?;
        if !(0.0..=1.0).contains(&self.mcs_percentile) {
            return Err(EngineError::InvalidScenario(format!(
                "MCS percentile {} outside [0, 1]",
                self.mcs_percentile
            )));
        }
        Ok(())
    }
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self::with_subcarriers(16)
    }
}

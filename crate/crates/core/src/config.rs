//! Run configuration file: TOML with one section per module.
//!
//! Only `scenario.kind`, `scenario.duration_s` and `run.seeds` are required;
//! every other key falls back to the library defaults. Unknown keys are
//! rejected so typos cannot silently fall back to a default.

use std::path::Path;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::channel::{subcarrier_frequencies, ChannelModel, PowerDelayProfile};
use crate::engine::{LinkConfig, ScenarioConfig, ScenarioKind};
use crate::mac_timing::{CbfFormat, CbfTiming, MacTimingConfig};
use crate::mimo::DEFAULT_MAX_CONDITION;
use crate::phy::{AmpduConfig, McsEntry, McsTable, OfdmConfig};
use crate::strategy::Strategy;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{key}: {message}")]
    Parse { key: String, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    /// Dotted path of the offending key.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Io { .. } => None,
            ConfigError::Parse { key, .. } | ConfigError::Invalid { key, .. } => Some(key),
        }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub mimo: MimoSection,
    #[serde(default)]
    pub phy: PhySection,
    #[serde(default)]
    pub mac: MacSection,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub strategy: StrategySection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub compare: CompareSection,
    pub run: RunSection,
    #[serde(default)]
    pub trace: TraceSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub num_tx: usize,
    /// Station population written by `trace-gen`.
    pub num_users: usize,
    pub num_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub num_taps: usize,
    pub decay_db_per_tap: f64,
    pub tap_spacing_ns: f64,
    pub dt_us: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            num_tx: 4,
            num_users: 12,
            num_subcarriers: 16,
            subcarrier_spacing_hz: 312.5e3,
            num_taps: 5,
            decay_db_per_tap: 3.0,
            tap_spacing_ns: 50.0,
            dt_us: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MimoSection {
    pub zf_max_condition: f64,
}

impl Default for MimoSection {
    fn default() -> Self {
        Self { zf_max_condition: DEFAULT_MAX_CONDITION }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhySection {
    pub data_subcarriers: u32,
    pub fft_duration_ns: u64,
    pub guard_interval_ns: u64,
    pub bandwidth_hz: f64,
    pub mcs_sinr_percentile: f64,
    pub ampdu_max_duration_us: f64,
    pub mpdu_bits: u64,
    pub msdu_bits: u64,
    pub mcs: Vec<McsEntry>,
}

impl Default for PhySection {
    fn default() -> Self {
        let ofdm = OfdmConfig::default();
        let ampdu = AmpduConfig::default();
        Self {
            data_subcarriers: ofdm.data_subcarriers,
            fft_duration_ns: ofdm.fft_duration.as_nanos() as u64,
            guard_interval_ns: ofdm.guard_interval.as_nanos() as u64,
            bandwidth_hz: ofdm.bandwidth_hz,
            mcs_sinr_percentile: 0.1,
            ampdu_max_duration_us: ampdu.max_duration.as_secs_f64() * 1e6,
            mpdu_bits: ampdu.mpdu_bits,
            msdu_bits: ampdu.msdu_bits,
            mcs: McsTable::default().entries().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacSection {
    pub ndpa_us: f64,
    pub ndp_us: f64,
    pub brp_us: f64,
    pub sifs_us: f64,
    /// Overrides the computed feedback duration when set.
    pub cbf_us: Option<f64>,
    pub cbf_base_bits: u64,
    pub cbf_bits_per_angle_pair: u32,
    pub cbf_grouping: u32,
    pub legacy_rate_bps: u64,
    pub legacy_symbol_us: f64,
}

impl Default for MacSection {
    fn default() -> Self {
        let f = CbfFormat::default();
        let m = MacTimingConfig::default();
        let us = |d: Duration| d.as_secs_f64() * 1e6;
        Self {
            ndpa_us: us(m.ndpa),
            ndp_us: us(m.ndp),
            brp_us: us(m.brp),
            sifs_us: us(m.sifs),
            cbf_us: None,
            cbf_base_bits: f.base_bits,
            cbf_bits_per_angle_pair: f.bits_per_angle_pair,
            cbf_grouping: f.grouping,
            legacy_rate_bps: f.legacy_rate_bps,
            legacy_symbol_us: us(f.legacy_symbol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: String,
    pub duration_s: f64,
    #[serde(default = "defaults::doppler_low")]
    pub doppler_low_hz: f64,
    #[serde(default = "defaults::doppler_high")]
    pub doppler_high_hz: f64,
    #[serde(default = "defaults::alternation_period")]
    pub alternation_period_ms: f64,
    #[serde(default = "defaults::yes")]
    pub alternation_starts_high: bool,
    #[serde(default = "defaults::snr")]
    pub mean_snr_db: f64,
    #[serde(default = "defaults::group")]
    pub group: Vec<usize>,
    /// Extra groups served round-robin after `group`.
    #[serde(default)]
    pub extra_groups: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySection {
    pub kind: String,
    pub interval_ms: f64,
}

impl Default for StrategySection {
    fn default() -> Self {
        Self { kind: "dynamic".into(), interval_ms: 43.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub intervals_ms: Vec<f64>,
    pub group_sizes: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { intervals_ms: DEFAULT_INTERVALS_MS.to_vec(), group_sizes: vec![1, 2, 3] }
    }
}

/// Sounding-interval grid, 2 ms to 400 ms.
pub const DEFAULT_INTERVALS_MS: [f64; 8] = [2.0, 5.0, 10.0, 20.0, 43.0, 100.0, 200.0, 400.0];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    /// Calibrated from the sweep grid when absent.
    pub lda_interval_ms: Option<f64>,
    pub hda_interval_ms: Option<f64>,
    pub scenarios: Vec<String>,
    pub raster_window_ms: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            lda_interval_ms: None,
            hda_interval_ms: None,
            scenarios: vec!["high".into(), "low".into(), "alternating".into()],
            raster_window_ms: 400.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSection {
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for TraceSection {
    fn default() -> Self {
        Self { duration_s: 1.0, seed: 1 }
    }
}

mod defaults {
    use crate::engine::ScenarioConfig;

    pub fn doppler_low() -> f64 {
        ScenarioConfig::default().doppler_low_hz
    }
    pub fn doppler_high() -> f64 {
        ScenarioConfig::default().doppler_high_hz
    }
    pub fn alternation_period() -> f64 {
        ScenarioConfig::default().alternation_period.as_secs_f64() * 1e3
    }
    pub fn snr() -> f64 {
        ScenarioConfig::default().mean_snr_db
    }
    pub fn group() -> Vec<usize> {
        ScenarioConfig::default().groups[0].clone()
    }
    pub fn yes() -> bool {
        true
    }
}

/// Non-negative, finite quantity in `unit_ns` nanoseconds per unit, rounded
/// to the nearest nanosecond.
fn duration(key: &str, value: f64, unit_ns: f64) -> Result<Duration, ConfigError> {
    if !value.is_finite() || value < 0.0 {
        return Err(invalid(key, format!("must be a finite non-negative number, got {value}")));
    }
    Ok(Duration::from_nanos((value * unit_ns).round() as u64))
}

fn positive_duration(key: &str, value: f64, unit_ns: f64) -> Result<Duration, ConfigError> {
    let d = duration(key, value, unit_ns)?;
    if d.is_zero() {
        return Err(invalid(key, "must be positive"));
    }
    Ok(d)
}

const US: f64 = 1e3;
const MS: f64 = 1e6;
const S: f64 = 1e9;

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| ConfigError::Parse { key: ".".into(), message: e.message().to_string() })?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().message().to_string();
            // Missing keys are reported against their parent; name the key itself.
            let key = match message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
                Some(field) if path == "." => field.to_string(),
                Some(field) => format!("{path}.{field}"),
                None => path,
            };
            ConfigError::Parse { key, message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Checks every key against module invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let link = self.link_config()?;
        let scenario = self.scenario()?;
        self.strategy()?;
        self.intervals()?;
        if self.run.seeds.is_empty() {
            return Err(invalid("run.seeds", "at least one seed is required"));
        }
        let mut seen = self.run.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.run.seeds.len() {
            return Err(invalid("run.seeds", "seeds must be distinct"));
        }
        if self.sweep.group_sizes.is_empty() {
            return Err(invalid("sweep.group_sizes", "at least one group size is required"));
        }
        for &g in &self.sweep.group_sizes {
            if g == 0 || g > scenario.group().len() {
                return Err(invalid(
                    "sweep.group_sizes",
                    format!("group size {g} outside 1..={} (size of scenario.group)", scenario.group().len()),
                ));
            }
        }
        for s in &self.compare.scenarios {
            if ScenarioKind::parse(s).is_none() {
                return Err(invalid("compare.scenarios", format!("unknown scenario {s:?}")));
            }
        }
        for (key, v) in [("compare.lda_interval_ms", self.compare.lda_interval_ms), ("compare.hda_interval_ms", self.compare.hda_interval_ms)] {
            if let Some(v) = v {
                positive_duration(key, v, MS)?;
            }
        }
        positive_duration("compare.raster_window_ms", self.compare.raster_window_ms, MS)?;
        positive_duration("trace.duration_s", self.trace.duration_s, S)?;
        if self.channel.num_users == 0 {
            return Err(invalid("channel.num_users", "must be positive"));
        }
        if let Some(&u) = scenario.population().iter().max() {
            if u >= self.channel.num_users {
                return Err(invalid(
                    "scenario.group",
                    format!("user {u} outside the population of {}", self.channel.num_users),
                ));
            }
        }
        link.validate().map_err(|e| invalid("link", e.to_string()))?;
        let min = crate::mac_timing::sounding_duration(scenario.group().len() as u32, &link.mac)
            .map_err(|e| invalid("mac", e.to_string()))?
            + link.ampdu.max_duration;
        if scenario.duration < min {
            return Err(invalid(
                "scenario.duration_s",
                format!("must cover at least one sounding and one AMPDU ({} us)", min.as_micros()),
            ));
        }
        Ok(())
    }

    pub fn link_config(&self) -> Result<LinkConfig, ConfigError> {
        let c = &self.channel;
        if c.num_tx == 0 {
            return Err(invalid("channel.num_tx", "must be positive"));
        }
        if c.num_subcarriers == 0 {
            return Err(invalid("channel.num_subcarriers", "must be positive"));
        }
        if !(c.subcarrier_spacing_hz > 0.0) || !c.subcarrier_spacing_hz.is_finite() {
            return Err(invalid("channel.subcarrier_spacing_hz", "must be positive"));
        }
        let pdp = PowerDelayProfile::exponential(c.num_taps, c.decay_db_per_tap, c.tap_spacing_ns / 1e9)
            .map_err(|e| invalid("channel", e.to_string()))?;
        let p = &self.phy;
        if p.data_subcarriers == 0 {
            return Err(invalid("phy.data_subcarriers", "must be positive"));
        }
        let channel = ChannelModel {
            pdp,
            num_tx: c.num_tx,
            subcarrier_freqs: subcarrier_frequencies(c.num_subcarriers, p.data_subcarriers as usize, c.subcarrier_spacing_hz),
            dt: positive_duration("channel.dt_us", c.dt_us, US)?,
        };
        channel.validate().map_err(|e| invalid("channel", e.to_string()))?;
        let ofdm = OfdmConfig {
            data_subcarriers: p.data_subcarriers,
            fft_duration: Duration::from_nanos(p.fft_duration_ns),
            guard_interval: Duration::from_nanos(p.guard_interval_ns),
            bandwidth_hz: p.bandwidth_hz,
        };
        ofdm.validate().map_err(|e| invalid("phy", e.to_string()))?;
        let ampdu = AmpduConfig {
            max_duration: positive_duration("phy.ampdu_max_duration_us", p.ampdu_max_duration_us, US)?,
            mpdu_bits: p.mpdu_bits,
            msdu_bits: p.msdu_bits,
        };
        ampdu.validate().map_err(|e| invalid("phy", e.to_string()))?;
        let mcs = McsTable::new(p.mcs.clone()).map_err(|e| invalid("phy.mcs", e.to_string()))?;
        if !(0.0..=1.0).contains(&p.mcs_sinr_percentile) {
            return Err(invalid("phy.mcs_sinr_percentile", "must lie in [0, 1]"));
        }
        if !(self.mimo.zf_max_condition >= 1.0) {
            return Err(invalid("mimo.zf_max_condition", "must be at least 1"));
        }
        let m = &self.mac;
        let cbf = match m.cbf_us {
            Some(v) => CbfTiming::Fixed(duration("mac.cbf_us", v, US)?),
            None => CbfTiming::Computed {
                format: CbfFormat {
                    base_bits: m.cbf_base_bits,
                    bits_per_angle_pair: m.cbf_bits_per_angle_pair,
                    grouping: m.cbf_grouping,
                    legacy_rate_bps: m.legacy_rate_bps,
                    legacy_symbol: positive_duration("mac.legacy_symbol_us", m.legacy_symbol_us, US)?,
                },
                num_tx: c.num_tx as u32,
                num_rx: 1,
                subcarriers: p.data_subcarriers,
            },
        };
        let mac = MacTimingConfig {
            ndpa: duration("mac.ndpa_us", m.ndpa_us, US)?,
            ndp: duration("mac.ndp_us", m.ndp_us, US)?,
            brp: duration("mac.brp_us", m.brp_us, US)?,
            sifs: duration("mac.sifs_us", m.sifs_us, US)?,
            cbf,
        };
        mac.validate().map_err(|e| invalid("mac", e.to_string()))?;
        Ok(LinkConfig {
            channel,
            ofdm,
            ampdu,
            mcs,
            mcs_percentile: p.mcs_sinr_percentile,
            mac,
            max_condition: self.mimo.zf_max_condition,
        })
    }

    /// Scenario seeded with the first configured seed.
    pub fn scenario(&self) -> Result<ScenarioConfig, ConfigError> {
        let s = &self.scenario;
        let kind = ScenarioKind::parse(&s.kind)
            .ok_or_else(|| invalid("scenario.kind", format!("expected low, high or alternating, got {:?}", s.kind)))?;
        for (key, v) in [("scenario.doppler_low_hz", s.doppler_low_hz), ("scenario.doppler_high_hz", s.doppler_high_hz)] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(key, "must be a finite non-negative frequency"));
            }
        }
        let mut groups = vec![s.group.clone()];
        groups.extend(s.extra_groups.iter().cloned());
        let sc = ScenarioConfig {
            kind,
            doppler_low_hz: s.doppler_low_hz,
            doppler_high_hz: s.doppler_high_hz,
            alternation_period: positive_duration("scenario.alternation_period_ms", s.alternation_period_ms, MS)?,
            alternation_starts_high: s.alternation_starts_high,
            mean_snr_db: s.mean_snr_db,
            groups,
            duration: positive_duration("scenario.duration_s", s.duration_s, S)?,
            seed: self.run.seeds.first().copied().unwrap_or(1),
        };
        sc.validate(self.channel.num_tx).map_err(|e| invalid("scenario", e.to_string()))?;
        Ok(sc)
    }

    pub fn strategy(&self) -> Result<Strategy, ConfigError> {
        match self.strategy.kind.as_str() {
            "dynamic" => Ok(Strategy::Dynamic),
            "fixed" => Ok(Strategy::Fixed {
                interval: positive_duration("strategy.interval_ms", self.strategy.interval_ms, MS)?,
            }),
            other => Err(invalid("strategy.kind", format!("expected dynamic or fixed, got {other:?}"))),
        }
    }

    /// Sweep grid, sorted and de-duplicated.
    pub fn intervals(&self) -> Result<Vec<Duration>, ConfigError> {
        if self.sweep.intervals_ms.is_empty() {
            return Err(invalid("sweep.intervals_ms", "at least one interval is required"));
        }
        let mut out = self
            .sweep
            .intervals_ms
            .iter()
            .map(|&v| positive_duration("sweep.intervals_ms", v, MS))
            .collect::<Result<Vec<_>, _>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub fn compare_scenarios(&self) -> Vec<ScenarioKind> {
        self.compare.scenarios.iter().filter_map(|s| ScenarioKind::parse(s)).collect()
    }

    pub fn lda_hda_override(&self) -> (Option<Duration>, Option<Duration>) {
        let d = |v: Option<f64>| v.map(|v| Duration::from_nanos((v * MS).round() as u64));
        (d(self.compare.lda_interval_ms), d(self.compare.hda_interval_ms))
    }

    pub fn raster_window(&self) -> Duration {
        Duration::from_nanos((self.compare.raster_window_ms * MS).round() as u64)
    }

    pub fn trace_duration(&self) -> Duration {
        Duration::from_nanos((self.trace.duration_s * S).round() as u64)
    }
}

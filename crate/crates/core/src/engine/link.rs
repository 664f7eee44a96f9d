use std::time::Duration;

use crate::channel::{ChannelSource, FadingField};
use crate::mac_timing::sounding_duration;
use crate::mimo::{
    sinr_mu, sinr_su, svd_steering, zf_precoder, ChannelSnapshot, PowerAllocation, SteeringMatrix,
};
use crate::phy::{ampdu_payload, db, percentile};

use super::{EngineError, LinkConfig, ScenarioConfig};

/// SINR floor written to timelines when a stream receives no signal.
const SINR_FLOOR_DB: f64 = -100.0;

/// Per-user result of one AMPDU.
#[derive(Debug, Clone, PartialEq)]
pub struct UserOutcome {
    pub user: usize,
    pub mcs: Option<u8>,
    /// Effective SINR that drove MCS selection.
    pub sinr_db: f64,
    pub mpdu_count: u64,
    pub goodput_bits: u64,
}

/// The radio side of a session as seen by the sounding controller.
pub trait Link {
    /// Users the next sounding will serve.
    fn next_group_size(&self) -> usize;
    /// Airtime of the next sounding.
    fn sounding_duration(&self) -> Duration;
    /// Captures CSI valid at `at` and rebuilds steering.
    fn sound(&mut self, at: Duration) -> Result<(), EngineError>;
    /// Transmits one AMPDU starting at `start`.
    fn transmit(&mut self, start: Duration) -> Result<Vec<UserOutcome>, EngineError>;
    fn ampdu_duration(&self) -> Duration;
    fn sifs(&self) -> Duration;
}

/// Link driven by a channel source, with ZF (or SVD for one user) steering
/// and genie MCS selection.
pub struct PhysicalLink<C: ChannelSource> {
    channel: C,
    cfg: LinkConfig,
    groups: Vec<Vec<usize>>,
    next_group: usize,
    active: Option<(Vec<usize>, SteeringMatrix)>,
    noise: f64,
}

impl PhysicalLink<FadingField> {
    /// Synthetic fading channel for every user the scenario serves.
    pub fn for_scenario(cfg: &LinkConfig, scenario: &ScenarioConfig) -> Result<Self, EngineError> {
        cfg.validate()?;
        scenario.validate(cfg.channel.num_tx)?;
        let field = FadingField::new(cfg.channel.clone(), scenario.schedule(), &scenario.population(), scenario.seed)?;
        Self::new(field, cfg.clone(), scenario.groups.clone(), scenario.noise_power())
    }
}

impl<C: ChannelSource> PhysicalLink<C> {
    pub fn new(channel: C, cfg: LinkConfig, groups: Vec<Vec<usize>>, noise: f64) -> Result<Self, EngineError> {
        if groups.is_empty() || groups.iter().any(|g| g.is_empty() || g.len() > channel.num_tx()) {
            return Err(EngineError::InvalidScenario("every group needs 1..=num_tx users".into()));
        }
        if channel.num_subcarriers() != cfg.channel.num_subcarriers() {
            return Err(EngineError::InvalidScenario(format!(
                "channel source has {} subcarriers, configuration {}",
                channel.num_subcarriers(),
                cfg.channel.num_subcarriers()
            )));
        }
        Ok(Self { channel, cfg, groups, next_group: 0, active: None, noise })
    }

    pub fn channel(&self) -> &C {
        &self.channel
    }

    fn block(&self, t: Duration) -> u64 {
        (t.as_nanos() / self.channel.dt().as_nanos()) as u64
    }

    fn alloc(&self, streams: usize) -> Result<PowerAllocation, EngineError> {
        Ok(PowerAllocation::equal(1.0, streams, self.noise)?)
    }
}

impl<C: ChannelSource> Link for PhysicalLink<C> {
    fn next_group_size(&self) -> usize {
        self.groups[self.next_group].len()
    }

    fn sounding_duration(&self) -> Duration {
        sounding_duration(self.next_group_size() as u32, &self.cfg.mac).expect("groups are non-empty")
    }

    fn sound(&mut self, at: Duration) -> Result<(), EngineError> {
        let group = self.groups[self.next_group].clone();
        self.next_group = (self.next_group + 1) % self.groups.len();
        let h = self.channel.response(self.block(at), &group)?;
        let snapshot = ChannelSnapshot::new(at.as_secs_f64(), group.clone(), h)?;
        let steering = if group.len() == 1 {
            svd_steering(&snapshot)?
        } else {
            zf_precoder(&snapshot, self.cfg.max_condition)?
        };
        self.active = Some((group, steering));
        Ok(())
    }

    fn transmit(&mut self, start: Duration) -> Result<Vec<UserOutcome>, EngineError> {
        let (group, steering) = self
            .active
            .clone()
            .ok_or_else(|| EngineError::InvalidScenario("transmission before the first sounding".into()))?;
        let mid = start + self.cfg.ampdu.max_duration / 2;
        let h_now = self.channel.response(self.block(mid), &group)?;
        let alloc = self.alloc(steering.num_streams())?;
        let mut out = Vec::with_capacity(group.len());
        for (pos, &user) in group.iter().enumerate() {
            let sinrs: Vec<f64> = if group.len() == 1 {
                h_now
                    .iter()
                    .zip(steering.w())
                    .map(|(h, w)| {
                        let row: Vec<_> = h.row(0).iter().cloned().collect();
                        sinr_su(&row, w, 0, &alloc)
                    })
                    .collect::<Result<_, _>>()?
            } else {
                let stream = steering.streams_of(pos).next().expect("one stream per user");
                sinr_mu(&h_now, &group, &steering, stream, &alloc)?
            };
            let sinr_db: Vec<f64> = sinrs.iter().map(|&g| db(g).max(SINR_FLOOR_DB)).collect();
            let effective = percentile(&sinr_db, self.cfg.mcs_percentile);
            let mcs = self.cfg.mcs.select(effective);
            let payload = ampdu_payload(mcs, &self.cfg.ofdm, &self.cfg.ampdu);
            out.push(UserOutcome {
                user,
                mcs: mcs.map(|m| m.index),
                sinr_db: effective,
                mpdu_count: payload.mpdu_count,
                goodput_bits: payload.goodput_bits,
            });
        }
        Ok(out)
    }

    fn ampdu_duration(&self) -> Duration {
        self.cfg.ampdu.max_duration
    }

    fn sifs(&self) -> Duration {
        self.cfg.mac.sifs
    }
}

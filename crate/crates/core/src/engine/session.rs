use std::fmt::Write as _;
use std::time::Duration;

use crate::channel::DopplerSchedule;
use crate::mimo::MimoError;
use crate::strategy::{AmpduRecord, SoundingDecision, Strategy, StrategyState};

use super::link::{Link, PhysicalLink, UserOutcome};
use super::{EngineError, LinkConfig, ScenarioConfig};

pub const TIMELINE_HEADER: &str = "event,t_start_ns,duration_ns,group_size,user,mcs,sinr_db,mpdu_count,goodput_bits";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    /// Analysis mode: soundings take no airtime.
    pub zero_overhead: bool,
    /// Consecutive failed soundings tolerated before the session aborts.
    pub max_sounding_retries: u32,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { zero_overhead: false, max_sounding_retries: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Sounding { t_start: Duration, duration: Duration, group_size: usize, ok: bool },
    Ampdu { t_start: Duration, duration: Duration, users: Vec<UserOutcome> },
    /// SIFS following an AMPDU.
    Gap { t_start: Duration, duration: Duration },
}

impl Event {
    pub fn t_start(&self) -> Duration {
        match self {
            Event::Sounding { t_start, .. } | Event::Ampdu { t_start, .. } | Event::Gap { t_start, .. } => *t_start,
        }
    }

    pub fn duration(&self) -> Duration {
        match self {
            Event::Sounding { duration, .. } | Event::Ampdu { duration, .. } | Event::Gap { duration, .. } => *duration,
        }
    }
}

/// Ordered record of everything that occupied the air.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionTimeline {
    pub events: Vec<Event>,
    /// Simulated time at session end; equals the sum of event durations.
    pub total_time: Duration,
}

impl SessionTimeline {
    /// Start times of successful soundings.
    pub fn sounding_starts(&self) -> Vec<Duration> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Sounding { t_start, ok: true, .. } => Some(*t_start),
                _ => None,
            })
            .collect()
    }

    /// Timeline CSV; sounding rows leave the per-user columns empty, AMPDUs
    /// write one row per user, and SIFS gaps are implied by the next start.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * self.events.len() + 128);
        s.push_str(TIMELINE_HEADER);
        s.push('\n');
        for e in &self.events {
            match e {
                Event::Sounding { t_start, duration, group_size, ok } => {
                    let name = if *ok { "sounding" } else { "sounding_failed" };
                    let _ = writeln!(s, "{name},{},{},{group_size},,,,,", t_start.as_nanos(), duration.as_nanos());
                }
                Event::Gap { .. } => {}
                Event::Ampdu { t_start, duration, users } => {
                    for u in users {
                        let mcs = u.mcs.map(|m| m.to_string()).unwrap_or_default();
                        let _ = writeln!(
                            s,
                            "ampdu,{},{},{},{},{mcs},{},{},{}",
                            t_start.as_nanos(),
                            duration.as_nanos(),
                            users.len(),
                            u.user,
                            u.sinr_db,
                            u.mpdu_count,
                            u.goodput_bits
                        );
                    }
                }
            }
        }
        s
    }
}

/// Sounding-interval statistics split by Doppler segment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SegmentBreakdown {
    pub high_mean_interval_s: Option<f64>,
    pub low_mean_interval_s: Option<f64>,
    pub high_intervals: usize,
    pub low_intervals: usize,
}

impl SegmentBreakdown {
    /// Each interval between consecutive soundings is attributed to the
    /// segment containing its opening sounding's start.
    pub fn from_starts(starts: &[Duration], schedule: &DopplerSchedule) -> Self {
        let (mut hs, mut hn, mut ls, mut ln) = (0.0, 0, 0.0, 0);
        for w in starts.windows(2) {
            let gap = (w[1] - w[0]).as_secs_f64();
            if schedule.is_high_at(w[0]) {
                hs += gap;
                hn += 1;
            } else {
                ls += gap;
                ln += 1;
            }
        }
        Self {
            high_mean_interval_s: (hn > 0).then(|| hs / hn as f64),
            low_mean_interval_s: (ln > 0).then(|| ls / ln as f64),
            high_intervals: hn,
            low_intervals: ln,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub group_size: usize,
    pub sounding_duration: Duration,
    pub total_time: Duration,
    pub ampdu_time: Duration,
    pub goodput_bits: u64,
    /// Goodput over AMPDU airtime.
    pub phy_throughput_bps: f64,
    /// Goodput over total time, soundings included.
    pub mac_throughput_bps: f64,
    pub num_soundings: usize,
    pub num_failed_soundings: usize,
    pub mean_sounding_interval_s: Option<f64>,
    /// Mean effective per-user SINR over all AMPDUs.
    pub mean_sinr_db: f64,
    pub segments: Option<SegmentBreakdown>,
}

impl RunSummary {
    pub fn from_timeline(timeline: &SessionTimeline, sounding_duration: Duration, schedule: Option<&DopplerSchedule>) -> Self {
        let mut ampdu_time = Duration::ZERO;
        let mut goodput = 0u64;
        let mut sinr_sum = 0.0;
        let mut sinr_n = 0usize;
        let mut failed = 0;
        let mut group_size = 0;
        for e in &timeline.events {
            match e {
                Event::Ampdu { duration, users, .. } => {
                    ampdu_time += *duration;
                    for u in users {
                        goodput += u.goodput_bits;
                        sinr_sum += u.sinr_db;
                        sinr_n += 1;
                    }
                }
                Event::Sounding { ok, group_size: g, .. } => {
                    if !ok {
                        failed += 1;
                    }
                    group_size = group_size.max(*g);
                }
                Event::Gap { .. } => {}
            }
        }
        let starts = timeline.sounding_starts();
        let mean_interval = (starts.len() > 1)
            .then(|| (starts[starts.len() - 1] - starts[0]).as_secs_f64() / (starts.len() - 1) as f64);
        let ratio = |bits: u64, t: Duration| if t.is_zero() { 0.0 } else { bits as f64 / t.as_secs_f64() };
        Self {
            group_size,
            sounding_duration,
            total_time: timeline.total_time,
            ampdu_time,
            goodput_bits: goodput,
            phy_throughput_bps: ratio(goodput, ampdu_time),
            mac_throughput_bps: ratio(goodput, timeline.total_time),
            num_soundings: starts.len(),
            num_failed_soundings: failed,
            mean_sounding_interval_s: mean_interval,
            mean_sinr_db: if sinr_n == 0 { f64::NAN } else { sinr_sum / sinr_n as f64 },
            segments: match schedule {
                Some(s @ DopplerSchedule::Alternating { .. }) => Some(SegmentBreakdown::from_starts(&starts, s)),
                _ => None,
            },
        }
    }
}

/// Runs the sounding controller against any link until `duration` elapses.
/// The last event may end past `duration`.
pub fn run_link<L: Link>(
    link: &mut L,
    strategy: Strategy,
    duration: Duration,
    opts: EngineOptions,
) -> Result<SessionTimeline, EngineError> {
    let mut state = StrategyState::new();
    let mut timeline = SessionTimeline::default();
    let mut t = Duration::ZERO;
    let mut retries = 0u32;
    while t < duration {
        if state.sound_needed {
            let d = if opts.zero_overhead { Duration::ZERO } else { link.sounding_duration() };
            let group_size = link.next_group_size();
            match link.sound(t + d) {
                Ok(()) => {
                    timeline.events.push(Event::Sounding { t_start: t, duration: d, group_size, ok: true });
                    state.record_sounding(t, d);
                    state.sound_needed = false;
                    retries = 0;
                }
                Err(EngineError::Mimo(e @ MimoError::Singular { .. })) => {
                    timeline.events.push(Event::Sounding { t_start: t, duration: d, group_size, ok: false });
                    retries += 1;
                    if retries > opts.max_sounding_retries {
                        return Err(EngineError::PersistentSingularity { attempts: retries, at_ns: t.as_nanos(), last: e });
                    }
                }
                Err(e) => return Err(e),
            }
            t += d;
            continue;
        }
        let start = t;
        let users = link.transmit(start)?;
        let ampdu = link.ampdu_duration();
        let record = AmpduRecord { goodput_bits: users.iter().map(|u| u.goodput_bits).collect(), duration: ampdu };
        timeline.events.push(Event::Ampdu { t_start: start, duration: ampdu, users });
        t += ampdu;
        let sifs = link.sifs();
        if !sifs.is_zero() {
            timeline.events.push(Event::Gap { t_start: t, duration: sifs });
            t += sifs;
        }
        if strategy.after_ampdu(&mut state, &record, t) == SoundingDecision::Sound {
            state.sound_needed = true;
        }
    }
    timeline.total_time = t;
    Ok(timeline)
}

/// One seeded session on the synthetic fading channel.
pub fn run_session(
    cfg: &LinkConfig,
    scenario: &ScenarioConfig,
    strategy: Strategy,
    opts: EngineOptions,
) -> Result<(SessionTimeline, RunSummary), EngineError> {
    let mut link = PhysicalLink::for_scenario(cfg, scenario)?;
    let sounding = link.sounding_duration();
    let timeline = run_link(&mut link, strategy, scenario.duration, opts)?;
    let schedule = scenario.schedule();
    let summary = RunSummary::from_timeline(&timeline, if opts.zero_overhead { Duration::ZERO } else { sounding }, Some(&schedule));
    Ok((timeline, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ScenarioKind;

    fn short(kind: ScenarioKind, group: usize, ms: u64) -> (LinkConfig, ScenarioConfig) {
        let mut sc = ScenarioConfig::default().with_kind(kind).with_group_size(group);
        sc.duration = Duration::from_millis(ms);
        (LinkConfig::with_subcarriers(8), sc)
    }

    #[test]
    fn static_channel_sounds_once() {
        let (cfg, mut sc) = short(ScenarioKind::LowDoppler, 3, 1000);
        sc.doppler_low_hz = 0.0;
        let (tl, s) = run_session(&cfg, &sc, Strategy::Dynamic, EngineOptions::default()).unwrap();
        assert_eq!(s.num_soundings, 1);
        assert_eq!(tl.sounding_starts(), vec![Duration::ZERO]);
    }

    #[test]
    fn fixed_43ms_slotting() {
        let (cfg, sc) = short(ScenarioKind::HighDoppler, 3, 400);
        let strategy = Strategy::Fixed { interval: Duration::from_millis(43) };
        let (tl, s) = run_session(&cfg, &sc, strategy, EngineOptions::default()).unwrap();
        // 856 us sounding then 2016 us AMPDU+SIFS slots until 43 ms elapse: 21 slots.
        let cycle = Duration::from_micros(856 + 21 * 2016);
        let starts = tl.sounding_starts();
        assert_eq!(starts.len(), 10);
        for (k, t) in starts.iter().enumerate() {
            assert_eq!(*t, cycle * k as u32);
        }
        assert_eq!(s.total_time, Duration::from_micros(9 * 43_192 + 856 + 6 * 2016));
        assert_eq!(s.sounding_duration, Duration::from_micros(856));
    }

    #[test]
    fn su_uses_su_duration() {
        let (cfg, sc) = short(ScenarioKind::LowDoppler, 1, 50);
        let (tl, _) = run_session(&cfg, &sc, Strategy::Dynamic, EngineOptions::default()).unwrap();
        assert_eq!(tl.events[0].duration(), Duration::from_micros(336));
    }

    #[test]
    fn time_is_conserved() {
        let (cfg, sc) = short(ScenarioKind::Alternating, 2, 300);
        let (tl, s) = run_session(&cfg, &sc, Strategy::Dynamic, EngineOptions::default()).unwrap();
        let mut t = Duration::ZERO;
        for e in &tl.events {
            assert_eq!(e.t_start(), t);
            t += e.duration();
        }
        assert_eq!(t, tl.total_time);
        assert!(s.segments.is_some());
        assert!(s.phy_throughput_bps >= s.mac_throughput_bps);
    }

    #[test]
    fn zero_overhead_soundings_take_no_time() {
        let (cfg, sc) = short(ScenarioKind::HighDoppler, 3, 100);
        let opts = EngineOptions { zero_overhead: true, ..EngineOptions::default() };
        let (tl, s) = run_session(&cfg, &sc, Strategy::Fixed { interval: Duration::from_millis(10) }, opts).unwrap();
        assert!(tl.events.iter().all(|e| !matches!(e, Event::Sounding { duration, .. } if !duration.is_zero())));
        assert_eq!(s.ampdu_time + Duration::from_micros(16) * (s.ampdu_time.as_micros() / 2000) as u32, s.total_time);
    }
}

use std::time::Duration;

use rayon::prelude::*;

use crate::channel::{ChannelSource, FadingField};
use crate::mimo::{sinr_mu, sinr_su, svd_steering, zf_precoder, ChannelSnapshot, PowerAllocation};
use crate::phy::db;
use crate::strategy::Strategy;

use super::session::{run_session, EngineOptions, RunSummary};
use super::{EngineError, LinkConfig, ScenarioConfig, ScenarioKind};

/// Seed-averaged result of one (group size, interval) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: ScenarioKind,
    pub group_size: usize,
    pub interval: Duration,
    pub sounding_duration: Duration,
    pub seeds: usize,
    pub phy_throughput_bps: f64,
    pub mac_throughput_bps: f64,
    pub mean_sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub group_size: usize,
    pub interval: Duration,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Every successful run as (group size, interval, seed, summary).
    pub runs: Vec<(usize, Duration, u64, RunSummary)>,
    pub failures: Vec<CellFailure>,
}

impl SweepResult {
    /// Interval with the highest MAC throughput for `group_size`; ties go to
    /// the smaller interval.
    pub fn best_interval(&self, group_size: usize) -> Option<Duration> {
        let mut best: Option<&SweepRow> = None;
        for r in self.rows.iter().filter(|r| r.group_size == group_size) {
            match best {
                Some(b) if r.mac_throughput_bps > b.mac_throughput_bps
                    || (r.mac_throughput_bps == b.mac_throughput_bps && r.interval < b.interval) => best = Some(r),
                None => best = Some(r),
                _ => {}
            }
        }
        best.map(|r| r.interval)
    }
}

/// Fixed-interval sessions for every (group size, interval, seed), averaged
/// over seeds. Failed cells are reported, not fatal.
pub fn sweep_intervals(
    cfg: &LinkConfig,
    scenario: &ScenarioConfig,
    group_sizes: &[usize],
    intervals: &[Duration],
    seeds: &[u64],
    opts: EngineOptions,
) -> SweepResult {
    let cells: Vec<(usize, Duration, u64)> = group_sizes
        .iter()
        .flat_map(|&g| intervals.iter().flat_map(move |&i| seeds.iter().map(move |&s| (g, i, s))))
        .collect();
    let mut results: Vec<_> = cells
        .par_iter()
        .map(|&(g, interval, seed)| {
            let sc = scenario.with_group_size(g).with_seed(seed);
            let r = run_session(cfg, &sc, Strategy::Fixed { interval }, opts).map(|(_, s)| s);
            (g, interval, seed, r)
        })
        .collect();
    results.sort_by_key(|(g, i, s, _)| (*g, *i, *s));

    let mut out = SweepResult::default();
    for (g, interval, seed, r) in results {
        match r {
            Ok(s) => out.runs.push((g, interval, seed, s)),
            Err(e) => out.failures.push(CellFailure { group_size: g, interval, seed, message: e.to_string() }),
        }
    }
    let mut gs = group_sizes.to_vec();
    gs.sort_unstable();
    gs.dedup();
    let mut ivs = intervals.to_vec();
    ivs.sort_unstable();
    ivs.dedup();
    for &g in &gs {
        for &interval in &ivs {
            let cell: Vec<&RunSummary> =
                out.runs.iter().filter(|(rg, ri, _, _)| *rg == g && *ri == interval).map(|(_, _, _, s)| s).collect();
            if cell.is_empty() {
                continue;
            }
            let n = cell.len() as f64;
            out.rows.push(SweepRow {
                scenario: scenario.kind,
                group_size: g,
                interval,
                sounding_duration: cell[0].sounding_duration,
                seeds: cell.len(),
                phy_throughput_bps: cell.iter().map(|s| s.phy_throughput_bps).sum::<f64>() / n,
                mac_throughput_bps: cell.iter().map(|s| s.mac_throughput_bps).sum::<f64>() / n,
                mean_sinr_db: cell.iter().map(|s| s.mean_sinr_db).sum::<f64>() / n,
            });
        }
    }
    out
}

/// Optimal fixed intervals for the low- and high-Doppler versions of
/// `scenario`, served with its configured group.
pub fn calibrate_lda_hda(
    cfg: &LinkConfig,
    scenario: &ScenarioConfig,
    intervals: &[Duration],
    seeds: &[u64],
    opts: EngineOptions,
) -> Result<(Duration, Duration, SweepResult, SweepResult), EngineError> {
    let g = scenario.group().len();
    let low = sweep_intervals(cfg, &scenario.with_kind(ScenarioKind::LowDoppler), &[g], intervals, seeds, opts);
    let high = sweep_intervals(cfg, &scenario.with_kind(ScenarioKind::HighDoppler), &[g], intervals, seeds, opts);
    let pick = |r: &SweepResult| {
        r.best_interval(g).ok_or_else(|| {
            EngineError::InvalidScenario(format!(
                "no interval completed: {}",
                r.failures.first().map(|f| f.message.as_str()).unwrap_or("empty grid")
            ))
        })
    };
    Ok((pick(&low)?, pick(&high)?, low, high))
}

/// `(R_x - R_y) / R_y`.
pub fn improvement(r_x: f64, r_y: f64) -> f64 {
    (r_x - r_y) / r_y
}

#[derive(Debug, Clone)]
pub struct StrategyOutcome {
    pub name: String,
    pub strategy: Strategy,
    pub mean_mac_throughput_bps: f64,
    pub mean_phy_throughput_bps: f64,
    pub runs: Vec<(u64, RunSummary)>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub scenario: ScenarioKind,
    pub outcomes: Vec<StrategyOutcome>,
    /// Seeds for which every strategy completed.
    pub seeds: Vec<u64>,
}

impl Comparison {
    /// Improvement of strategy `x` over `y` on seed-averaged MAC throughput.
    pub fn improvement(&self, x: usize, y: usize) -> f64 {
        improvement(self.outcomes[x].mean_mac_throughput_bps, self.outcomes[y].mean_mac_throughput_bps)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o.name == name)
    }
}

/// Runs each named strategy on the same seeds (common random numbers).
pub fn compare_strategies(
    cfg: &LinkConfig,
    scenario: &ScenarioConfig,
    strategies: &[(String, Strategy)],
    seeds: &[u64],
    opts: EngineOptions,
) -> Result<Comparison, EngineError> {
    let cells: Vec<(usize, u64)> =
        (0..strategies.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(i, seed)| {
            let r = run_session(cfg, &scenario.with_seed(seed), strategies[i].1, opts).map(|(_, s)| s);
            (i, seed, r)
        })
        .collect();
    let complete: Vec<u64> = seeds
        .iter()
        .cloned()
        .filter(|s| results.iter().filter(|(_, rs, _)| rs == s).all(|(_, _, r)| r.is_ok()))
        .collect();
    if complete.is_empty() {
        let err = results.into_iter().find_map(|(_, _, r)| r.err());
        return Err(err.unwrap_or_else(|| EngineError::InvalidScenario("no seeds supplied".into())));
    }
    let mut outcomes = Vec::with_capacity(strategies.len());
    for (i, (name, strategy)) in strategies.iter().enumerate() {
        let mut runs: Vec<(u64, RunSummary)> = results
            .iter()
            .filter(|(ri, s, _)| *ri == i && complete.contains(s))
            .map(|(_, s, r)| (*s, r.as_ref().expect("complete seed").clone()))
            .collect();
        runs.sort_by_key(|(s, _)| *s);
        let n = runs.len() as f64;
        outcomes.push(StrategyOutcome {
            name: name.clone(),
            strategy: *strategy,
            mean_mac_throughput_bps: runs.iter().map(|(_, r)| r.mac_throughput_bps).sum::<f64>() / n,
            mean_phy_throughput_bps: runs.iter().map(|(_, r)| r.phy_throughput_bps).sum::<f64>() / n,
            runs,
        });
    }
    Ok(Comparison { scenario: scenario.kind, outcomes, seeds: complete })
}

/// Mean per-subcarrier SINR (dB) over users, subcarriers, and snapshots as a
/// function of CSI age. Snapshots are taken back to back, each aged through
/// every entry of `ages` before the next one is captured.
pub fn sinr_vs_age(
    cfg: &LinkConfig,
    scenario: &ScenarioConfig,
    ages: &[Duration],
) -> Result<Vec<f64>, EngineError> {
    cfg.validate()?;
    scenario.validate(cfg.channel.num_tx)?;
    let group = scenario.group().to_vec();
    let mut field = FadingField::new(cfg.channel.clone(), scenario.schedule(), &group, scenario.seed)?;
    let dt = cfg.channel.dt.as_nanos();
    let mut order: Vec<usize> = (0..ages.len()).collect();
    order.sort_by_key(|&i| ages[i]);
    let max_age = ages.iter().max().cloned().unwrap_or_default();
    let span = (max_age.as_nanos() / dt) as u64 + 1;
    let blocks = (scenario.duration.as_nanos() / dt) as u64;
    let alloc = PowerAllocation::equal(1.0, group.len(), scenario.noise_power())?;

    let mut sums = vec![0.0; ages.len()];
    let mut counts = vec![0usize; ages.len()];
    let mut b0 = 0u64;
    while b0 + span <= blocks.max(span) {
        let h0 = field.response(b0, &group)?;
        let snap = ChannelSnapshot::new(b0 as f64 * cfg.channel.dt.as_secs_f64(), group.clone(), h0)?;
        let steering = if group.len() == 1 { svd_steering(&snap)? } else { zf_precoder(&snap, cfg.max_condition)? };
        for &i in &order {
            let b = b0 + (ages[i].as_nanos() / dt) as u64;
            let h = field.response(b, &group)?;
            for pos in 0..group.len() {
                let sinrs = if group.len() == 1 {
                    h.iter()
                        .zip(steering.w())
                        .map(|(m, w)| sinr_su(&m.row(0).iter().cloned().collect::<Vec<_>>(), w, 0, &alloc))
                        .collect::<Result<Vec<_>, _>>()?
                } else {
                    sinr_mu(&h, &group, &steering, pos, &alloc)?
                };
                for g in sinrs {
                    sums[i] += db(g).max(-100.0);
                    counts[i] += 1;
                }
            }
        }
        b0 += span;
        if b0 + span > blocks {
            break;
        }
    }
    Ok(sums.iter().zip(&counts).map(|(s, &n)| s / n.max(1) as f64).collect())
}

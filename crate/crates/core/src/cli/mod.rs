//! Command front end: `sweep`, `run`, `compare`, and `trace-gen`.
//!
//! Each command reads a [`RunConfig`], runs sessions on a bounded thread
//! pool, and writes CSV results plus SVG views of the same numbers.

pub mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use crate::channel::{generate_trace, ChannelError};
use crate::config::{ConfigError, RunConfig};
use crate::engine::{
    calibrate_lda_hda, compare_strategies, improvement, run_session, sweep_intervals, EngineError, EngineOptions,
    Event, RunSummary, ScenarioKind, SweepRow,
};
use crate::strategy::Strategy;

use svg::Series;

pub const SWEEP_HEADER: &str =
    "scenario,group_size,interval_ns,sounding_duration_ns,num_seeds,phy_throughput_bps,mac_throughput_bps,mean_sinr_db";
pub const SUMMARY_HEADER: &str = "scenario,strategy,group_size,seed,sounding_duration_ns,total_time_ns,ampdu_time_ns,goodput_bits,phy_throughput_bps,mac_throughput_bps,num_soundings,num_failed_soundings,mean_sounding_interval_s,mean_sinr_db,high_mean_interval_s,low_mean_interval_s";
pub const EVENTS_HEADER: &str = "scenario,strategy,seed,t_start_ns,duration_ns,segment";
pub const IMPROVEMENT_HEADER: &str = "scenario,x,y,r_x_bps,r_y_bps,improvement";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl CliError {
    /// 2 for configuration problems, 1 for anything that failed at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    Run,
    Compare,
    TraceGen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliOptions {
    pub config: PathBuf,
    /// Output directory, or the trace file for `trace-gen`.
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub seed_override: Option<Vec<u64>>,
}

/// Files written by a command and how many cells failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failed_cells: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failed_cells == 0 {
            0
        } else {
            1
        }
    }
}

pub fn load_config(path: &Path, seed_override: Option<&[u64]>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(seeds) = seed_override {
        cfg.run.seeds = seeds.to_vec();
        cfg.validate()?;
    }
    Ok(cfg)
}

/// Runs `command` and returns the process exit code, reporting to stderr.
pub fn execute(command: Command, opts: &CliOptions) -> i32 {
    match try_execute(command, opts) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.failed_cells > 0 {
                eprintln!("{} cell(s) failed; see warnings.txt", outcome.failed_cells);
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn try_execute(command: Command, opts: &CliOptions) -> Result<Outcome, CliError> {
    let cfg = load_config(&opts.config, opts.seed_override.as_deref())?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    pool.install(|| match command {
        Command::Sweep => cmd_sweep(&cfg, &opts.out),
        Command::Run => cmd_run(&cfg, &opts.out),
        Command::Compare => cmd_compare(&cfg, &opts.out),
        Command::TraceGen => cmd_trace_gen(&cfg, &opts.out),
    })
}

fn write_file(path: &Path, contents: &str, outcome: &mut Outcome) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    outcome.files.push(path.to_path_buf());
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn summary_row(scenario: ScenarioKind, strategy: &str, seed: u64, s: &RunSummary) -> String {
    let seg = s.segments.unwrap_or_default();
    format!(
        "{},{strategy},{},{seed},{},{},{},{},{},{},{},{},{},{},{},{}",
        scenario.label(),
        s.group_size,
        s.sounding_duration.as_nanos(),
        s.total_time.as_nanos(),
        s.ampdu_time.as_nanos(),
        s.goodput_bits,
        s.phy_throughput_bps,
        s.mac_throughput_bps,
        s.num_soundings,
        s.num_failed_soundings,
        opt(s.mean_sounding_interval_s),
        s.mean_sinr_db,
        opt(s.segments.and(seg.high_mean_interval_s)),
        opt(s.segments.and(seg.low_mean_interval_s)),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.scenario.label(),
            r.group_size,
            r.interval.as_nanos(),
            r.sounding_duration.as_nanos(),
            r.seeds,
            r.phy_throughput_bps,
            r.mac_throughput_bps,
            r.mean_sinr_db
        );
    }
    csv
}

/// Fixed-interval sweep of the configured scenario: `sweep.csv`,
/// `summary.csv`, and SINR/PHY/MAC-vs-interval charts.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let link = cfg.link_config()?;
    let scenario = cfg.scenario()?;
    let intervals = cfg.intervals()?;
    let mut sizes = cfg.sweep.group_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let result = sweep_intervals(&link, &scenario, &sizes, &intervals, &cfg.run.seeds, EngineOptions::default());

    let mut outcome = Outcome { failed_cells: result.failures.len(), ..Outcome::default() };
    write_file(&out.join("sweep.csv"), &sweep_csv(&result.rows), &mut outcome)?;

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for (_, interval, seed, s) in &result.runs {
        summary.push_str(&summary_row(scenario.kind, &Strategy::Fixed { interval: *interval }.to_string(), *seed, s));
        summary.push('\n');
    }
    write_file(&out.join("summary.csv"), &summary, &mut outcome)?;

    let label = |g: usize| if g == 1 { "SU-TxBF".to_string() } else { format!("MU{g}") };
    let series = |f: fn(&SweepRow) -> f64| -> Vec<Series> {
        sizes
            .iter()
            .map(|&g| Series {
                name: label(g),
                points: result
                    .rows
                    .iter()
                    .filter(|r| r.group_size == g)
                    .map(|r| (r.interval.as_secs_f64() * 1e3, f(r)))
                    .collect(),
            })
            .collect()
    };
    let title = |what: &str| format!("{what} vs sounding interval ({} Doppler)", scenario.kind.label());
    let x = "sounding interval (ms)";
    for (name, chart) in [
        ("sweep_sinr.svg", svg::line_chart(&title("SINR"), x, "mean SINR (dB)", true, &series(|r| r.mean_sinr_db))),
        (
            "sweep_phy.svg",
            svg::line_chart(&title("PHY throughput"), x, "PHY throughput (Mbit/s)", true, &series(|r| r.phy_throughput_bps / 1e6)),
        ),
        (
            "sweep_mac.svg",
            svg::line_chart(&title("MAC throughput"), x, "MAC throughput (Mbit/s)", true, &series(|r| r.mac_throughput_bps / 1e6)),
        ),
    ] {
        write_file(&out.join(name), &chart, &mut outcome)?;
    }
    write_warnings(out, result.failures.iter().map(|f| {
        format!("group {} interval {} ns seed {}: {}", f.group_size, f.interval.as_nanos(), f.seed, f.message)
    }), &mut outcome)?;
    Ok(outcome)
}

fn write_warnings(out: &Path, lines: impl Iterator<Item = String>, outcome: &mut Outcome) -> Result<(), CliError> {
    let text: String = lines.map(|l| l + "\n").collect();
    if !text.is_empty() {
        write_file(&out.join("warnings.txt"), &text, outcome)?;
    }
    Ok(())
}

/// One session with the configured strategy and the first seed:
/// `timeline.csv` and `summary.csv`.
pub fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let link = cfg.link_config()?;
    let scenario = cfg.scenario()?;
    let strategy = cfg.strategy()?;
    let (timeline, summary) = run_session(&link, &scenario, strategy, EngineOptions::default())?;
    let mut outcome = Outcome::default();
    write_file(&out.join("timeline.csv"), &timeline.to_csv(), &mut outcome)?;
    let text = format!("{SUMMARY_HEADER}\n{}\n", summary_row(scenario.kind, &strategy.to_string(), scenario.seed, &summary));
    write_file(&out.join("summary.csv"), &text, &mut outcome)?;
    Ok(outcome)
}

/// Dynamic sounding against the LDA and HDA fixed baselines:
/// `improvement.csv`, `events.csv`, `summary.csv`, `calibration.csv` when
/// the baselines were derived, and the raster and bar charts.
pub fn cmd_compare(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let link = cfg.link_config()?;
    let base = cfg.scenario()?;
    let opts = EngineOptions::default();
    let seeds = &cfg.run.seeds;
    let mut outcome = Outcome::default();

    let (lda, hda) = match cfg.lda_hda_override() {
        (Some(l), Some(h)) => (l, h),
        (l, h) => {
            let intervals = cfg.intervals()?;
            let (cl, ch, low, high) = calibrate_lda_hda(&link, &base, &intervals, seeds, opts)?;
            let rows: Vec<SweepRow> = low.rows.iter().chain(&high.rows).cloned().collect();
            write_file(&out.join("calibration.csv"), &sweep_csv(&rows), &mut outcome)?;
            outcome.failed_cells += low.failures.len() + high.failures.len();
            (l.unwrap_or(cl), h.unwrap_or(ch))
        }
    };
    let strategies = vec![
        ("dynamic".to_string(), Strategy::Dynamic),
        ("lda".to_string(), Strategy::Fixed { interval: lda }),
        ("hda".to_string(), Strategy::Fixed { interval: hda }),
    ];

    let mut improvement_csv = String::from(IMPROVEMENT_HEADER);
    improvement_csv.push('\n');
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    let mut bars = Vec::new();
    let kinds = cfg.compare_scenarios();
    let mut warnings = Vec::new();
    for &kind in &kinds {
        let cmp = compare_strategies(&link, &base.with_kind(kind), &strategies, seeds, opts)?;
        if cmp.seeds.len() < seeds.len() {
            let missing = seeds.len() - cmp.seeds.len();
            outcome.failed_cells += missing;
            warnings.push(format!("{}: {missing} seed(s) dropped after a failed session", kind.label()));
        }
        for x in &cmp.outcomes {
            for y in &cmp.outcomes {
                let _ = writeln!(
                    improvement_csv,
                    "{},{},{},{},{},{}",
                    kind.label(),
                    x.name,
                    y.name,
                    x.mean_mac_throughput_bps,
                    y.mean_mac_throughput_bps,
                    improvement(x.mean_mac_throughput_bps, y.mean_mac_throughput_bps)
                );
            }
            for (seed, s) in &x.runs {
                summary.push_str(&summary_row(kind, &x.name, *seed, s));
                summary.push('\n');
            }
        }
        bars.push(vec![cmp.improvement(0, 1) * 100.0, cmp.improvement(0, 2) * 100.0]);
    }
    write_file(&out.join("improvement.csv"), &improvement_csv, &mut outcome)?;
    write_file(&out.join("summary.csv"), &summary, &mut outcome)?;
    let groups: Vec<String> = kinds.iter().map(|k| k.label().to_string()).collect();
    let chart = svg::grouped_bars(
        "MAC throughput improvement of dynamic sounding",
        "improvement (%)",
        &groups,
        &["over LDA".to_string(), "over HDA".to_string()],
        &bars,
    );
    write_file(&out.join("compare_improvement.svg"), &chart, &mut outcome)?;

    // Sounding raster over the first window of the first seed.
    let raster_kind = if kinds.contains(&ScenarioKind::Alternating) || kinds.is_empty() {
        ScenarioKind::Alternating
    } else {
        kinds[0]
    };
    let window = cfg.raster_window().min(base.duration);
    let mut sc = base.with_kind(raster_kind).with_seed(seeds[0]);
    sc.duration = window;
    let mut events = String::from(EVENTS_HEADER);
    events.push('\n');
    let schedule = sc.schedule();
    let mut rows = Vec::new();
    for (name, strategy) in &strategies {
        let (timeline, _) = run_session(&link, &sc, *strategy, opts)?;
        let mut ticks = Vec::new();
        for e in &timeline.events {
            if let Event::Sounding { t_start, duration, ok: true, .. } = e {
                if *t_start >= window {
                    continue;
                }
                let segment = if schedule.is_high_at(*t_start) { "high" } else { "low" };
                let _ = writeln!(
                    events,
                    "{},{name},{},{},{},{segment}",
                    raster_kind.label(),
                    sc.seed,
                    t_start.as_nanos(),
                    duration.as_nanos()
                );
                ticks.push(t_start.as_secs_f64() * 1e3);
            }
        }
        rows.push((name.clone(), ticks));
    }
    write_file(&out.join("events.csv"), &events, &mut outcome)?;
    let shaded = high_segments(&schedule, window);
    let chart = svg::event_raster(
        &format!("Sounding events ({} scenario, seed {})", raster_kind.label(), sc.seed),
        window.as_secs_f64() * 1e3,
        &rows,
        &shaded,
    );
    write_file(&out.join("compare_raster.svg"), &chart, &mut outcome)?;
    write_warnings(out, warnings.into_iter(), &mut outcome)?;
    Ok(outcome)
}

/// High-Doppler stretches of `[0, window)` in milliseconds.
fn high_segments(schedule: &crate::channel::DopplerSchedule, window: Duration) -> Vec<(f64, f64)> {
    use crate::channel::DopplerSchedule;
    match schedule {
        DopplerSchedule::Constant(_) => Vec::new(),
        DopplerSchedule::Alternating { period, .. } => {
            let mut out = Vec::new();
            let mut t = Duration::ZERO;
            while t < window {
                let end = (t + *period).min(window);
                if schedule.is_high_at(t) {
                    out.push((t.as_secs_f64() * 1e3, end.as_secs_f64() * 1e3));
                }
                t += *period;
            }
            out
        }
    }
}

/// Materializes the configured channel for `channel.num_users` stations as
/// a trace file at `out`.
pub fn cmd_trace_gen(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let link = cfg.link_config()?;
    let scenario = cfg.scenario()?;
    let trace = generate_trace(&link.channel, cfg.channel.num_users, cfg.trace_duration(), &scenario.schedule(), cfg.trace.seed)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    trace.save(out)?;
    Ok(Outcome { files: vec![out.to_path_buf()], failed_cells: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let e = CliError::Config(ConfigError::Invalid { key: "a".into(), message: "b".into() });
        assert_eq!(e.exit_code(), 2);
        assert_eq!(Outcome::default().exit_code(), 0);
        assert_eq!(Outcome { failed_cells: 1, ..Outcome::default() }.exit_code(), 1);
    }
}

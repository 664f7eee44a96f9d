//! Materializes a channel trace, round-trips it through the text format, and
//! drives a session from the replayed channel.

use std::time::Duration;

use soundsim::channel::{generate_trace, DopplerSchedule, FadingTrace, TraceReplay};
use soundsim::engine::{run_link, EngineOptions, LinkConfig, PhysicalLink, RunSummary};
use soundsim::strategy::Strategy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = LinkConfig::with_subcarriers(8);
    let trace = generate_trace(&cfg.channel, 3, Duration::from_millis(500), &DopplerSchedule::Constant(3.0), 11)?;
    let mut buf = Vec::new();
    trace.write_to(&mut buf)?;
    let back = FadingTrace::read_from(buf.as_slice())?;
    assert_eq!(back, trace);
    println!("trace shape {:?}, {} bytes", back.shape(), buf.len());

    let mut link = PhysicalLink::new(TraceReplay::new(back), cfg, vec![vec![0, 1, 2]], 10f64.powf(-3.5))?;
    let timeline = run_link(&mut link, Strategy::Dynamic, Duration::from_millis(450), EngineOptions::default())?;
    let summary = RunSummary::from_timeline(&timeline, Duration::from_micros(856), None);
    println!(
        "{} soundings, MAC {:.1} Mb/s, PHY {:.1} Mb/s",
        summary.num_soundings,
        summary.mac_throughput_bps / 1e6,
        summary.phy_throughput_bps / 1e6
    );
    Ok(())
}

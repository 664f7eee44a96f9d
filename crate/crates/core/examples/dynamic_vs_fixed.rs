//! Dynamic sounding against fixed LDA/HDA baselines in the alternating
//! scenario, with the per-segment sounding intervals.

use std::time::Duration;

use soundsim::engine::{compare_strategies, EngineOptions, LinkConfig, ScenarioConfig, ScenarioKind};
use soundsim::strategy::Strategy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = LinkConfig::default();
    let mut sc = ScenarioConfig::default().with_kind(ScenarioKind::Alternating);
    sc.duration = Duration::from_secs(3);
    let strategies = vec![
        ("dynamic".to_string(), Strategy::Dynamic),
        ("lda".to_string(), Strategy::fixed_ms(43)),
        ("hda".to_string(), Strategy::fixed_ms(10)),
    ];
    let cmp = compare_strategies(&cfg, &sc, &strategies, &[1, 2, 3, 4], EngineOptions::default())?;
    for o in &cmp.outcomes {
        println!("{:<8} MAC {:6.1} Mb/s", o.name, o.mean_mac_throughput_bps / 1e6);
    }
    println!("dynamic over LDA: {:+.1}%", 100.0 * cmp.improvement(0, 1));
    println!("dynamic over HDA: {:+.1}%", 100.0 * cmp.improvement(0, 2));
    for (seed, run) in &cmp.outcomes[0].runs {
        let seg = run.segments.expect("alternating run");
        println!(
            "seed {seed}: mean interval high {:.1} ms, low {:.1} ms",
            seg.high_mean_interval_s.unwrap_or(f64::NAN) * 1e3,
            seg.low_mean_interval_s.unwrap_or(f64::NAN) * 1e3
        );
    }
    Ok(())
}

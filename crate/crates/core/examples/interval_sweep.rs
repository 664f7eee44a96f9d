//! MAC throughput against a fixed sounding interval for MU3 at both Doppler
//! levels, and the resulting LDA/HDA baselines.

use std::time::Duration;

use soundsim::engine::{calibrate_lda_hda, EngineOptions, LinkConfig, ScenarioConfig, ScenarioKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = LinkConfig::default();
    let sc = ScenarioConfig { duration: Duration::from_secs(3), ..ScenarioConfig::default() };
    let intervals: Vec<Duration> = [2, 5, 10, 20, 43, 100, 200, 400].iter().map(|&m| Duration::from_millis(m)).collect();
    let seeds: Vec<u64> = (1..=4).collect();
    let (lda, hda, low, high) = calibrate_lda_hda(&cfg, &sc, &intervals, &seeds, EngineOptions::default())?;
    for (kind, result) in [(ScenarioKind::LowDoppler, &low), (ScenarioKind::HighDoppler, &high)] {
        println!("{} Doppler", kind.label());
        for r in &result.rows {
            println!(
                "  {:>4} ms  PHY {:6.1} Mb/s  MAC {:6.1} Mb/s  SINR {:5.2} dB",
                r.interval.as_millis(),
                r.phy_throughput_bps / 1e6,
                r.mac_throughput_bps / 1e6,
                r.mean_sinr_db
            );
        }
    }
    println!("LDA = {} ms, HDA = {} ms", lda.as_millis(), hda.as_millis());
    Ok(())
}

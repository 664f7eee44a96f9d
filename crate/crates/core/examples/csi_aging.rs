//! Mean SINR against CSI age for SU beamforming and MU2/MU3 zero forcing at
//! both Doppler levels.

use std::time::Duration;

use soundsim::engine::{sinr_vs_age, LinkConfig, ScenarioConfig, ScenarioKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = LinkConfig::default();
    let ages: Vec<Duration> = [0, 10, 50, 200, 400].iter().map(|&m| Duration::from_millis(m)).collect();
    println!("{:<6} {:<4} {}", "fd", "grp", ages.iter().map(|a| format!("{:>8}", format!("{}ms", a.as_millis()))).collect::<String>());
    for kind in [ScenarioKind::LowDoppler, ScenarioKind::HighDoppler] {
        for g in 1..=3 {
            let mut sc = ScenarioConfig::default().with_kind(kind).with_group_size(g);
            sc.duration = Duration::from_secs(4);
            let v = sinr_vs_age(&cfg, &sc, &ages)?;
            println!("{:<6} {:<4} {}", kind.label(), g, v.iter().map(|x| format!("{x:8.2}")).collect::<String>());
        }
    }
    Ok(())
}

//! Zero-forcing steering for a three-user group: nulls on fresh CSI, then
//! the SINR loss once the channel has moved on.

use std::time::Duration;

use soundsim::channel::{ChannelSource, DopplerSchedule, FadingField};
use soundsim::engine::LinkConfig;
use soundsim::mimo::{sinr_mu, zf_precoder, ChannelSnapshot, PowerAllocation};
use soundsim::phy::db;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = LinkConfig::default();
    let users = [0, 1, 2];
    let mut field = FadingField::new(cfg.channel.clone(), DopplerSchedule::Constant(3.0), &users, 7)?;
    let h0 = field.response(0, &users)?;
    let snapshot = ChannelSnapshot::new(0.0, users.to_vec(), h0.clone())?;
    let w = zf_precoder(&snapshot, cfg.max_condition)?;

    let leak = h0
        .iter()
        .zip(w.w())
        .map(|(h, w)| {
            let g = h * w;
            let mut off = 0.0f64;
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        off = off.max(g[(i, j)].norm_sqr() / g[(i, i)].norm_sqr());
                    }
                }
            }
            off
        })
        .fold(0.0, f64::max);
    println!("max cross-user leakage on fresh CSI: {leak:.3e}");

    let alloc = PowerAllocation::equal(1.0, 3, 10f64.powf(-3.5))?;
    for age_ms in [0u64, 10, 50, 200] {
        let h = field.response(age_ms * (Duration::from_millis(1).as_nanos() / cfg.channel.dt.as_nanos()) as u64, &users)?;
        let mean: f64 = (0..3)
            .map(|s| sinr_mu(&h, &users, &w, s, &alloc).map(|v| v.iter().map(|&g| db(g)).sum::<f64>() / v.len() as f64))
            .sum::<Result<f64, _>>()?
            / 3.0;
        println!("CSI age {age_ms:>3} ms: mean SINR {mean:6.2} dB");
    }
    Ok(())
}

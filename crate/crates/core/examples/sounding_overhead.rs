//! Airtime of one sounding exchange for SU beamforming and MU groups, and
//! the share of a sounding interval it consumes.

use std::time::Duration;

use soundsim::mac_timing::{cbf_duration, sounding_duration, CbfFormat, MacTimingConfig};

fn main() {
    let cfg = MacTimingConfig::default();
    println!("CBF frame: {} us", cbf_duration(4, 1, 108, &CbfFormat::default()).as_micros());
    for n in 1..=3u32 {
        let ts = sounding_duration(n, &cfg).expect("non-empty group");
        print!("N_u = {n}: T_S = {:>4} us, overhead at", ts.as_micros());
        for ms in [2u64, 10, 43, 100] {
            let share = ts.as_secs_f64() / Duration::from_millis(ms).as_secs_f64();
            print!("  {ms} ms {:5.1}%", 100.0 * share);
        }
        println!();
    }
}

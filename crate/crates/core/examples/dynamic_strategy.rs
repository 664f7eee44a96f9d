//! Feeds a hand-made goodput sequence to the dynamic controller and prints
//! the reference throughput and the decision after every AMPDU.

use std::time::Duration;

use soundsim::strategy::{dynamic_decide, AmpduRecord, StrategyState};

fn main() {
    let mut state = StrategyState::new();
    state.record_sounding(Duration::ZERO, Duration::from_micros(856));
    // Fresh CSI gives high goodput that erodes as the channel ages.
    let goodput = [1_160_000u64, 1_160_000, 1_150_000, 1_120_000, 1_060_000, 980_000, 900_000];
    for (n, &bits) in goodput.iter().enumerate() {
        let record = AmpduRecord { goodput_bits: vec![bits / 3; 3], duration: Duration::from_millis(2) };
        let decision = dynamic_decide(&mut state, &record);
        println!(
            "AMPDU {}: R_TH = {:7.2} Mb/s -> {:?}",
            n + 1,
            state.rth_curr.unwrap_or(0.0) / 1e6,
            decision
        );
        if state.sound_needed {
            break;
        }
    }
}

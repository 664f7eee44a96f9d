//! MCS thresholds, per-stream PHY rates, and what a 2 ms AMPDU carries at
//! each MCS.

use soundsim::phy::{ampdu_payload, phy_rate, AmpduConfig, McsTable, OfdmConfig};

fn main() {
    let table = McsTable::default();
    let ofdm = OfdmConfig::default();
    let ampdu = AmpduConfig::default();
    println!("mcs  min SINR (dB)  rate (Mb/s)  MPDUs  goodput (bits)");
    for m in table.entries() {
        let p = ampdu_payload(Some(m), &ofdm, &ampdu);
        println!(
            "{:>3}  {:>13.1}  {:>11.1}  {:>5}  {:>14}",
            m.index,
            m.min_sinr_db,
            phy_rate(m, &ofdm, 1) / 1e6,
            p.mpdu_count,
            p.goodput_bits
        );
    }
    for sinr in [-3.0, 4.2, 17.9, 30.0] {
        let pick = table.select(sinr).map(|m| m.index.to_string()).unwrap_or_else(|| "none".into());
        println!("SINR {sinr:>5.1} dB -> MCS {pick}");
    }
}

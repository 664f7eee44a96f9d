use std::time::Duration;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use soundsim::channel::{freq_response, PowerDelayProfile, Tap};
use soundsim::engine::{
    improvement, run_session, sweep_intervals, EngineOptions, LinkConfig, ScenarioConfig, ScenarioKind, SweepResult,
    SweepRow,
};
use soundsim::mac_timing::{sounding_duration_mu, sounding_duration_su, CbfTiming, MacTimingConfig};
use soundsim::mimo::{sinr_mu, sinr_su, svd_steering, zf_precoder, ChannelSnapshot, PowerAllocation};
use soundsim::phy::McsTable;
use soundsim::strategy::Strategy as Policy;

fn cplx() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #[test]
    fn freq_response_is_the_tap_sum(
        taps in prop::collection::vec((0.0f64..1e-6, 0.01f64..1.0), 1..6),
        gains in prop::collection::vec(cplx(), 6),
        gains2 in prop::collection::vec(cplx(), 6),
        freqs in prop::collection::vec(-2e7f64..2e7, 1..10),
        alpha in -3.0f64..3.0,
    ) {
        let pdp = PowerDelayProfile::from_taps(taps.iter().map(|&(d, p)| Tap { delay_s: d, power: p }).collect()).unwrap();
        let k = taps.len();
        let h = freq_response(&gains[..k], &pdp, &freqs).unwrap();
        for (f, hf) in freqs.iter().zip(&h) {
            let mut want = Complex64::new(0.0, 0.0);
            for (a, &(d, _)) in gains[..k].iter().zip(&taps) {
                let ph = -2.0 * std::f64::consts::PI * f * d;
                want += a * Complex64::new(ph.cos(), ph.sin());
            }
            prop_assert!((hf - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
        // linear in the tap gains
        let mix: Vec<Complex64> = gains[..k].iter().zip(&gains2[..k]).map(|(a, b)| a * alpha + b).collect();
        let h2 = freq_response(&gains2[..k], &pdp, &freqs).unwrap();
        let hm = freq_response(&mix, &pdp, &freqs).unwrap();
        for i in 0..freqs.len() {
            let want = h[i] * alpha + h2[i];
            prop_assert!((hm[i] - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn mcs_selection_is_monotone(a in -10.0f64..40.0, b in -10.0f64..40.0) {
        let t = McsTable::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let idx = |s: f64| t.select(s).map(|m| m.index as i32).unwrap_or(-1);
        prop_assert!(idx(lo) <= idx(hi));
        if let Some(m) = t.select(hi) {
            prop_assert!(m.min_sinr_db <= hi);
            prop_assert!(t.entries().iter().filter(|e| e.min_sinr_db <= hi).all(|e| e.index <= m.index));
        }
    }

    #[test]
    fn mu_timing_with_one_user_is_su(
        ndpa in 0u64..200, ndp in 0u64..200, brp in 0u64..200, sifs in 0u64..50, cbf in 0u64..1000,
    ) {
        let cfg = MacTimingConfig {
            ndpa: Duration::from_micros(ndpa),
            ndp: Duration::from_micros(ndp),
            brp: Duration::from_micros(brp),
            sifs: Duration::from_micros(sifs),
            cbf: CbfTiming::Fixed(Duration::from_micros(cbf)),
        };
        prop_assert_eq!(sounding_duration_mu(1, &cfg).unwrap(), sounding_duration_su(&cfg));
        prop_assert!(sounding_duration_mu(3, &cfg).unwrap() >= sounding_duration_mu(2, &cfg).unwrap());
    }

    #[test]
    fn single_user_mu_sinr_equals_su(
        h0 in prop::collection::vec(cplx(), 4),
        h1 in prop::collection::vec(cplx(), 4),
        noise in 1e-4f64..1.0,
    ) {
        prop_assume!(h0.iter().map(|c| c.norm()).sum::<f64>() > 1e-3);
        let snap = ChannelSnapshot::new(0.0, vec![5], vec![DMatrix::from_row_slice(1, 4, &h0)]).unwrap();
        let w_zf = zf_precoder(&snap, 1e8).unwrap();
        let w_svd = svd_steering(&snap).unwrap();
        let alloc = PowerAllocation::equal(1.0, 1, noise).unwrap();
        let now = vec![DMatrix::from_row_slice(1, 4, &h1)];
        let mu = sinr_mu(&now, &[5], &w_zf, 0, &alloc).unwrap()[0];
        let su = sinr_su(&h1, &w_svd.w()[0], 0, &alloc).unwrap();
        prop_assert!((mu - su).abs() <= 1e-9 * su.max(1e-12));
    }

    #[test]
    fn improvement_antisymmetry(x in 1.0f64..1e9, y in 1.0f64..1e9) {
        let xy = improvement(x, y);
        let yx = improvement(y, x);
        prop_assert!((xy + yx / (1.0 + yx)).abs() <= 1e-12 * (1.0 + xy.abs()));
        prop_assert_eq!(improvement(x, x), 0.0);
    }
}

fn short(kind: ScenarioKind, ms: u64, seed: u64) -> ScenarioConfig {
    let mut sc = ScenarioConfig::default().with_kind(kind).with_seed(seed);
    sc.duration = Duration::from_millis(ms);
    sc
}

#[test]
fn sweep_of_one_interval_is_one_session() {
    let cfg = LinkConfig::with_subcarriers(8);
    let sc = short(ScenarioKind::HighDoppler, 300, 4);
    let interval = Duration::from_millis(20);
    let r = sweep_intervals(&cfg, &sc, &[3], &[interval], &[4], EngineOptions::default());
    let (_, s) = run_session(&cfg, &sc, Policy::Fixed { interval }, EngineOptions::default()).unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].mac_throughput_bps, s.mac_throughput_bps);
    assert_eq!(r.rows[0].phy_throughput_bps, s.phy_throughput_bps);
    assert_eq!(r.rows[0].mean_sinr_db, s.mean_sinr_db);
}

#[test]
fn static_channel_mac_grows_with_interval() {
    let cfg = LinkConfig::with_subcarriers(8);
    let mut sc = short(ScenarioKind::LowDoppler, 1000, 2);
    sc.doppler_low_hz = 0.0;
    let intervals: Vec<Duration> = [2, 5, 10, 20, 43, 100, 200, 400].iter().map(|&m| Duration::from_millis(m)).collect();
    let r = sweep_intervals(&cfg, &sc, &[3], &intervals, &[2], EngineOptions::default());
    for w in r.rows.windows(2) {
        assert!(w[1].mac_throughput_bps > w[0].mac_throughput_bps, "{:?} vs {:?}", w[0], w[1]);
    }
}

#[test]
fn mac_is_phy_times_airtime_fraction() {
    let cfg = LinkConfig::with_subcarriers(8);
    for (kind, strategy) in [
        (ScenarioKind::HighDoppler, Policy::fixed_ms(10)),
        (ScenarioKind::Alternating, Policy::Dynamic),
        (ScenarioKind::LowDoppler, Policy::fixed_ms(43)),
    ] {
        let (_, s) = run_session(&cfg, &short(kind, 500, 1), strategy, EngineOptions::default()).unwrap();
        let frac = s.ampdu_time.as_secs_f64() / s.total_time.as_secs_f64();
        assert!((s.mac_throughput_bps - s.phy_throughput_bps * frac).abs() <= 1e-9 * s.mac_throughput_bps);
        assert!(s.mac_throughput_bps <= s.phy_throughput_bps);
    }
}

#[test]
fn fresh_csi_without_overhead_bounds_everything() {
    let cfg = LinkConfig::with_subcarriers(8);
    for seed in 1..=3 {
        let sc = short(ScenarioKind::HighDoppler, 400, seed);
        let zero = EngineOptions { zero_overhead: true, ..EngineOptions::default() };
        let (_, best) = run_session(&cfg, &sc, Policy::fixed_ms(2), zero).unwrap();
        for strategy in [Policy::fixed_ms(2), Policy::fixed_ms(10), Policy::fixed_ms(100), Policy::Dynamic] {
            let (_, s) = run_session(&cfg, &sc, strategy, EngineOptions::default()).unwrap();
            assert!(best.mac_throughput_bps >= s.mac_throughput_bps, "seed {seed} {strategy}");
        }
    }
}

#[test]
fn sessions_are_deterministic() {
    let cfg = LinkConfig::with_subcarriers(8);
    let sc = short(ScenarioKind::Alternating, 400, 17);
    let (a, _) = run_session(&cfg, &sc, Policy::Dynamic, EngineOptions::default()).unwrap();
    let (b, _) = run_session(&cfg, &sc, Policy::Dynamic, EngineOptions::default()).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    let (c, _) = run_session(&cfg, &sc.with_seed(18), Policy::Dynamic, EngineOptions::default()).unwrap();
    assert_ne!(a.to_csv(), c.to_csv());
}

fn row(interval_ms: u64, mac: f64) -> SweepRow {
    SweepRow {
        scenario: ScenarioKind::LowDoppler,
        group_size: 3,
        interval: Duration::from_millis(interval_ms),
        sounding_duration: Duration::from_micros(856),
        seeds: 1,
        phy_throughput_bps: mac,
        mac_throughput_bps: mac,
        mean_sinr_db: 0.0,
    }
}

#[test]
fn calibration_tie_breaks_to_smaller_interval() {
    let single = SweepResult { rows: vec![row(43, 1.0)], ..SweepResult::default() };
    assert_eq!(single.best_interval(3), Some(Duration::from_millis(43)));
    let flat = SweepResult { rows: vec![row(100, 5.0), row(2, 5.0), row(20, 5.0)], ..SweepResult::default() };
    assert_eq!(flat.best_interval(3), Some(Duration::from_millis(2)));
    let peaked = SweepResult { rows: vec![row(2, 1.0), row(20, 7.0), row(100, 7.0), row(200, 3.0)], ..SweepResult::default() };
    assert_eq!(peaked.best_interval(3), Some(Duration::from_millis(20)));
    assert_eq!(peaked.best_interval(2), None);
}

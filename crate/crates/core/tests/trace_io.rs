use std::time::Duration;

use num_complex::Complex64;
use soundsim::channel::{
    generate_trace, ChannelError, ChannelModel, ChannelSource, DopplerSchedule, FadingTrace, PowerDelayProfile,
    TraceReplay,
};
use soundsim::engine::LinkConfig;

fn small_trace() -> FadingTrace {
    let samples: Vec<Complex64> = (0..3 * 2 * 2 * 2)
        .map(|i| Complex64::new(i as f64 * 0.1 - 0.7, 1.0 / (i as f64 + 3.0)))
        .collect();
    FadingTrace::from_samples(2, 2, 2, 1e-3, samples).unwrap()
}

fn text(trace: &FadingTrace) -> String {
    let mut buf = Vec::new();
    trace.write_to(&mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn parse(s: &str) -> Result<FadingTrace, ChannelError> {
    FadingTrace::read_from(s.as_bytes())
}

#[test]
fn round_trip_is_exact() {
    let t = small_trace();
    assert_eq!(t.shape(), (3, 2, 2, 2));
    assert_eq!(parse(&text(&t)).unwrap(), t);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.trace");
    let model = LinkConfig::with_subcarriers(4).channel;
    let g = generate_trace(&model, 2, Duration::from_millis(20), &DopplerSchedule::Constant(30.0), 5).unwrap();
    g.save(&path).unwrap();
    assert_eq!(FadingTrace::load(&path).unwrap(), g);
}

#[test]
fn row_count_matches_header_arithmetic() {
    let t = small_trace();
    let s = text(&t);
    let (t_, u, sc, a) = t.shape();
    assert_eq!(s.lines().count(), 1 + t_ * u * sc * a);
}

#[test]
fn truncated_file_names_missing_records() {
    let s = text(&small_trace());
    let cut: Vec<&str> = s.lines().collect();
    let short = cut[..cut.len() - 5].join("\n");
    match parse(&short) {
        Err(e @ ChannelError::Truncated { expected: 24, found: 19 }) => {
            assert!(e.to_string().contains("5 of 24 records missing"), "{e}");
        }
        other => panic!("expected truncation error, got {other:?}"),
    }
}

#[test]
fn extra_records_are_a_dimension_error() {
    let s = text(&small_trace()).replacen("num_t=3", "num_t=2", 1);
    assert!(matches!(parse(&s), Err(ChannelError::DimensionMismatch(_))));
    let s = text(&small_trace()).replacen("num_users=2", "num_users=1", 1);
    assert!(matches!(parse(&s), Err(ChannelError::DimensionMismatch(_))));
}

#[test]
fn malformed_inputs_have_distinct_errors() {
    let good = text(&small_trace());
    assert!(matches!(parse(""), Err(ChannelError::MalformedHeader(_))));
    assert!(matches!(parse(&good.replacen("SOUNDTRACE", "TRACE", 1)), Err(ChannelError::MalformedHeader(_))));
    assert!(matches!(parse(&good.replacen("dt_s=", "dt=", 1)), Err(ChannelError::MalformedHeader(_))));

    let mut lines: Vec<String> = good.lines().map(String::from).collect();
    lines[3] = "0,0,1,0,abc,0".into();
    assert!(matches!(parse(&lines.join("\n")), Err(ChannelError::MalformedRow { line: 4, .. })));

    let mut lines: Vec<String> = good.lines().map(String::from).collect();
    lines[2] = "0,0,0,1,NaN,0".into();
    assert!(matches!(parse(&lines.join("\n")), Err(ChannelError::NonFinite { index: 1 })));

    let mut lines: Vec<String> = good.lines().map(String::from).collect();
    lines.swap(1, 2);
    assert!(matches!(parse(&lines.join("\n")), Err(ChannelError::MalformedRow { line: 2, .. })));
}

#[test]
fn generation_shape_and_zero_doppler() {
    let model = LinkConfig::with_subcarriers(16).channel;
    let t = generate_trace(&model, 12, Duration::from_secs(1), &DopplerSchedule::Constant(0.0), 3).unwrap();
    assert_eq!(t.shape(), (1001, 12, 16, 4));
    for k in 1..t.num_t() {
        assert_eq!(t.slice_at(k), t.slice_at(0));
    }
    assert!(generate_trace(&model, 0, Duration::from_secs(1), &DopplerSchedule::Constant(0.0), 3).is_err());
    assert!(generate_trace(&model, 1, Duration::from_micros(10), &DopplerSchedule::Constant(0.0), 3).is_err());
}

#[test]
fn per_link_power_is_unit() {
    // 2*pi*f_d*dt at the first zero of J0 makes successive samples uncorrelated.
    let fd = 2.404825557695773 / (2.0 * std::f64::consts::PI * 1e-3);
    let model = ChannelModel {
        pdp: PowerDelayProfile::exponential(5, 3.0, 50e-9).unwrap(),
        num_tx: 2,
        subcarrier_freqs: vec![-15e6, -5e6, 5e6, 15e6],
        dt: Duration::from_millis(1),
    };
    let t = generate_trace(&model, 1, Duration::from_secs(100), &DopplerSchedule::Constant(fd), 9).unwrap();
    for tx in 0..2 {
        let mut p = 0.0;
        let mut n = 0usize;
        for k in 0..t.num_t() {
            for sc in 0..4 {
                p += t.get(k, 0, sc, tx).norm_sqr();
                n += 1;
            }
        }
        assert!(n >= 100_000);
        let mean = p / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "link tx{tx}: mean power {mean}");
    }
}

#[test]
fn replay_matches_trace_and_stops_at_end() {
    let t = small_trace();
    let mut r = TraceReplay::new(t.clone());
    assert_eq!(r.dt(), Duration::from_millis(1));
    let h = r.response(2, &[1, 0]).unwrap();
    assert_eq!(h.len(), 2);
    assert_eq!(h[1][(0, 1)], t.get(2, 1, 1, 1));
    assert_eq!(h[1][(1, 0)], t.get(2, 0, 1, 0));
    assert!(matches!(r.response(3, &[0]), Err(ChannelError::TraceExhausted { .. })));
    assert!(matches!(r.response(0, &[2]), Err(ChannelError::UnknownUser(2))));
}

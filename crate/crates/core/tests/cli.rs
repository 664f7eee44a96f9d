use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use soundsim::channel::{generate_trace, FadingTrace};
use soundsim::config::RunConfig;

const BASE: &str = r#"
[channel]
num_subcarriers = 4

[scenario]
kind = "high"
duration_s = 0.3

[sweep]
intervals_ms = [5.0, 20.0, 100.0]
group_sizes = [1, 2, 3]

[run]
seeds = [1]
"#;

fn soundsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soundsim")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn run_cmd(cmd: &str, cfg: &str, out: &Path, extra: &[&str]) -> Output {
    let out = out.display().to_string();
    let mut args = vec![cmd, "--config", cfg, "--out", &out];
    args.extend_from_slice(extra);
    soundsim(&args)
}

#[test]
fn bundled_config_is_valid() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.toml");
    let cfg = RunConfig::from_path(&path).unwrap();
    assert_eq!(cfg.link_config().unwrap(), soundsim::engine::LinkConfig::default());
    assert_eq!(cfg.run.seeds.len(), 10);
}

#[test]
fn sweep_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = run_cmd("sweep", &cfg, &a, &["--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(run_cmd("sweep", &cfg, &b, &["--jobs", "1"]).status.success());
    let csv = fs::read_to_string(a.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
    for f in ["sweep.csv", "summary.csv", "sweep_sinr.svg", "sweep_phy.svg", "sweep_mac.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    assert!(!a.join("warnings.txt").exists());
    // every plotted point comes from a CSV row
    let svg = fs::read_to_string(a.join("sweep_mac.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="point""#).count(), 9);
}

#[test]
fn csv_numbers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    assert!(run_cmd("sweep", &cfg, dir.path(), &[]).status.success());
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    for line in csv.lines().skip(1) {
        for field in line.split(',').skip(1) {
            let v: f64 = field.parse().unwrap();
            assert_eq!(v.to_string(), field);
        }
    }
}

#[test]
fn seed_override_replaces_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    assert!(run_cmd("sweep", &cfg, dir.path(), &["--seed-override", "4,5"]).status.success());
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let seeds: std::collections::BTreeSet<&str> = summary.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(seeds.into_iter().collect::<Vec<_>>(), vec!["4", "5"]);
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BASE.replace("duration_s = 0.3", ""));
    let out = run_cmd("sweep", &cfg, &dir.path().join("o"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenario.duration_s"));

    let cfg = write_config(dir.path(), &BASE.replace("duration_s = 0.3", "duration_s = 0.0"));
    let out = run_cmd("run", &cfg, &dir.path().join("o"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenario.duration_s"));

    let cfg = write_config(dir.path(), &format!("{BASE}\n[mimo]\nzf_max_cond = 3\n"));
    let out = run_cmd("run", &cfg, &dir.path().join("o"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mimo.zf_max_cond"));
}

#[test]
fn partial_failures_exit_1_with_warnings() {
    // A condition limit of 1 rejects every multi-user group, while SU cells
    // still complete.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{BASE}\n[mimo]\nzf_max_condition = 1.0\n"));
    let out = run_cmd("sweep", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let warnings = fs::read_to_string(dir.path().join("warnings.txt")).unwrap();
    assert_eq!(warnings.lines().count(), 6);
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
}

#[test]
fn run_writes_an_auditable_timeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BASE.replace("\"high\"", "\"alternating\""));
    assert!(run_cmd("run", &cfg, dir.path(), &[]).status.success());
    let timeline = fs::read_to_string(dir.path().join("timeline.csv")).unwrap();
    assert_eq!(timeline.lines().next().unwrap(), soundsim::engine::TIMELINE_HEADER);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn compare_outputs_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.replace("\"high\"", "\"alternating\"")
        + "\n[compare]\nlda_interval_ms = 43.0\nhda_interval_ms = 10.0\nraster_window_ms = 200.0\n";
    let cfg = write_config(dir.path(), &text);
    let out = run_cmd("compare", &cfg, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let imp = fs::read_to_string(dir.path().join("improvement.csv")).unwrap();
    assert_eq!(imp.lines().count(), 1 + 3 * 9);
    for line in imp.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[1] == f[2] {
            assert_eq!(f[5], "0");
        }
    }
    let events = fs::read_to_string(dir.path().join("events.csv")).unwrap();
    let raster = fs::read_to_string(dir.path().join("compare_raster.svg")).unwrap();
    assert_eq!(raster.matches(r#"class="tick""#).count(), events.lines().count() - 1);
    assert!(raster.contains(r#"class="high""#));
    assert!(!dir.path().join("calibration.csv").exists());
}

#[test]
fn trace_gen_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.to_string() + "\n[trace]\nduration_s = 0.05\nseed = 3\n";
    let cfg_path = write_config(dir.path(), &text);
    let trace_path = dir.path().join("traces/high.trace");
    assert!(run_cmd("trace-gen", &cfg_path, &trace_path, &[]).status.success());
    let loaded = FadingTrace::load(&trace_path).unwrap();
    let cfg = RunConfig::parse(&text).unwrap();
    let link = cfg.link_config().unwrap();
    let scenario = cfg.scenario().unwrap();
    let direct = generate_trace(&link.channel, 12, cfg.trace_duration(), &scenario.schedule(), 3).unwrap();
    assert_eq!(loaded, direct);
    assert_eq!(loaded.shape(), (51, 12, 4, 4));
}

//! Loads the bundled configuration, shortens it, and runs the `run` command
//! into a temporary directory.

use std::path::Path;

use soundsim::cli::cmd_run;
use soundsim::config::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.toml");
    let mut cfg = RunConfig::from_path(&path)?;
    cfg.scenario.duration_s = 0.5;
    cfg.validate()?;
    let out = std::env::temp_dir().join("soundsim-config-run");
    let outcome = cmd_run(&cfg, &out)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    let summary = std::fs::read_to_string(out.join("summary.csv"))?;
    print!("{summary}");
    Ok(())
}

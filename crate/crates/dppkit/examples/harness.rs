//! Run an experiment pipeline from a config string, write it with a manifest, and rerun it.
//!
//! cargo run --release --example harness

use dppkit::harness::{execute, rerun, resolve, run_kind, Config, Kind, Request};

fn main() -> dppkit::Result<()> {
    let text = "# small variance run\nhalf_window = 20\nouter = 6\nreps = 500\nscan_l = 8, 16\n";
    let params = resolve(Kind::Variance, &Config::parse(text)?, Some(4))?;
    let art = run_kind(Kind::Variance, &params)?;
    for (name, bytes) in &art.files {
        println!("{name}: {} bytes", bytes.len());
    }
    println!("{}", art.summary);

    let dir = std::env::temp_dir().join(format!("dppkit-harness-{}", std::process::id()));
    let cfg = dir.join("variance.ini");
    std::fs::create_dir_all(&dir).map_err(|e| dppkit::Error::Io(e.to_string()))?;
    std::fs::write(&cfg, text).map_err(|e| dppkit::Error::Io(e.to_string()))?;
    let req = Request { kind: Kind::Variance, config_path: Some(cfg), seed: Some(4), out_dir: dir.join("run"), plot: Some(dir.join("run/variance.svg")) };
    let m = execute(&req)?;
    println!("wrote {} outputs to {}", m.outputs.len(), req.out_dir.display());
    let (_, checks) = rerun(&dir.join("run/manifest.json"), &dir.join("again"))?;
    for c in &checks {
        println!("{} {}", if c.matches() { "MATCH" } else { "DIFFER" }, c.file);
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

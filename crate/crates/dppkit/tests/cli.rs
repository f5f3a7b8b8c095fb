use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dppkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dppkit")).args(args).output().expect("spawn dppkit")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(o.stderr.trim_ascii()).expect("stderr is one JSON object")
}

const SAMPLE: &str = "model = toeplitz\nsymbol = indicator\na = pi/2\nhalf_window = 10\nreps = 100\n";

#[test]
fn sample_writes_one_line_per_replica() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.ini", SAMPLE);
    let out = tmp.path().join("out");
    let o = dppkit(&["sample", "--config", &cfg, "--seed", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("archive.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    for l in &lines {
        serde_json::from_str::<serde_json::Value>(l).unwrap();
    }
    assert!(out.join("manifest.json").exists());
}

#[test]
fn same_config_same_hashes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.ini", SAMPLE);
    let hash = |d: &str| {
        let out = tmp.path().join(d);
        assert!(dppkit(&["sample", "--config", &cfg, "--seed", "9", "--out", out.to_str().unwrap()]).status.success());
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        m["outputs"]["archive.jsonl"].as_str().unwrap().to_string()
    };
    assert_eq!(hash("a"), hash("b"));
}

#[test]
fn contraction_violation_exits_2_without_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bad.ini", "symbol = constant\nt = 1.5\n");
    let out = tmp.path().join("out");
    let o = dppkit(&["sample", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["kind"], "contraction violation");
    assert_eq!(e["exit_code"], 2);
    assert!(!out.exists());
}

#[test]
fn schema_errors_exit_2_without_output() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    for text in ["reps = many\n", "no_such_key = 1\n", "reps 10\n"] {
        let cfg = write(tmp.path(), "bad.ini", text);
        let o = dppkit(&["experiment", "variance", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert_eq!(stderr_json(&o)["exit_code"], 2);
        assert!(!out.exists());
    }
    let o = dppkit(&["experiment", "bogus", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn rerun_reproduces_hashes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "v.ini", "half_window = 20\nouter = 6\nreps = 200\nscan_l = 8, 16\n");
    let out = tmp.path().join("run");
    let plot = tmp.path().join("run").join("variance.svg");
    let o = dppkit(&[
        "experiment", "variance", "--config", &cfg, "--seed", "3", "--out", out.to_str().unwrap(),
        "--plot", plot.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&plot).unwrap().starts_with("<svg"));
    let again = tmp.path().join("again");
    let o = dppkit(&["rerun", out.join("manifest.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().count() >= 3);
    assert!(stdout.lines().all(|l| l.starts_with("MATCH ")), "{stdout}");
}

#[test]
fn help_exits_0() {
    assert_eq!(dppkit(&["--help"]).status.code(), Some(0));
}

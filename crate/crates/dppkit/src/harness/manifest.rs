//! Run manifests: what was run, with which parameters, and the hash of every output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Config;
use super::experiments::{resolve, run_kind, Kind};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// `sample` or `experiment <kind>`.
    pub command: String,
    pub kind: String,
    /// Every parameter after defaults and overrides.
    pub params: BTreeMap<String, String>,
    pub master_seed: u64,
    pub tool_version: String,
    /// Input path to sha256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name to sha256.
    pub outputs: BTreeMap<String, String>,
    /// Which output, if any, is the plot.
    pub plot: Option<String>,
    pub summary: serde_json::Value,
    pub wall_time_s: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// A run request as the command line sees it.
#[derive(Debug, Clone)]
pub struct Request {
    pub kind: Kind,
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Validate, run, then write outputs and the manifest. Nothing is written unless the whole
/// run succeeds.
pub fn execute(req: &Request) -> Result<RunManifest> {
    let start = Instant::now();
    let (config, inputs) = match &req.config_path {
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| io(p, e))?;
            let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Config("config is not UTF-8".into()))?;
            let mut inputs = BTreeMap::new();
            inputs.insert(p.display().to_string(), sha256_hex(&bytes));
            (Config::parse(&text)?, inputs)
        }
        None => (Config::default(), BTreeMap::new()),
    };
    let params = resolve(req.kind, &config, req.seed)?;
    let plot_name = match &req.plot {
        Some(p) => Some(
            p.file_name()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Config(format!("bad plot path {}", p.display())))?
                .to_string(),
        ),
        None => None,
    };
    let art = run_kind(req.kind, &params)?;
    let svg = match (&plot_name, &art.plot) {
        (Some(_), Some(p)) => Some(p.to_svg().into_bytes()),
        _ => None,
    };

    fs::create_dir_all(&req.out_dir).map_err(|e| io(&req.out_dir, e))?;
    let mut outputs = BTreeMap::new();
    for (name, bytes) in &art.files {
        let path = req.out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        outputs.insert(name.clone(), sha256_hex(bytes));
    }
    if let (Some(path), Some(bytes)) = (&req.plot, &svg) {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        fs::write(path, bytes).map_err(|e| io(path, e))?;
        outputs.insert(plot_name.clone().unwrap_or_default(), sha256_hex(bytes));
    }
    let command = match req.kind {
        Kind::Sample => "sample".to_string(),
        k => format!("experiment {}", k.name()),
    };
    let manifest = RunManifest {
        command,
        kind: req.kind.name().to_string(),
        master_seed: params.u64("seed")?,
        params: params.values,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        outputs,
        plot: svg.as_ref().and(plot_name),
        summary: art.summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = req.out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))? + "\n";
    fs::write(&path, text).map_err(|e| io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("manifest {}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HashCheck {
    pub file: String,
    pub expected: String,
    pub actual: Option<String>,
}

impl HashCheck {
    pub fn matches(&self) -> bool {
        self.actual.as_deref() == Some(self.expected.as_str())
    }
}

/// Run again from a manifest's parameters into `out_dir` and compare every output hash.
pub fn rerun(manifest_path: &Path, out_dir: &Path) -> Result<(RunManifest, Vec<HashCheck>)> {
    let old = read_manifest(manifest_path)?;
    let kind = Kind::from_name(&old.kind)?;
    let params = Config::from_params(&old.params);
    let config_path = out_dir.join("rerun.ini");
    let text: String = params.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    fs::write(&config_path, text).map_err(|e| io(&config_path, e))?;
    let req = Request {
        kind,
        config_path: Some(config_path),
        seed: None,
        out_dir: out_dir.to_path_buf(),
        plot: old.plot.as_ref().map(|p| out_dir.join(p)),
    };
    let new = execute(&req)?;
    let checks = old
        .outputs
        .iter()
        .map(|(f, h)| HashCheck { file: f.clone(), expected: h.clone(), actual: new.outputs.get(f).cloned() })
        .collect();
    Ok((new, checks))
}

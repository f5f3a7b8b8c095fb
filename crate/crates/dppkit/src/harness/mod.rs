//! Reproducible batch runs: typed configs, in-memory experiment pipelines, manifests, plots.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod svg;

pub use config::{Config, Params};
pub use experiments::{resolve, run_kind, Artifacts, Kind};
pub use manifest::{execute, read_manifest, rerun, sha256_hex, HashCheck, Request, RunManifest, MANIFEST_FILE};
pub use svg::{Plot, Series};

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dppkit::harness::{execute, rerun, Kind, Request};
use dppkit::Error;

#[derive(Parser)]
#[command(name = "dppkit", version, about = "Reproducible determinantal point process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write an SVG plot of the primary curve.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw replicas and write `archive.jsonl`.
    Sample(Common),
    /// Run one experiment pipeline.
    Experiment {
        /// variance | rigidity | reconstruct | negassoc | residual | valuedist
        kind: String,
        #[command(flatten)]
        common: Common,
    },
    /// Repeat a run from its manifest and compare output hashes.
    Rerun {
        manifest: PathBuf,
        #[arg(long, default_value = "rerun")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

/// Print to stdout, ignoring a closed pipe.
fn out(line: &str) {
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn fail(e: &Error) -> ExitCode {
    let msg = serde_json::json!({"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()});
    eprintln!("{msg}");
    ExitCode::from(e.exit_code() as u8)
}

fn threads(n: Option<usize>) -> Result<(), Error> {
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn request(kind: Kind, c: Common) -> Result<Request, Error> {
    threads(c.threads)?;
    Ok(Request { kind, config_path: c.config, seed: c.seed, out_dir: c.out, plot: c.plot })
}

fn run(cli: Cli) -> Result<(), Error> {
    let req = match cli.command {
        Command::Sample(c) => request(Kind::Sample, c)?,
        Command::Experiment { kind, common } => {
            let k = Kind::from_name(&kind)?;
            if k == Kind::Sample {
                return Err(Error::Config("use the `sample` subcommand".into()));
            }
            request(k, common)?
        }
        Command::Rerun { manifest, out: dir, threads: t } => {
            threads(t)?;
            let (_, checks) = rerun(&manifest, &dir)?;
            for c in &checks {
                out(&format!("{} {}", if c.matches() { "MATCH" } else { "DIFFER" }, c.file));
            }
            let bad: Vec<&str> = checks.iter().filter(|c| !c.matches()).map(|c| c.file.as_str()).collect();
            if !bad.is_empty() {
                return Err(Error::DataInconsistency(format!("outputs differ from the manifest: {}", bad.join(", "))));
            }
            return Ok(());
        }
    };
    let m = execute(&req)?;
    out(&serde_json::to_string_pretty(&m.summary).unwrap_or_default());
    for (f, h) in &m.outputs {
        out(&format!("{f} {h}"));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = write!(std::io::stdout(), "{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Error::Config(e.to_string().trim().to_string())),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

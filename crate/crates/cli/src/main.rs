//! `halfint`: batch driver for form construction, sieve checks, sign-change
//! experiments and central L-value scans.

mod args;
mod commands;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Deserialize;
use serde_json::{json, Value};

use args::{Cli, Command};
use halfint_core::Error;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::Json(_) => 2,
        Error::Precision { .. } => 3,
        Error::Assertion(_) => 4,
        Error::Io(_) | Error::Csv(_) => 1,
    }
}

/// `<out>.manifest.json`.
fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

#[derive(Deserialize)]
struct RecordedRun {
    argv: Vec<String>,
}

/// Parses the command line stored in a manifest, keeping the caller's
/// `--threads` and `--out`.
fn replay(
    manifest: &Path,
    threads: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(Cli, Vec<String>), Error> {
    let text = fs::read_to_string(manifest)?;
    let rec: RecordedRun = serde_json::from_str(&text)?;
    let mut cli = Cli::try_parse_from(&rec.argv)
        .map_err(|e| Error::Validation(format!("manifest command line: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::Validation("manifest records another replay".into()));
    }
    cli.threads = threads;
    cli.out = out;
    Ok((cli, rec.argv))
}

fn execute(cli: &Cli) -> Result<Value, Error> {
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            let summary = commands::run(&cli.command, &mut w);
            w.flush()?;
            summary
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            let summary = commands::run(&cli.command, &mut w);
            w.flush()?;
            summary
        }
    }
}

fn write_manifest(cli: &Cli, argv: &[String], result: &Result<Value, Error>, secs: f64) -> Result<(), Error> {
    let Some(out) = &cli.out else {
        return Ok(());
    };
    let (status, summary) = match result {
        Ok(v) => (json!("ok"), v.clone()),
        Err(e) => (json!({ "error": e.to_string(), "exit_code": exit_code(e) }), Value::Null),
    };
    let doc = json!({
        "argv": argv,
        "config": cli,
        "versions": {
            "halfint": env!("CARGO_PKG_VERSION"),
            "manifest": 1,
        },
        "threads": rayon::current_num_threads(),
        "output": out,
        "wall_time_seconds": secs,
        "status": status,
        "summary": summary,
    });
    fs::write(manifest_path(out), serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

fn main() -> ExitCode {
    let mut argv: Vec<String> = std::env::args().collect();
    let mut cli = Cli::parse();
    if let Command::Replay(r) = &cli.command {
        match replay(&r.manifest, cli.threads, cli.out.clone()) {
            Ok((c, recorded)) => {
                cli = c;
                argv = recorded;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(exit_code(&e));
            }
        }
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: invalid input: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let start = Instant::now();
    let result = execute(&cli);
    let secs = start.elapsed().as_secs_f64();
    if let Err(e) = write_manifest(&cli, &argv, &result, secs) {
        eprintln!("error: writing manifest: {e}");
        return ExitCode::from(exit_code(&e));
    }
    match result {
        Ok(summary) => {
            if cli.out.is_some() {
                eprintln!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::Parser;
use sectorheat_cli::args::{resolve, Cli, Format, RunConfig};
use sectorheat_cli::commands::{run, Outcome};
use sectorheat_cli::{CliError, CliResult};

fn configure_threads() -> CliResult<usize> {
    let n = match std::env::var("SECTORHEAT_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("SECTORHEAT_THREADS must be a non-negative integer, got '{v}'")))?,
        Err(_) => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(rayon::current_num_threads())
}

fn write_report(o: &Outcome, format: Format, w: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Csv => o.report.write_csv(w),
        Format::Json => o.report.write_json(w),
    }
}

/// Timestamps stay out of the data file; they go to `<output>.log`.
fn write_sidecar(path: &Path, cfg: &RunConfig, threads: usize, status: &str) -> io::Result<()> {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut log = path.as_os_str().to_owned();
    log.push(".log");
    let mut f = File::create(log)?;
    writeln!(f, "timestamp_unix={ts}")?;
    writeln!(f, "version={}", env!("CARGO_PKG_VERSION"))?;
    writeln!(f, "command={}", cfg.command.name())?;
    writeln!(f, "threads={threads}")?;
    writeln!(f, "status={status}")
}

fn execute() -> CliResult<()> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            let msg = e.render().to_string();
            let msg = msg.trim_end().strip_prefix("error: ").unwrap_or(msg.trim_end()).to_string();
            return Err(CliError::Usage(msg));
        }
    };
    let threads = configure_threads()?;
    let cfg = resolve(cli)?;
    let outcome = run(&cfg.command)?;
    let format = cfg.format.unwrap_or(outcome.default_format);
    let io_err = |e: io::Error| CliError::Usage(format!("cannot write output: {e}"));
    match &cfg.output_path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
            write_report(&outcome, format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)?;
            let status = if outcome.failure.is_some() { "fail" } else { "ok" };
            write_sidecar(path, &cfg, threads, status).map_err(io_err)?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_report(&outcome, format, &mut w).map_err(io_err)?;
        }
    }
    match outcome.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

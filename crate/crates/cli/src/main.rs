use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use levi_strata::config::{self, Format};
use levi_strata::report::to_json_bytes;
use levi_strata::{run, CliError, Command};

/// Levi-form nullity strata and complex-submanifold checks for real hypersurfaces.
#[derive(Debug, Parser)]
#[command(name = "levi-strata", version)]
struct Args {
    command: Command,
    /// Problem description (TOML).
    config: PathBuf,
    /// Override a config entry, e.g. `--set strata.q=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = config::load(&args.config, &args.overrides)?;
    let format = args.format.or(cfg.output.format).unwrap_or_default();
    let output = run(args.command, &cfg)?;
    let bytes = match format {
        Format::Json => to_json_bytes(&output.report),
        Format::Csv => output.table.to_csv(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("levi-strata: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

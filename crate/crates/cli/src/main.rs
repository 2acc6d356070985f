use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cavsqueeze_cli::{parse_config, run, CliError};

/// Runs one reservoir-engineering experiment described by a config file.
#[derive(Debug, Parser)]
#[command(name = "cavsqueeze", version)]
struct Args {
    /// Configuration file with one [beam], [bath], [wigner], [design] or [validate] section.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 when any regime advisory is raised.
    #[arg(long)]
    strict: bool,
    /// Field truncation override.
    #[arg(long)]
    nmax: Option<usize>,
    /// Integration step override, in units of 1/g.
    #[arg(long)]
    dt: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(args: &Args) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io { path: args.config.clone(), source })?;
    let cfg = parse_config(&text)?.with_overrides(args.nmax, args.dt);
    let dir = args.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let outcome = run(&cfg, &dir)?;
    print!("{}", outcome.table());
    for path in &outcome.files {
        println!("wrote {}", path.display());
    }
    for a in &outcome.advisories {
        eprintln!("advisory: {a}");
    }
    if args.strict && !outcome.advisories.is_empty() {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

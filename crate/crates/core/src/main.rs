use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use margin_cascade::config::{parse_config_for, Experiment, RunConfig};
use margin_cascade::runner::run_to_files;
use margin_cascade::Error;

#[derive(Parser)]
#[command(name = "margin-cascade", version, about = "Margin-trading cascade simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single cascade; writes the index/active-investor trajectory.
    Run(Common),
    /// One-parameter sweep of tau, p_inf and n_inf.
    Sweep(Common),
    /// Two-parameter phase grid.
    Phase(Common),
    /// Sweep over the number of shares per investor.
    Diversify(Common),
    /// Price decline grouped by share degree.
    MarginTimes(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output table path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replica count, overrides the config.
    #[arg(long)]
    replicas: Option<usize>,
    /// Also write a JSON summary to this path.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn load(kind: Experiment, args: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            parse_config_for(&text, Some(kind))?
        }
        None => RunConfig::defaults(kind),
    };
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    if let Some(n) = args.replicas {
        cfg.set_replicas(n)?;
    }
    if args.out.is_some() {
        cfg.out.clone_from(&args.out);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    let (kind, args) = match &cli.command {
        Command::Run(a) => (Experiment::Run, a),
        Command::Sweep(a) => (Experiment::Sweep, a),
        Command::Phase(a) => (Experiment::Phase, a),
        Command::Diversify(a) => (Experiment::Diversify, a),
        Command::MarginTimes(a) => (Experiment::MarginTimes, a),
    };

    let result = load(kind, args).and_then(|cfg| {
        let outcome = run_to_files(&cfg, cfg.out.as_deref(), args.summary.as_deref())?;
        Ok((cfg, outcome))
    });
    match result {
        Ok((cfg, outcome)) => {
            match &cfg.out {
                Some(path) => eprintln!("{}: {} -> {}", kind, outcome.headline(), path.display()),
                None => print!("{}", outcome.table()),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

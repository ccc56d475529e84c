//! `coexist` — run one experiment described by a JSON spec file.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 1 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use coexist_cli::config::{self, ModeSpec, OutputFormat, Overrides};
use coexist_cli::runner;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Thinned,
    Matern,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "coexist",
    about = "Coexistence analysis of multi-RAT unlicensed-band networks: closed forms plus Monte Carlo validation",
    version
)]
struct Cli {
    /// Experiment spec file (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Output directory for `<stem>.csv` / `<stem>.json`.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Override the spec's Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the spec's drop count.
    #[arg(long)]
    drops: Option<u64>,

    /// Override the contention mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,

    /// Override the output format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        seed: cli.seed,
        drops: cli.drops,
        mode: cli.mode.map(|m| match m {
            ModeArg::Thinned => ModeSpec::Thinned,
            ModeArg::Matern => ModeSpec::Matern,
        }),
        format: cli.format.map(|f| match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }),
    };

    let spec = match config::load_spec(&cli.config, &overrides) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    match runner::execute(&spec, &cli.out) {
        Ok(outcome) => {
            if let Some(csv) = &outcome.csv {
                println!("{}", csv.display());
            }
            println!("{}", outcome.json.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

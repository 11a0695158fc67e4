use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crawford_cli::commands::{self, RepairChoice};
use crawford_cli::verify::{self, VerifyConfig};
use crawford_cli::{CliError, CliResult};
use crawford_core::{Quantity, Strategy};

#[derive(Parser)]
#[command(name = "crawford", version, about = "Crawford numbers, repairs and refinements of finite-dimensional operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input document (stdin when absent).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Space override: JSON object or `[real:|complex:]p`, e.g. `complex:inf`.
    #[arg(long, global = true)]
    space: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// c(T), nu(T), m(T) or |T| with a certificate.
    Compute {
        #[arg(long, default_value = "crawford")]
        quantity: String,
        #[arg(long, default_value = "auto")]
        strategy: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Perturb T by less than eps to an operator attaining its Crawford number.
    Repair {
        #[arg(long)]
        eps: f64,
        /// auto, zero, compact or exposing.
        #[arg(long, default_value = "auto")]
        kind: String,
    },
    /// Jointly refine an operator and a near-attaining state.
    Bpb {
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Boundary of the numerical range (l2 only) as CSV.
    Range {
        #[arg(long, default_value_t = 360)]
        samples: usize,
    },
    /// Check a witness sequence against a claimed Crawford number.
    Witness,
    /// Minimum-attaining functional on a polytope.
    Polytope {
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Run the invariant suite and print a report.
    Verify {
        /// JSON config; defaults cover 200 instances over dims {2, 3} and all exponents.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn read_input(path: &Option<PathBuf>) -> CliResult<String> {
    let mut s = String::new();
    match path {
        Some(p) => s = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => {
            std::io::stdin().read_to_string(&mut s)?;
        }
    }
    Ok(s)
}

fn parse<T: std::str::FromStr<Err = crawford_core::Error>>(s: &str) -> CliResult<T> {
    Ok(s.parse::<T>()?)
}

/// Output text and whether the run counts as a success.
fn run(cli: &Cli) -> CliResult<(String, bool)> {
    let space = cli.space.as_deref();
    let seed = cli.seed.unwrap_or(0);
    let out = match &cli.command {
        Command::Compute { quantity, strategy, tol } => {
            let q: Quantity = parse(quantity)?;
            let st: Strategy = parse(strategy)?;
            commands::compute(&read_input(&cli.input)?, space, q, st, *tol)?
        }
        Command::Repair { eps, kind } => {
            let kind: RepairChoice = kind.parse()?;
            commands::repair(&read_input(&cli.input)?, space, *eps, seed, kind)?
        }
        Command::Bpb { eps } => commands::bpb(&read_input(&cli.input)?, space, *eps)?,
        Command::Range { samples } => commands::range(&read_input(&cli.input)?, space, *samples)?,
        Command::Witness => commands::witness(&read_input(&cli.input)?, space)?,
        Command::Polytope { eps } => commands::polytope(&read_input(&cli.input)?, *eps)?,
        Command::Verify { config } => {
            let mut cfg = match config {
                Some(p) => VerifyConfig::from_json(&commands::parse_document(&read_input(&Some(p.clone()))?)?)?,
                None => VerifyConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let report = verify::run(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            return Ok((commands::render(&report.to_json()), report.all_passed()));
        }
    };
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(text, ok)| {
        match &cli.output {
            Some(p) => std::fs::write(p, &text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("crawford: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

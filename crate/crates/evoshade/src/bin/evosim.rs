//! Drives the interactive loop headlessly, with a simulated user who always
//! picks the candidates closest to a target expression.

use std::fs::File;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use evoshade::trace::write_csv;
use evoshade_core::{run_simulation, EvolutionConfig, SimError};

#[derive(Parser, Debug)]
#[command(name = "evosim", version, about)]
struct Args {
    /// Target expression in canonical s-expression form, e.g. "(sin y)".
    #[arg(long)]
    target: String,
    #[arg(long)]
    generations: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    pop_size: usize,
    #[arg(long, default_value_t = 9)]
    display: usize,
    /// Number of candidates the simulated user selects each generation.
    #[arg(long, default_value_t = 1)]
    pick_top_k: usize,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let config = EvolutionConfig {
        population_size: args.pop_size,
        display_count: args.display,
        ..EvolutionConfig::default()
    };
    let trace = match run_simulation(&args.target, args.generations, args.seed, &config, args.pick_top_k) {
        Ok(trace) => trace,
        Err(e @ (SimError::Target(_) | SimError::NoGenerations | SimError::NoPicks | SimError::Config(_))) => {
            eprintln!("evosim: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("evosim: {e}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &args.out {
        Some(path) => File::create(path)
            .map_err(csv::Error::from)
            .and_then(|f| write_csv(&trace, io::BufWriter::new(f))),
        None => write_csv(&trace, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("evosim: writing trace: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

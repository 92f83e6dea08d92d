use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use derham_cli::{Command, Format, JobSpec};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Symplectic basis and its Gram matrix for the divisor D.
    Basis,
    /// Pairing matrix of the listed differentials.
    Pairing,
    /// Reduction of theta modulo exact forms.
    Reduce,
    /// Divisor flow trajectory plus manifest.
    Flow,
    /// Baker-Akhiezer values at the samples.
    Ba,
    /// Randomized property suite.
    Verify,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Fmt {
    Json,
    Csv,
}

/// Second-kind differentials, residue pairings and divisor flows on y^2 = P(x).
#[derive(Debug, Parser)]
#[command(name = "derham", version)]
struct Args {
    command: Cmd,
    /// Job JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Property tolerance for verify, in (0, 1e-2).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long = "t-end", default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    format: Option<Fmt>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let spec = JobSpec {
        command: match args.command {
            Cmd::Basis => Command::Basis,
            Cmd::Pairing => Command::Pairing,
            Cmd::Reduce => Command::Reduce,
            Cmd::Flow => Command::Flow,
            Cmd::Ba => Command::Ba,
            Cmd::Verify => Command::Verify,
        },
        input: args.input,
        output: args.output,
        tol: args.tol,
        steps: args.steps,
        t_end: args.t_end,
        seed: args.seed,
        format: args.format.map(|f| match f {
            Fmt::Json => Format::Json,
            Fmt::Csv => Format::Csv,
        }),
    };
    match derham_cli::run(&spec) {
        Ok(Some(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

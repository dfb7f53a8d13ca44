//! `sign-stable`: sampling, sketching, streaming, collision analytics,
//! kernel export, simulation and self-checks from the command line.
//!
//! Exit status: 0 on success, 1 on bad input, 2 on a numerical failure,
//! 3 when `verify` finds a failing check.

mod commands;

use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use commands::{
    CollideArgs, KernelArgs, SampleArgs, SimilarityArgs, SimulateArgs, SketchArgs, StreamArgs,
    VerifyArgs,
};

/// Seed used when none is given, so plain reruns reproduce.
pub const DEFAULT_SEED: u64 = 0x5eed_2014;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Random,
}

impl FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "random" {
            return Ok(SeedArg::Random);
        }
        let parsed = match s.strip_prefix("0x") {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse(),
        };
        parsed
            .map(SeedArg::Fixed)
            .map_err(|_| format!("expected an unsigned 64-bit integer or `random`, got {s:?}"))
    }
}

impl SeedArg {
    fn resolve(self) -> u64 {
        match self {
            SeedArg::Fixed(s) => s,
            SeedArg::Random => rand::random(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sign-stable", version, about = "Sign stable random projections")]
struct Cli {
    /// Master seed: an integer (decimal or 0x-hex) or `random`.
    #[arg(long, global = true, default_value_t = SeedArg::Fixed(DEFAULT_SEED), value_parser = SeedArg::from_str)]
    seed: SeedArg,

    #[command(subcommand)]
    command: Command,
}

impl std::fmt::Display for SeedArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeedArg::Fixed(s) => write!(f, "{s}"),
            SeedArg::Random => f.write_str("random"),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw i.i.d. stable variates.
    Sample(SampleArgs),
    /// Sign-sketch every vector of a sparse text file.
    Sketch(SketchArgs),
    /// Sketch a turnstile stream of updates.
    Stream(StreamArgs),
    /// Evaluate collision probabilities.
    Collide(CollideArgs),
    /// Exact similarities between vectors of a file.
    Similarity(SimilarityArgs),
    /// Export a precomputed kernel matrix.
    Kernel(KernelArgs),
    /// Run synthetic or file-driven collision experiments.
    Simulate(SimulateArgs),
    /// Numerically check the supporting inequalities and constants.
    Verify(VerifyArgs),
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn checks_failed() -> Self {
        Self {
            code: 3,
            message: "verification failed".into(),
        }
    }
}

impl From<sign_stable::Error> for Failure {
    fn from(e: sign_stable::Error) -> Self {
        Self {
            code: if e.is_numeric() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let seed = cli.seed.resolve();
    eprintln!("seed: {seed}");
    let result = match cli.command {
        Command::Sample(a) => commands::sample(a, seed),
        Command::Sketch(a) => commands::sketch(a, seed),
        Command::Stream(a) => commands::stream(a, seed),
        Command::Collide(a) => commands::collide(a, seed),
        Command::Similarity(a) => commands::similarity(a),
        Command::Kernel(a) => commands::kernel(a, seed),
        Command::Simulate(a) => commands::simulate(a, seed),
        Command::Verify(a) => commands::verify(a, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

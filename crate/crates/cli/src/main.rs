#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod analyze;
mod config;
mod manifest;
mod probes;
mod simulate;
mod topology;

use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "qfl",
    version,
    about = "Quantum-probe fault localization for optical networks"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// KL divergences and quantum speedup ratio of one probe family
    AnalyzeKl(analyze::AnalyzeArgs),
    /// Build an identifying probe set for a topology file
    BuildProbes(probes::BuildProbesArgs),
    /// Monte Carlo FL-CUSUM trials over a threshold grid
    Simulate(simulate::SimulateArgs),
    /// Write a preset topology file
    Topology(topology::TopologyArgs),
}

/// `lo:hi:count`, evenly spaced with both ends included.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.hi
                } else {
                    self.lo + step * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            bail!("expected lo:hi:count, got `{s}`");
        };
        let lo: f64 = lo
            .trim()
            .parse()
            .with_context(|| format!("bad lower bound `{lo}`"))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .with_context(|| format!("bad upper bound `{hi}`"))?;
        let count: usize = count
            .trim()
            .parse()
            .with_context(|| format!("bad count `{count}`"))?;
        if count == 0 {
            bail!("count must be at least 1");
        }
        if !lo.is_finite() || !hi.is_finite() {
            bail!("bounds must be finite");
        }
        if count > 1 && !(hi > lo) {
            bail!("upper bound must exceed lower bound");
        }
        Ok(Grid { lo, hi, count })
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::AnalyzeKl(args) => analyze::run(args),
        Command::BuildProbes(args) => probes::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Topology(args) => topology::run(args),
    }
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args_os().collect()) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

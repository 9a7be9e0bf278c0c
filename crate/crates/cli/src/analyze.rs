use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use qfl::sim::format_g6;
use qfl::stats::{
    classical_kl, lemma2_thresholds, quantum_kl_per_pulse, speedup_ratio_qn, squeeze_db_to_na,
    ProbeParams,
};

use crate::Grid;

pub const DEFAULT_SQUEEZE_DB: f64 = 6.0;

/// Probe family knobs shared by several subcommands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ProbeArgs {
    /// Mean signal photons per pulse
    #[arg(long = "N", default_value_t = 100.0)]
    pub n_signal: f64,
    /// Mean squeezing photons per pulse
    #[arg(long = "Na", conflicts_with = "squeeze_db")]
    pub n_aug: Option<f64>,
    /// Squeezing in dB, converted to photons per pulse [default: 6 when --Na is absent]
    #[arg(long = "squeeze-db")]
    pub squeeze_db: Option<f64>,
    /// Pulses per entangled block
    #[arg(long = "n", default_value_t = 1)]
    pub block: usize,
}

impl ProbeArgs {
    pub fn n_aug(&self) -> f64 {
        match (self.n_aug, self.squeeze_db) {
            (Some(na), _) => na,
            (None, Some(db)) => squeeze_db_to_na(db),
            (None, None) => squeeze_db_to_na(DEFAULT_SQUEEZE_DB),
        }
    }

    pub fn params(&self) -> Result<ProbeParams<f64>> {
        Ok(ProbeParams::quantum(
            self.n_signal,
            self.n_aug(),
            self.block,
        )?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub probe: ProbeArgs,
    /// Pre-change channel transmissivity
    #[arg(long, default_value_t = 0.9)]
    pub eta: f64,
    /// Multiplicative transmissivity drop
    #[arg(long = "eta-d", default_value_t = 0.95)]
    pub eta_d: f64,
    /// Emit CSV over `var=lo:hi:count`; var is one of N, Na, squeeze-db, n, eta, eta-d
    #[arg(long)]
    pub sweep: Option<Sweep>,
    /// key=value file with default flag values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    NSignal,
    NAug,
    SqueezeDb,
    Block,
    Eta,
    EtaD,
}

#[derive(Debug, Clone, Copy)]
pub struct Sweep {
    pub var: SweepVar,
    pub grid: Grid,
}

impl FromStr for Sweep {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, range) = s.split_once('=').context("expected var=lo:hi:count")?;
        let var = match name.trim() {
            "N" => SweepVar::NSignal,
            "Na" => SweepVar::NAug,
            "squeeze-db" | "squeeze_db" => SweepVar::SqueezeDb,
            "n" => SweepVar::Block,
            "eta" => SweepVar::Eta,
            "eta-d" | "eta_d" => SweepVar::EtaD,
            other => bail!("cannot sweep `{other}` (expected N, Na, squeeze-db, n, eta or eta-d)"),
        };
        Ok(Sweep {
            var,
            grid: range.parse()?,
        })
    }
}

struct Point {
    n_signal: f64,
    n_aug: f64,
    block: usize,
    eta: f64,
    eta_d: f64,
}

impl Point {
    fn params(&self) -> Result<ProbeParams<f64>> {
        Ok(ProbeParams::quantum(self.n_signal, self.n_aug, self.block)?)
    }
}

struct Evaluation {
    classical: f64,
    quantum: f64,
    ratio: f64,
}

fn evaluate(p: &Point) -> Result<Evaluation> {
    let params = p.params()?;
    Ok(Evaluation {
        classical: classical_kl(&params.classical_comparator(), p.eta, p.eta_d)?,
        quantum: quantum_kl_per_pulse(&params, p.eta, p.eta_d)?,
        ratio: speedup_ratio_qn(&params, p.eta, p.eta_d)?,
    })
}

fn table(p: &Point) -> Result<String> {
    let ev = evaluate(p)?;
    let params = p.params()?;
    let lemma = lemma2_thresholds(&params, p.eta, p.eta_d)?;
    let threshold = |r: &Result<f64, qfl::stats::StatsError>| match r {
        Ok(v) => format_g6(*v),
        Err(e) => format!("n/a ({e})"),
    };
    let rows: Vec<(&str, String)> = vec![
        ("N", format_g6(p.n_signal)),
        ("N_a", format_g6(p.n_aug)),
        ("n", p.block.to_string()),
        ("eta", format_g6(p.eta)),
        ("eta_d", format_g6(p.eta_d)),
        ("classical_kl", format_g6(ev.classical)),
        ("quantum_kl", format_g6(ev.quantum)),
        ("q_n", format_g6(ev.ratio)),
        ("b_d", format_g6(lemma.b_d)),
        ("n0", threshold(&lemma.n0)),
        ("N_a0", threshold(&lemma.na0)),
        ("signal_threshold", format_g6(lemma.signal_threshold)),
        ("q_n[eta->0]", format_g6(lemma.limit_eta0)),
        ("q_n[eta_d->1]", format_g6(lemma.limit_etad1)),
        ("q_n[N->inf]", format_g6(lemma.limit_n_signal_inf)),
        ("q_n[n->inf]", format_g6(lemma.limit_block_inf)),
    ];
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<18}{v}");
    }
    Ok(out)
}

fn sweep_csv(base: &AnalyzeArgs, sweep: Sweep) -> Result<String> {
    let mut out = String::from("N,Na,n,eta,eta_d,classical_kl,quantum_kl,q_n\n");
    for v in sweep.grid.values() {
        let mut p = Point {
            n_signal: base.probe.n_signal,
            n_aug: base.probe.n_aug(),
            block: base.probe.block,
            eta: base.eta,
            eta_d: base.eta_d,
        };
        match sweep.var {
            SweepVar::NSignal => p.n_signal = v,
            SweepVar::NAug => p.n_aug = v,
            SweepVar::SqueezeDb => p.n_aug = squeeze_db_to_na(v),
            SweepVar::Block => {
                if v.fract() != 0.0 || v < 1.0 {
                    bail!("block size must be a positive integer, got {v}");
                }
                p.block = v as usize;
            }
            SweepVar::Eta => p.eta = v,
            SweepVar::EtaD => p.eta_d = v,
        }
        let ev = evaluate(&p)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_g6(p.n_signal),
            format_g6(p.n_aug),
            p.block,
            format_g6(p.eta),
            format_g6(p.eta_d),
            format_g6(ev.classical),
            format_g6(ev.quantum),
            format_g6(ev.ratio)
        );
    }
    Ok(out)
}

pub fn run(args: AnalyzeArgs) -> Result<()> {
    let text = match args.sweep {
        Some(sweep) => sweep_csv(&args, sweep)?,
        None => table(&Point {
            n_signal: args.probe.n_signal,
            n_aug: args.probe.n_aug(),
            block: args.probe.block,
            eta: args.eta,
            eta_d: args.eta_d,
        })?,
    };
    print!("{text}");
    Ok(())
}

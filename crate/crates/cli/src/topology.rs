use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use qfl::network::format::write_topology;
use qfl::sim::Preset;

#[derive(Debug, Clone, Args)]
pub struct TopologyArgs {
    /// line5 or fattree3
    #[arg(long, default_value = "line5")]
    pub preset: String,
    /// Per-link transmissivity
    #[arg(long, default_value_t = 0.9)]
    pub eta: f64,
    /// Leave out the preset's reference probes
    #[arg(long = "no-probes")]
    pub no_probes: bool,
    /// Destination file; standard output when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// key=value file with default flag values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(args: TopologyArgs) -> Result<()> {
    let preset: Preset = args.preset.parse().map_err(anyhow::Error::msg)?;
    let (net, probes, _) = preset.topology(args.eta)?;
    let probes = if args.no_probes { Vec::new() } else { probes };
    let text = format!(
        "# {} preset, eta = {}\n{}",
        preset.name(),
        args.eta,
        write_topology(&net, &probes)
    );
    match &args.output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

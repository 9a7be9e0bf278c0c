use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::Utc;
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qfl::network::format::{parse_topology, write_probes, Topology};
use qfl::network::{check_identifiable, FaultFamily, FaultSet, Identifiability, Network, Probe};
use qfl::sim::{format_g6, Preset};
use qfl::tomography::{construct_probes, max_probe_length, TomographyError};

use crate::manifest::{self, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeSource {
    /// Run the min-max probe construction
    Construct,
    /// Use the probes listed in the file, or the preset's own probes
    Builtin,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BuildProbesArgs {
    /// Topology file
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long, value_enum, default_value_t = ProbeSource::Construct)]
    pub probes: ProbeSource,
    /// Probe file to write; standard output when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Manifest path [default: next to --output]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// key=value file with default flag values
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn fault_label(net: &Network<f64>, fault: &FaultSet) -> String {
    if fault.is_empty() {
        return "{}".into();
    }
    let labels: Vec<String> = fault.iter().map(|&e| net.edge_label(e)).collect();
    format!("{{{}}}", labels.join(","))
}

fn same_shape(a: &Network<f64>, b: &Network<f64>) -> bool {
    a.vertices() == b.vertices()
        && a.monitors() == b.monitors()
        && a.edges()
            .iter()
            .map(|e| (e.u, e.v))
            .eq(b.edges().iter().map(|e| (e.u, e.v)))
}

fn builtin_probes(topo: &Topology<f64>) -> Result<Vec<Probe>> {
    if !topo.probes.is_empty() {
        return Ok(topo.probes.clone());
    }
    for preset in [Preset::Line5, Preset::FatTree3] {
        let (net, probes, _) = preset.topology(0.9)?;
        if same_shape(&net, &topo.network) {
            return Ok(probes);
        }
    }
    bail!("the topology file lists no probes and does not match a preset with builtin probes")
}

/// Probes for the single-link fault family of `topo`, checked for identifiability.
pub fn resolve_probes(topo: &Topology<f64>, source: ProbeSource) -> Result<Vec<Probe>> {
    let net = &topo.network;
    let family = FaultFamily::single_link(net);
    let probes = match source {
        ProbeSource::Construct => construct_probes(net, &family).map_err(|e| match e {
            TomographyError::Indistinguishable { first, second } => anyhow!(
                "not identifiable: fault sets {} and {} cannot be distinguished by any probe",
                fault_label(net, &first),
                fault_label(net, &second)
            ),
            other => other.into(),
        })?,
        ProbeSource::Builtin => builtin_probes(topo)?,
    };
    if let Identifiability::Indistinguishable { first, second } =
        check_identifiable(&probes, &family)
    {
        bail!(
            "not identifiable: fault sets {} and {} produce the same probe outcomes",
            fault_label(net, &family.faults()[first]),
            fault_label(net, &family.faults()[second])
        );
    }
    Ok(probes)
}

pub fn load_topology(path: &Path) -> Result<(Topology<f64>, String)> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading topology {}", path.display()))?;
    let topo = parse_topology(&text).with_context(|| format!("in {}", path.display()))?;
    Ok((topo, text))
}

pub fn summary(net: &Network<f64>, probes: &[Probe]) -> String {
    let longest = max_probe_length(net, probes).unwrap_or(0.0);
    let traversals = probes.iter().map(Probe::traversals).max().unwrap_or(0);
    format!(
        "{} probes, max length {} (-ln transmissivity), max {} link traversals",
        probes.len(),
        format_g6(longest),
        traversals
    )
}

pub fn run(args: BuildProbesArgs) -> Result<()> {
    if args.manifest.is_some() && args.output.is_none() {
        bail!("--manifest needs --output");
    }
    let started = Utc::now();
    let (topo, text) = load_topology(&args.topology)?;
    let probes = resolve_probes(&topo, args.probes)?;
    let lines = write_probes(&probes);
    let summary = summary(&topo.network, &probes);
    match &args.output {
        Some(path) => {
            fs::write(path, &lines).with_context(|| format!("writing {}", path.display()))?;
            println!("{summary}");
            let mut m = RunManifest::new(
                "build-probes",
                None,
                started,
                json!({ "args": &args, "topology_text": text }),
            );
            m.outputs.push(path.display().to_string());
            m.results = json!({ "summary": summary });
            let mpath = args
                .manifest
                .clone()
                .unwrap_or_else(|| manifest::default_path(path));
            m.write(&mpath)?;
        }
        None => {
            print!("{lines}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

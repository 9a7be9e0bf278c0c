use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use chrono::Utc;
use clap::Args;
use serde::Serialize;
use serde_json::json;

use qfl::network::format::Topology;
use qfl::network::{EdgeId, Network, VertexId};
use qfl::sim::{default_horizon, format_g6, run_sweep, FaultSpec, Preset, ScenarioConfig};
use qfl::stats::ProbeKind;

use crate::analyze::ProbeArgs;
use crate::manifest::{self, RunManifest};
use crate::probes::{load_topology, resolve_probes, ProbeSource};
use crate::Grid;

/// `u-v`, or `none` for a fault-free run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultEdge {
    Link(VertexId, VertexId),
    None,
}

impl FromStr for FaultEdge {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(FaultEdge::None);
        }
        let (a, b) = s.split_once('-').context("expected u-v or none")?;
        Ok(FaultEdge::Link(
            a.trim()
                .parse()
                .with_context(|| format!("bad vertex `{a}`"))?,
            b.trim()
                .parse()
                .with_context(|| format!("bad vertex `{b}`"))?,
        ))
    }
}

impl std::fmt::Display for FaultEdge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FaultEdge::Link(a, b) => write!(f, "{a}-{b}"),
            FaultEdge::None => f.write_str("none"),
        }
    }
}

impl Serialize for FaultEdge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Preset network: line5 or fattree3
    #[arg(long, conflicts_with = "topology")]
    pub scenario: Option<String>,
    /// Topology file; probes come from the file or are constructed
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// Per-link transmissivity of the preset networks
    #[arg(long, default_value_t = 0.9)]
    pub eta: f64,
    /// Comma-separated probe families
    #[arg(long, value_delimiter = ',', default_values_t = vec!["classical".to_string(), "quantum".to_string()])]
    pub families: Vec<String>,
    /// Threshold grid lo:hi:count
    #[arg(long = "h", default_value = "10:50:5")]
    #[serde(serialize_with = "serialize_display")]
    pub h: Grid,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Faulty link `u-v`, or `none` [default: the preset's faulty link]
    #[arg(long = "fault-edge")]
    pub fault_edge: Option<FaultEdge>,
    /// Transmissivity drop on the faulty link
    #[arg(long = "eta-d", default_value_t = 0.95)]
    pub eta_d: f64,
    /// Change point (first faulty step)
    #[arg(long, default_value_t = 1000)]
    pub nu: u64,
    /// Step limit per trial [default: max(50*nu, 10000)]
    #[arg(long)]
    pub horizon: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub probe: ProbeArgs,
    /// CSV destination; standard output when absent
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

fn serialize_display<S: serde::Serializer, D: std::fmt::Display>(
    v: &D,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn find_link(net: &Network<f64>, a: VertexId, b: VertexId) -> Result<EdgeId> {
    net.find_edge(a, b)
        .with_context(|| format!("no link between {a} and {b}"))
}

struct Resolved {
    config: ScenarioConfig<f64>,
    topology_text: Option<String>,
}

fn resolve(args: &mut SimulateArgs) -> Result<Resolved> {
    let (network, probes, default_edge, topology_text) = match &args.topology {
        Some(path) => {
            let (topo, text) = load_topology(path)?;
            let source = if topo.probes.is_empty() {
                ProbeSource::Construct
            } else {
                ProbeSource::Builtin
            };
            let probes = resolve_probes(&topo, source)?;
            let Topology { network, .. } = topo;
            (network, probes, None, Some(text))
        }
        None => {
            let name = args.scenario.get_or_insert_with(|| "line5".into());
            let preset: Preset = name.parse().map_err(anyhow::Error::msg)?;
            let (net, probes, e) = preset.topology(args.eta)?;
            (net, probes, Some(e), None)
        }
    };

    let fault_edge = match args.fault_edge {
        Some(FaultEdge::Link(a, b)) => Some(find_link(&network, a, b)?),
        Some(FaultEdge::None) => None,
        None => match default_edge {
            Some(e) => Some(e),
            None => {
                bail!("--fault-edge is required with --topology (use `none` for a fault-free run)")
            }
        },
    };
    if let Some(e) = fault_edge {
        let edge = network.edge(e)?;
        args.fault_edge = Some(FaultEdge::Link(edge.u, edge.v));
    }

    let mut families = Vec::new();
    for f in &args.families {
        let kind: ProbeKind = f.trim().parse().map_err(anyhow::Error::msg)?;
        if !families.contains(&kind) {
            families.push(kind);
        }
    }
    let horizon = *args.horizon.get_or_insert(default_horizon(args.nu));

    let config = ScenarioConfig {
        network,
        probes,
        params: args.probe.params()?,
        families,
        eta_d: args.eta_d,
        fault: fault_edge.map(|edge| FaultSpec {
            edge,
            eta_d: args.eta_d,
            change_point: args.nu,
        }),
        thresholds: args.h.values(),
        trials: args.trials,
        seed: args.seed,
        horizon,
    };
    config.validate()?;
    Ok(Resolved {
        config,
        topology_text,
    })
}

pub fn run(mut args: SimulateArgs) -> Result<()> {
    if args.manifest.is_some() && args.output.is_none() {
        bail!("--manifest needs --output");
    }
    let started = Utc::now();
    let resolved = resolve(&mut args)?;
    let result = run_sweep(&resolved.config)?;
    let csv = result.to_csv();

    let mut fits = serde_json::Map::new();
    let mut slopes = Vec::new();
    for &family in &resolved.config.families {
        if let Some(fit) = result.latency_fit(family) {
            slopes.push((family, fit.slope));
            fits.insert(
                family.to_string(),
                json!({ "slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared }),
            );
        }
    }
    let ratio = match (
        slopes.iter().find(|s| s.0 == ProbeKind::Classical),
        slopes.iter().find(|s| s.0 == ProbeKind::Quantum),
    ) {
        (Some(c), Some(q)) => Some(c.1 / q.1),
        _ => None,
    };

    match &args.output {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            for (family, slope) in &slopes {
                println!("{family}: latency slope {} per unit h", format_g6(*slope));
            }
            if let Some(r) = ratio {
                println!("classical/quantum slope ratio {}", format_g6(r));
            }
            let mut m = RunManifest::new(
                "simulate",
                Some(args.seed),
                started,
                json!({
                    "args": &args,
                    "resolved_n_aug": resolved.config.params.n_aug,
                    "topology_text": resolved.topology_text,
                }),
            );
            m.outputs.push(path.display().to_string());
            m.results = json!({ "latency_fits": fits, "slope_ratio": ratio });
            let mpath = args
                .manifest
                .clone()
                .unwrap_or_else(|| manifest::default_path(path));
            m.write(&mpath)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

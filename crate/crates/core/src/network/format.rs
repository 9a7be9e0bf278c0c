//! Line-oriented topology files.
//!
//! ```text
//! # comment
//! node <id> [monitor]
//! edge <u> <v> <eta>
//! probe <v0> <v1> ... <vk>
//! ```
//!
//! Records may appear in any order. Every vertex referenced by an `edge` or
//! `probe` record must be declared by a `node` record.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::{Network, NetworkError, Probe, VertexId};
use crate::scalar::{in_open_unit, Real};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("malformed `{keyword}` record: {detail}")]
    Malformed {
        keyword: &'static str,
        detail: String,
    },
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("vertex {0} is declared twice")]
    DuplicateNode(VertexId),
    #[error("vertex {0} is not declared by a `node` record")]
    UndeclaredVertex(VertexId),
    #[error("no node is marked as monitor")]
    NoMonitors,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// A parsed topology file.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology<T> {
    pub network: Network<T>,
    pub probes: Vec<Probe>,
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn parse_vertex(line: usize, tok: &str) -> Result<VertexId, ParseError> {
    tok.parse()
        .map_err(|_| err(line, ParseErrorKind::BadNumber(tok.to_owned())))
}

pub fn parse_topology<T: Real>(text: &str) -> Result<Topology<T>, ParseError> {
    let mut nodes: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut monitors = BTreeSet::new();
    let mut edges: Vec<(usize, VertexId, VertexId, f64)> = Vec::new();
    let mut probes: Vec<(usize, Vec<VertexId>)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        let rest: Vec<&str> = tokens.collect();
        match keyword {
            "node" => {
                let (id, monitor) = match rest.as_slice() {
                    [id] => (parse_vertex(line, id)?, false),
                    [id, "monitor"] => (parse_vertex(line, id)?, true),
                    _ => {
                        return Err(err(
                            line,
                            ParseErrorKind::Malformed {
                                keyword: "node",
                                detail: "expected `node <id> [monitor]`".into(),
                            },
                        ))
                    }
                };
                if nodes.insert(id, line).is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateNode(id)));
                }
                if monitor {
                    monitors.insert(id);
                }
            }
            "edge" => {
                let [u, v, eta] = rest.as_slice() else {
                    return Err(err(
                        line,
                        ParseErrorKind::Malformed {
                            keyword: "edge",
                            detail: "expected `edge <u> <v> <eta>`".into(),
                        },
                    ));
                };
                let u = parse_vertex(line, u)?;
                let v = parse_vertex(line, v)?;
                let eta: f64 = eta
                    .parse()
                    .map_err(|_| err(line, ParseErrorKind::BadNumber((*eta).to_owned())))?;
                edges.push((line, u, v, eta));
            }
            "probe" => {
                if rest.is_empty() {
                    return Err(err(
                        line,
                        ParseErrorKind::Malformed {
                            keyword: "probe",
                            detail: "expected `probe <v0> <v1> ...`".into(),
                        },
                    ));
                }
                let walk = rest
                    .iter()
                    .map(|t| parse_vertex(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                probes.push((line, walk));
            }
            other => return Err(err(line, ParseErrorKind::UnknownKeyword(other.to_owned()))),
        }
    }

    if monitors.is_empty() {
        return Err(err(last_line, ParseErrorKind::NoMonitors));
    }

    let mut seen_links = BTreeSet::new();
    for &(line, u, v, eta) in &edges {
        for end in [u, v] {
            if !nodes.contains_key(&end) {
                return Err(err(line, ParseErrorKind::UndeclaredVertex(end)));
            }
        }
        if u == v {
            return Err(err(line, NetworkError::SelfLoop(u).into()));
        }
        if !in_open_unit(eta) {
            return Err(err(
                line,
                NetworkError::InvalidTransmissivity { u, v, eta }.into(),
            ));
        }
        if !seen_links.insert((u.min(v), u.max(v))) {
            return Err(err(
                line,
                NetworkError::DuplicateEdge(u.min(v), u.max(v)).into(),
            ));
        }
    }

    let network = Network::new(
        nodes.keys().copied(),
        monitors.iter().copied(),
        edges.iter().map(|&(_, u, v, eta)| (u, v, T::lit(eta))),
    )
    .map_err(|e| err(last_line, e.into()))?;

    let probes = probes
        .into_iter()
        .map(|(line, walk)| {
            if let Some(&v) = walk.iter().find(|v| !nodes.contains_key(v)) {
                return Err(err(line, ParseErrorKind::UndeclaredVertex(v)));
            }
            Probe::from_walk(&network, &walk).map_err(|e| err(line, e.into()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Topology { network, probes })
}

/// One `probe v0 v1 ... vk` line per probe.
pub fn write_probes(probes: &[Probe]) -> String {
    let mut out = String::new();
    for p in probes {
        out.push_str("probe");
        for v in p.vertices() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

/// Serializes a network (and optionally probes) in the format read by
/// [`parse_topology`]. Edges keep their id order.
pub fn write_topology<T: Real>(network: &Network<T>, probes: &[Probe]) -> String {
    let mut out = String::new();
    for &v in network.vertices() {
        if network.is_monitor(v) {
            let _ = writeln!(out, "node {v} monitor");
        } else {
            let _ = writeln!(out, "node {v}");
        }
    }
    for e in network.edges() {
        let _ = writeln!(out, "edge {} {} {}", e.u, e.v, e.eta.as_f64());
    }
    out.push_str(&write_probes(probes));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_fattree_topology, build_line_topology, line_reference_probes};

    const LINE2: &str = "\
# two links
node 0 monitor
node 1
node 2 monitor   # far end
edge 0 1 0.9
edge 1 2 0.8
probe 0 1 2
probe 0 1 0
";

    #[test]
    fn parses_small_file() {
        let topo: Topology<f64> = parse_topology(LINE2).unwrap();
        assert_eq!(topo.network.num_vertices(), 3);
        assert_eq!(topo.network.num_edges(), 2);
        assert_eq!(topo.probes.len(), 2);
        assert_eq!(topo.network.edges()[1].eta, 0.8);
    }

    #[test]
    fn round_trips_presets() {
        let net = build_line_topology(5, 0.9f64).unwrap();
        let probes = line_reference_probes(&net).unwrap();
        let text = write_topology(&net, &probes);
        let back: Topology<f64> = parse_topology(&text).unwrap();
        assert_eq!(back.network, net);
        assert_eq!(back.probes, probes);

        let (net, probes) = build_fattree_topology(0.9f64).unwrap();
        let back: Topology<f64> = parse_topology(&write_topology(&net, &probes)).unwrap();
        assert_eq!(back.network, net);
        assert_eq!(back.probes, probes);
    }

    fn line_of(text: &str) -> (usize, ParseErrorKind) {
        let e = parse_topology::<f64>(text).unwrap_err();
        (e.line, e.kind)
    }

    #[test]
    fn strict_errors_carry_line_numbers() {
        assert_eq!(
            line_of("node 0 monitor\nlink 0 1 0.9\n"),
            (2, ParseErrorKind::UnknownKeyword("link".into()))
        );
        assert_eq!(
            line_of("node 0 monitor\nedge 0 3 0.9\n"),
            (2, ParseErrorKind::UndeclaredVertex(3))
        );
        assert_eq!(
            line_of(
                "node 0 monitor\nnode 1\nnode 2 monitor\nedge 0 1 0.9\nedge 1 2 0.9\nprobe 0 1\n"
            ),
            (
                6,
                ParseErrorKind::Network(NetworkError::EndpointNotMonitor(1))
            )
        );
        assert_eq!(
            line_of("node 0\nnode 1\nedge 0 1 0.9\n"),
            (3, ParseErrorKind::NoMonitors)
        );
        assert_eq!(
            line_of("node 0 monitor\nnode 1\nedge 0 1 1.0\n"),
            (
                3,
                ParseErrorKind::Network(NetworkError::InvalidTransmissivity {
                    u: 0,
                    v: 1,
                    eta: 1.0
                })
            )
        );
        assert_eq!(
            line_of("node 0 monitor\nnode 0\n"),
            (2, ParseErrorKind::DuplicateNode(0))
        );
        assert_eq!(
            line_of("node 0 monitor\nnode 1\nedge 0 1 x\n"),
            (3, ParseErrorKind::BadNumber("x".into()))
        );
        assert!(matches!(
            line_of("node 0 primary\n"),
            (
                1,
                ParseErrorKind::Malformed {
                    keyword: "node",
                    ..
                }
            )
        ));
        assert_eq!(
            line_of("node 0 monitor\nnode 1\nedge 0 1 0.9\nedge 1 0 0.8\n"),
            (
                4,
                ParseErrorKind::Network(NetworkError::DuplicateEdge(0, 1))
            )
        );
    }

    #[test]
    fn error_display_names_line() {
        let e = parse_topology::<f64>("node 0 monitor\nfoo\n").unwrap_err();
        assert_eq!(e.to_string(), "line 2: unknown keyword `foo`");
    }
}

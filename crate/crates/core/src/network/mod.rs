//! Optical network graph, probes as monitor-to-monitor walks, fault families
//! and the identifiability relation between them.

mod builders;
pub mod format;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use bitvec::vec::BitVec;
use thiserror::Error;

use crate::scalar::{in_open_unit, Real};

pub use builders::{build_fattree_topology, build_line_topology, line_reference_probes};

/// Vertex identifier as it appears in topology files.
pub type VertexId = u32;

/// Index of an edge in [`Network::edges`]. Edge ids follow insertion order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A set of simultaneously faulty edges.
pub type FaultSet = BTreeSet<EdgeId>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("transmissivity {eta} of link ({u},{v}) is outside (0,1)")]
    InvalidTransmissivity { u: VertexId, v: VertexId, eta: f64 },
    #[error("vertex {0} is declared twice")]
    DuplicateVertex(VertexId),
    #[error("vertex {0} is not part of the network")]
    UnknownVertex(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("link ({0},{1}) is declared twice")]
    DuplicateEdge(VertexId, VertexId),
    #[error("topology must contain at least one link")]
    NoLinks,
    #[error("network has no monitors")]
    NoMonitors,
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("no link between {0} and {1}")]
    NoSuchLink(VertexId, VertexId),
    #[error("probe walk must traverse at least one link")]
    EmptyWalk,
    #[error("probe endpoint {0} is not a monitor")]
    EndpointNotMonitor(VertexId),
    #[error("fault set #{0} is listed twice")]
    DuplicateFault(usize),
}

/// Undirected link with its transmissivity. Endpoints are stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub u: VertexId,
    pub v: VertexId,
    pub eta: T,
}

impl<T: Real> Edge<T> {
    /// `-ln(eta)`, in nats.
    pub fn weight(&self) -> T {
        -self.eta.ln()
    }

    pub fn other(&self, end: VertexId) -> VertexId {
        if end == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Weighted undirected graph with a designated monitor set. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    vertices: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
    monitors: BTreeSet<VertexId>,
    edges: Vec<Edge<T>>,
    lookup: BTreeMap<(VertexId, VertexId), EdgeId>,
    adjacency: Vec<Vec<(usize, EdgeId)>>,
}

fn ordered(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl<T: Real> Network<T> {
    /// Builds and validates a network. Edge ids are assigned in iteration order.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        monitors: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId, T)>,
    ) -> Result<Self, NetworkError> {
        let mut index = BTreeMap::new();
        for v in vertices {
            if index.insert(v, 0).is_some() {
                return Err(NetworkError::DuplicateVertex(v));
            }
        }
        let vertices: Vec<VertexId> = index.keys().copied().collect();
        for (i, v) in vertices.iter().enumerate() {
            index.insert(*v, i);
        }

        let mut monitor_set = BTreeSet::new();
        for m in monitors {
            if !index.contains_key(&m) {
                return Err(NetworkError::UnknownVertex(m));
            }
            monitor_set.insert(m);
        }
        if monitor_set.is_empty() {
            return Err(NetworkError::NoMonitors);
        }

        let mut adjacency = vec![Vec::new(); vertices.len()];
        let mut lookup = BTreeMap::new();
        let mut edge_list = Vec::new();
        for (a, b, eta) in edges {
            let (u, v) = ordered(a, b);
            if u == v {
                return Err(NetworkError::SelfLoop(u));
            }
            let (Some(&iu), Some(&iv)) = (index.get(&u), index.get(&v)) else {
                let missing = if index.contains_key(&u) { v } else { u };
                return Err(NetworkError::UnknownVertex(missing));
            };
            if !in_open_unit(eta) {
                return Err(NetworkError::InvalidTransmissivity {
                    u,
                    v,
                    eta: eta.as_f64(),
                });
            }
            let id = EdgeId(edge_list.len());
            if lookup.insert((u, v), id).is_some() {
                return Err(NetworkError::DuplicateEdge(u, v));
            }
            adjacency[iu].push((iv, id));
            adjacency[iv].push((iu, id));
            edge_list.push(Edge { u, v, eta });
        }

        Ok(Self {
            vertices,
            index,
            monitors: monitor_set,
            edges: edge_list,
            lookup,
            adjacency,
        })
    }

    /// Vertex ids in ascending order; position in this slice is the dense vertex index.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn monitors(&self) -> &BTreeSet<VertexId> {
        &self.monitors
    }

    pub fn is_monitor(&self, v: VertexId) -> bool {
        self.monitors.contains(&v)
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge<T>, NetworkError> {
        self.edges.get(e.0).ok_or(NetworkError::UnknownEdge(e))
    }

    /// Weight `-ln(eta_e)` of an edge, in nats.
    pub fn edge_weight(&self, e: EdgeId) -> Result<T, NetworkError> {
        self.edge(e).map(Edge::weight)
    }

    pub fn find_edge(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.lookup.get(&ordered(a, b)).copied()
    }

    pub fn vertex_index(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// Neighbours of the vertex with dense index `i`, as `(neighbour index, edge)`.
    pub(crate) fn neighbors(&self, i: usize) -> &[(usize, EdgeId)] {
        &self.adjacency[i]
    }

    /// Human-readable `(u,v)` label.
    pub fn edge_label(&self, e: EdgeId) -> String {
        match self.edges.get(e.0) {
            Some(edge) => format!("({},{})", edge.u, edge.v),
            None => e.to_string(),
        }
    }
}

/// A walk between two monitors, kept both as a vertex sequence and as per-edge
/// traversal counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Probe {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
    multiplicity: BTreeMap<EdgeId, u32>,
}

impl Probe {
    /// Validates `walk` against `network`: at least one hop, every hop a link,
    /// both endpoints monitors.
    pub fn from_walk<T: Real>(
        network: &Network<T>,
        walk: &[VertexId],
    ) -> Result<Self, NetworkError> {
        if walk.len() < 2 {
            return Err(NetworkError::EmptyWalk);
        }
        for &v in walk {
            if network.vertex_index(v).is_none() {
                return Err(NetworkError::UnknownVertex(v));
            }
        }
        for &end in [walk[0], walk[walk.len() - 1]].iter() {
            if !network.is_monitor(end) {
                return Err(NetworkError::EndpointNotMonitor(end));
            }
        }
        let mut edges = Vec::with_capacity(walk.len() - 1);
        let mut multiplicity = BTreeMap::new();
        for hop in walk.windows(2) {
            let e = network
                .find_edge(hop[0], hop[1])
                .ok_or(NetworkError::NoSuchLink(hop[0], hop[1]))?;
            edges.push(e);
            *multiplicity.entry(e).or_insert(0) += 1;
        }
        Ok(Self {
            vertices: walk.to_vec(),
            edges,
            multiplicity,
        })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Edges in traversal order, repeated once per traversal.
    pub fn traversed_edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn traversals(&self) -> usize {
        self.edges.len()
    }

    pub fn multiplicity(&self, e: EdgeId) -> u32 {
        self.multiplicity.get(&e).copied().unwrap_or(0)
    }

    pub fn covers(&self, e: EdgeId) -> bool {
        self.multiplicity.contains_key(&e)
    }

    pub fn intersects(&self, fault: &FaultSet) -> bool {
        fault.iter().any(|e| self.covers(*e))
    }

    /// Distinct edges on the walk, ascending.
    pub fn edge_set(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.multiplicity.keys().copied()
    }

    /// `l(P)`: sum of edge weights, counted once per traversal.
    pub fn length<T: Real>(&self, network: &Network<T>) -> T {
        self.multiplicity
            .iter()
            .map(|(e, m)| network.edges[e.0].weight() * T::from_count(*m as usize))
            .sum()
    }

    /// End-to-end transmissivity, optionally with a drop `eta_d` applied once per
    /// traversal of the faulty edge.
    pub fn transmissivity<T: Real>(&self, network: &Network<T>, fault: Option<(EdgeId, T)>) -> T {
        let mut eta = T::one();
        for (e, m) in &self.multiplicity {
            eta = eta * network.edges[e.0].eta.powi(*m as i32);
        }
        if let Some((faulty, drop)) = fault {
            eta = eta * drop.powi(self.multiplicity(faulty) as i32);
        }
        eta
    }
}

/// Transmissivity of `probe`, with an optional `(edge, eta_d)` fault applied.
pub fn probe_transmissivity<T: Real>(
    network: &Network<T>,
    probe: &Probe,
    fault: Option<(EdgeId, T)>,
) -> T {
    probe.transmissivity(network, fault)
}

/// Indices of the probes traversing `e` at least once.
pub fn probes_covering(probes: &[Probe], e: EdgeId) -> Vec<usize> {
    probes
        .iter()
        .enumerate()
        .filter(|(_, p)| p.covers(e))
        .map(|(i, _)| i)
        .collect()
}

/// Membership bit-vector of `P_F`: bit `i` is set iff probe `i` meets the fault set.
pub fn fault_signature(probes: &[Probe], fault: &FaultSet) -> BitVec {
    probes.iter().map(|p| p.intersects(fault)).collect()
}

/// The collection of fault sets that must be told apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultFamily {
    faults: Vec<FaultSet>,
}

impl FaultFamily {
    pub fn new<T: Real>(network: &Network<T>, faults: Vec<FaultSet>) -> Result<Self, NetworkError> {
        for fault in &faults {
            for e in fault {
                network.edge(*e)?;
            }
        }
        let mut seen = HashMap::new();
        for (i, fault) in faults.iter().enumerate() {
            if seen.insert(fault, i).is_some() {
                return Err(NetworkError::DuplicateFault(i));
            }
        }
        Ok(Self { faults })
    }

    /// The empty set followed by every single-edge fault set.
    pub fn single_link<T: Real>(network: &Network<T>) -> Self {
        let mut faults = vec![FaultSet::new()];
        faults.extend(network.edge_ids().map(|e| FaultSet::from([e])));
        Self { faults }
    }

    pub fn faults(&self) -> &[FaultSet] {
        &self.faults
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    /// `true` iff the family is exactly `{∅} ∪ {{e} : e ∈ E}`.
    pub fn is_single_link<T: Real>(&self, network: &Network<T>) -> bool {
        let expected = Self::single_link(network);
        let mine: BTreeSet<&FaultSet> = self.faults.iter().collect();
        self.faults.len() == expected.faults.len()
            && expected.faults.iter().all(|f| mine.contains(f))
    }

    /// Same members sorted by (cardinality, lexicographic edge ids).
    pub fn canonical(&self) -> Self {
        let mut faults = self.faults.clone();
        faults.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
        Self { faults }
    }
}

/// Result of an identifiability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Identifiability {
    Identifiable,
    /// Indices into the family of the first pair with equal probe signatures
    /// (smallest `second`, then smallest `first`).
    Indistinguishable {
        first: usize,
        second: usize,
    },
}

impl Identifiability {
    pub fn is_identifiable(&self) -> bool {
        matches!(self, Identifiability::Identifiable)
    }
}

/// Checks that every pair of distinct fault sets in `family` hits a different
/// subset of `probes`.
pub fn check_identifiable(probes: &[Probe], family: &FaultFamily) -> Identifiability {
    let mut seen: HashMap<BitVec, usize> = HashMap::with_capacity(family.len());
    for (j, fault) in family.faults().iter().enumerate() {
        let sig = fault_signature(probes, fault);
        if let Some(&i) = seen.get(&sig) {
            return Identifiability::Indistinguishable {
                first: i,
                second: j,
            };
        }
        seen.insert(sig, j);
    }
    Identifiability::Identifiable
}

//! Probe construction minimizing the longest probe while keeping every pair of
//! fault sets distinguishable.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use bitvec::vec::BitVec;
use thiserror::Error;

use crate::network::{FaultFamily, FaultSet, Network, NetworkError, Probe, VertexId};
use crate::scalar::Real;

/// Comma-separated edge ids in braces, e.g. `{e1,e4}`.
pub struct DisplayFault<'a>(pub &'a FaultSet);

impl fmt::Display for DisplayFault<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TomographyError {
    #[error("the two fault sets are identical")]
    IdenticalFaultSets,
    #[error("fault sets {} and {} cannot be distinguished by any probe", DisplayFault(.first), DisplayFault(.second))]
    Indistinguishable { first: FaultSet, second: FaultSet },
    #[error("no probe set with walks of at most {cap} hops identifies the family")]
    CapExhausted { cap: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// All-pairs shortest distances and predecessors over a subgraph.
///
/// `dist` and `pred` are row-major over dense vertex indices (the order of
/// [`Network::vertices`]). Unreachable pairs have `None` in both.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTables<T> {
    ids: Vec<VertexId>,
    dist: Vec<Option<T>>,
    pred: Vec<Option<usize>>,
}

impl<T: Real> ShortestPathTables<T> {
    fn n(&self) -> usize {
        self.ids.len()
    }

    fn idx(&self, v: VertexId) -> Option<usize> {
        self.ids.binary_search(&v).ok()
    }

    pub fn distance_by_index(&self, i: usize, j: usize) -> Option<T> {
        self.dist[i * self.n() + j]
    }

    /// Penultimate vertex index on the shortest path `i -> j`.
    pub fn predecessor_by_index(&self, i: usize, j: usize) -> Option<usize> {
        self.pred[i * self.n() + j]
    }

    pub fn distance(&self, a: VertexId, b: VertexId) -> Option<T> {
        self.distance_by_index(self.idx(a)?, self.idx(b)?)
    }

    fn path_indices(&self, i: usize, j: usize) -> Option<Vec<usize>> {
        self.distance_by_index(i, j)?;
        let mut rev = vec![j];
        let mut cur = j;
        while cur != i {
            cur = self.predecessor_by_index(i, cur)?;
            rev.push(cur);
        }
        rev.reverse();
        Some(rev)
    }

    /// Vertex sequence of a shortest path from `a` to `b`, both included.
    pub fn path(&self, a: VertexId, b: VertexId) -> Option<Vec<VertexId>> {
        let p = self.path_indices(self.idx(a)?, self.idx(b)?)?;
        Some(p.into_iter().map(|i| self.ids[i]).collect())
    }
}

/// Floyd–Warshall on the network with `excluded` edges removed.
pub fn floyd_warshall_with_paths<T: Real>(
    network: &Network<T>,
    excluded: &FaultSet,
) -> ShortestPathTables<T> {
    let ids = network.vertices().to_vec();
    let n = ids.len();
    let mut dist: Vec<Option<T>> = vec![None; n * n];
    let mut pred: Vec<Option<usize>> = vec![None; n * n];
    for i in 0..n {
        dist[i * n + i] = Some(T::zero());
    }
    for i in 0..n {
        for &(j, e) in network.neighbors(i) {
            if excluded.contains(&e) {
                continue;
            }
            dist[i * n + j] = Some(network.edges()[e.0].weight());
            pred[i * n + j] = Some(i);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = dist[i * n + k] else { continue };
            for j in 0..n {
                let Some(dkj) = dist[k * n + j] else { continue };
                let through = dik + dkj;
                if dist[i * n + j].is_none_or(|d| through < d) {
                    dist[i * n + j] = Some(through);
                    pred[i * n + j] = pred[k * n + j];
                }
            }
        }
    }
    ShortestPathTables { ids, dist, pred }
}

/// Shortest probe traversing at least one edge of `targets`, built as
/// nearest monitor to `u`, then `u -> v`, then nearest monitor from `v`.
///
/// `tables` must have been computed on the subgraph the probe has to stay in.
/// Ties are broken by length, then edge id, then monitor id.
pub fn find_opt_probe<T: Real>(
    network: &Network<T>,
    targets: &FaultSet,
    tables: &ShortestPathTables<T>,
) -> Option<Probe> {
    let nearest = |x: usize| -> Option<(T, usize)> {
        let mut best: Option<(T, usize)> = None;
        for &m in network.monitors() {
            let mi = tables.idx(m)?;
            if let Some(d) = tables.distance_by_index(mi, x) {
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, mi));
                }
            }
        }
        best
    };

    let mut best: Option<(T, usize, usize, usize, usize)> = None;
    for &e in targets {
        let edge = network.edge(e).ok()?;
        let (ui, vi) = (tables.idx(edge.u)?, tables.idx(edge.v)?);
        let (Some((du, mu)), Some((dv, mv))) = (nearest(ui), nearest(vi)) else {
            continue;
        };
        let len = du + edge.weight() + dv;
        if best.is_none_or(|(bl, ..)| len < bl) {
            best = Some((len, mu, ui, vi, mv));
        }
    }

    let (_, mu, ui, vi, mv) = best?;
    let mut walk = tables.path_indices(mu, ui)?;
    let mut back = tables.path_indices(mv, vi)?;
    back.reverse();
    walk.extend(back);
    let walk: Vec<VertexId> = walk.into_iter().map(|i| tables.ids[i]).collect();
    Probe::from_walk(network, &walk).ok()
}

/// Shortest probe distinguishing `f1` from `f2`.
pub fn find_probe<T: Real>(
    network: &Network<T>,
    f1: &FaultSet,
    f2: &FaultSet,
) -> Result<Probe, TomographyError> {
    if f1 == f2 {
        return Err(TomographyError::IdenticalFaultSets);
    }
    let candidate = |only: &FaultSet, avoid: &FaultSet| -> Option<Probe> {
        let targets: FaultSet = only.difference(avoid).copied().collect();
        if targets.is_empty() {
            return None;
        }
        let tables = floyd_warshall_with_paths(network, avoid);
        find_opt_probe(network, &targets, &tables)
    };
    let p1 = candidate(f1, f2);
    let p2 = candidate(f2, f1);
    match (p1, p2) {
        (Some(a), Some(b)) => Ok(if b.length(network) < a.length(network) {
            b
        } else {
            a
        }),
        (Some(a), None) => Ok(a),
        (None, Some(b)) => Ok(b),
        (None, None) => Err(TomographyError::Indistinguishable {
            first: f1.clone(),
            second: f2.clone(),
        }),
    }
}

/// Per-fault-set tags tracked by the construction loop. Bit `i` of a tag is set
/// iff probe `i` meets that fault set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionState {
    faults: Vec<FaultSet>,
    tags: Vec<BitVec>,
    probes: Vec<Probe>,
}

impl ConstructionState {
    pub fn new(family: &FaultFamily) -> Self {
        Self {
            faults: family.faults().to_vec(),
            tags: vec![BitVec::new(); family.len()],
            probes: Vec::new(),
        }
    }

    pub fn faults(&self) -> &[FaultSet] {
        &self.faults
    }

    pub fn tags(&self) -> &[BitVec] {
        &self.tags
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn into_probes(self) -> Vec<Probe> {
        self.probes
    }

    pub fn distinguished(&self, i: usize, j: usize) -> bool {
        self.tags[i] != self.tags[j]
    }

    pub fn push(&mut self, probe: Probe) {
        for (fault, tag) in self.faults.iter().zip(&mut self.tags) {
            tag.push(probe.intersects(fault));
        }
        self.probes.push(probe);
    }
}

/// Builds a probe set making every pair in `family` distinguishable with the
/// smallest possible longest probe.
///
/// Pairs are visited with fault sets in canonical order (cardinality, then
/// lexicographic edge ids). Fails on the first pair no probe can separate.
pub fn construct_probes<T: Real>(
    network: &Network<T>,
    family: &FaultFamily,
) -> Result<Vec<Probe>, TomographyError> {
    let family = family.canonical();
    let mut state = ConstructionState::new(&family);
    let n = family.len();
    for i in 0..n {
        for j in i + 1..n {
            if state.distinguished(i, j) {
                continue;
            }
            let probe = find_probe(network, &family.faults()[i], &family.faults()[j])?;
            state.push(probe);
        }
    }
    Ok(state.into_probes())
}

/// Fault sets dropped by [`maximal_identifiable_subfamily`], each with the kept
/// member it cannot be told apart from.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedFault {
    pub dropped: FaultSet,
    pub kept: FaultSet,
}

/// Largest subfamily that the network can identify: members are scanned in
/// canonical order and a member is dropped when no probe separates it from an
/// earlier kept one.
pub fn maximal_identifiable_subfamily<T: Real>(
    network: &Network<T>,
    family: &FaultFamily,
) -> Result<(FaultFamily, Vec<DroppedFault>), TomographyError> {
    let mut kept: Vec<FaultSet> = Vec::new();
    let mut dropped = Vec::new();
    for fault in family.canonical().faults() {
        let mut clash = None;
        for k in &kept {
            match find_probe(network, k, fault) {
                Ok(_) => {}
                Err(TomographyError::Indistinguishable { .. }) => {
                    clash = Some(k.clone());
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match clash {
            Some(k) => dropped.push(DroppedFault {
                dropped: fault.clone(),
                kept: k,
            }),
            None => kept.push(fault.clone()),
        }
    }
    Ok((FaultFamily::new(network, kept)?, dropped))
}

/// Longest probe length, `None` for an empty set.
pub fn max_probe_length<T: Real>(network: &Network<T>, probes: &[Probe]) -> Option<T> {
    probes
        .iter()
        .map(|p| p.length(network))
        .fold(None, |acc, l| match acc {
            Some(a) if a >= l => Some(a),
            _ => Some(l),
        })
}

/// Exhaustive min-max probe length, for small networks (at most 64 edges, and
/// realistically fewer than ten).
///
/// Enumerates every monitor-to-monitor walk of at most `walk_length_cap` hops,
/// keeps the shortest walk per distinct edge set, then returns the smallest
/// length `L` such that all candidate probes no longer than `L` identify the
/// family.
pub fn brute_force_minmax<T: Real>(
    network: &Network<T>,
    family: &FaultFamily,
    walk_length_cap: usize,
) -> Result<T, TomographyError> {
    assert!(network.num_edges() <= 64, "brute force limited to 64 edges");
    if family.len() < 2 {
        return Ok(T::zero());
    }

    let ids = network.vertices();
    let mut best: HashMap<u64, T> = HashMap::new();
    let mut frontier: BTreeMap<(usize, u64), T> = BTreeMap::new();
    for &m in network.monitors() {
        frontier.insert((network.vertex_index(m).unwrap(), 0), T::zero());
    }
    for _ in 0..walk_length_cap {
        let mut next: BTreeMap<(usize, u64), T> = BTreeMap::new();
        for (&(i, mask), &len) in &frontier {
            for &(j, e) in network.neighbors(i) {
                let key = (j, mask | (1u64 << e.0));
                let l = len + network.edges()[e.0].weight();
                next.entry(key).and_modify(|x| *x = x.min(l)).or_insert(l);
            }
        }
        for (&(j, mask), &len) in &next {
            if network.is_monitor(ids[j]) {
                best.entry(mask)
                    .and_modify(|x| *x = x.min(len))
                    .or_insert(len);
            }
        }
        frontier = next;
    }

    let fault_masks: Vec<u64> = family
        .faults()
        .iter()
        .map(|f| f.iter().fold(0u64, |m, e| m | (1u64 << e.0)))
        .collect();
    let mut candidates: Vec<(T, u64)> = best.into_iter().map(|(m, l)| (l, m)).collect();
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let mut start = 0;
    while start < candidates.len() {
        let threshold = candidates[start].0;
        let mut end = start;
        while end < candidates.len() && candidates[end].0 <= threshold {
            end += 1;
        }
        let signatures: HashSet<Vec<bool>> = fault_masks
            .iter()
            .map(|&fm| {
                candidates[..end]
                    .iter()
                    .map(|&(_, pm)| pm & fm != 0)
                    .collect()
            })
            .collect();
        if signatures.len() == fault_masks.len() {
            return Ok(threshold);
        }
        start = end;
    }
    Err(TomographyError::CapExhausted {
        cap: walk_length_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_fattree_topology, build_line_topology, check_identifiable, EdgeId};
    use proptest::prelude::*;
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    fn w() -> f64 {
        -(0.9f64).ln()
    }

    fn line5() -> Network<f64> {
        build_line_topology(5, 0.9).unwrap()
    }

    fn single(net: &Network<f64>, a: VertexId, b: VertexId) -> FaultSet {
        FaultSet::from([net.find_edge(a, b).unwrap()])
    }

    fn dijkstra(net: &Network<f64>, excluded: &FaultSet, src: usize) -> Vec<Option<f64>> {
        let n = net.num_vertices();
        let mut dist = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[src] = Some(0.0);
        heap.push(Reverse((ordered_float(0.0), src)));
        while let Some(Reverse((d, i))) = heap.pop() {
            let d = f64::from_bits(d);
            if dist[i].is_some_and(|x| d > x) {
                continue;
            }
            for &(j, e) in net.neighbors(i) {
                if excluded.contains(&e) {
                    continue;
                }
                let nd = d + net.edges()[e.0].weight();
                if dist[j].is_none_or(|x| nd < x) {
                    dist[j] = Some(nd);
                    heap.push(Reverse((ordered_float(nd), j)));
                }
            }
        }
        dist
    }

    // Non-negative floats order like their bit patterns.
    fn ordered_float(x: f64) -> u64 {
        x.to_bits()
    }

    #[test]
    fn line_distances() {
        let net = line5();
        let t = floyd_warshall_with_paths(&net, &FaultSet::new());
        assert!((t.distance(0, 3).unwrap() - 3.0 * w()).abs() < 1e-12);
        assert_eq!(t.path(0, 3).unwrap(), vec![0, 1, 2, 3]);
        for v in 0..=5 {
            assert_eq!(t.distance(v, v), Some(0.0));
        }
        let cut = floyd_warshall_with_paths(&net, &single(&net, 2, 3));
        assert_eq!(cut.distance(0, 5), None);
        assert_eq!(cut.path(0, 5), None);
        assert_eq!(cut.path(4, 5).unwrap(), vec![4, 5]);
    }

    #[test]
    fn opt_probe_line_examples() {
        let net = line5();
        let t = floyd_warshall_with_paths(&net, &FaultSet::new());
        let p = find_opt_probe(&net, &single(&net, 0, 1), &t).unwrap();
        assert_eq!(p.vertices(), &[0, 1, 0]);
        assert!((p.length(&net) - 2.0 * w()).abs() < 1e-12);

        let p = find_opt_probe(&net, &single(&net, 2, 3), &t).unwrap();
        assert_eq!(p.vertices(), &[0, 1, 2, 3, 4, 5]);
        assert!((p.length(&net) - 5.0 * w()).abs() < 1e-12);

        // Loop-back alternative through (2,3) from either side is 6 hops.
        let loop_len = 6.0 * w();
        assert!(p.length(&net) < loop_len);

        let cut = floyd_warshall_with_paths(&net, &FaultSet::from([EdgeId(1), EdgeId(3)]));
        assert_eq!(find_opt_probe(&net, &single(&net, 2, 3), &cut), None);
        assert_eq!(find_opt_probe(&net, &FaultSet::new(), &t), None);
    }

    #[test]
    fn find_probe_line_examples() {
        let net = line5();
        let p = find_probe(&net, &single(&net, 0, 1), &FaultSet::new()).unwrap();
        assert_eq!(p.vertices(), &[0, 1, 0]);

        // Through (2,3) avoiding (1,2) needs 5→4→3→2→3→4→5 (6 hops); through
        // (1,2) avoiding (2,3) needs only 4 hops, so that side wins.
        let (f1, f2) = (single(&net, 2, 3), single(&net, 1, 2));
        let avoid_f2 = floyd_warshall_with_paths(&net, &f2);
        let via_f1 = find_opt_probe(&net, &f1, &avoid_f2).unwrap();
        assert_eq!(via_f1.vertices(), &[5, 4, 3, 2, 3, 4, 5]);
        let p = find_probe(&net, &f1, &f2).unwrap();
        assert_eq!(p.vertices(), &[0, 1, 2, 1, 0]);
        assert_eq!(p.traversals(), 4);
        assert!(p.intersects(&f2) && !p.intersects(&f1));

        assert_eq!(
            find_probe(&net, &FaultSet::new(), &FaultSet::new()),
            Err(TomographyError::IdenticalFaultSets)
        );
    }

    #[test]
    fn find_probe_reports_indistinguishable_pair() {
        // Single monitor at 0: every walk crossing (1,2) also crosses (0,1).
        let net = Network::new(0..3, [0], [(0, 1, 0.9), (1, 2, 0.9)]).unwrap();
        let a = FaultSet::from([EdgeId(0)]);
        let ab = FaultSet::from([EdgeId(0), EdgeId(1)]);
        let err = find_probe(&net, &a, &ab).unwrap_err();
        assert_eq!(
            err,
            TomographyError::Indistinguishable {
                first: a.clone(),
                second: ab.clone()
            }
        );
        assert_eq!(
            err.to_string(),
            "fault sets {e0} and {e0,e1} cannot be distinguished by any probe"
        );
    }

    #[test]
    fn line5_construction() {
        let net = line5();
        let fam = FaultFamily::single_link(&net);
        let probes = construct_probes(&net, &fam).unwrap();
        assert_eq!(probes.len(), 5);
        assert!((max_probe_length(&net, &probes).unwrap() - 5.0 * w()).abs() < 1e-12);
        assert!(check_identifiable(&probes, &fam).is_identifiable());
    }

    #[test]
    fn empty_family_needs_no_probes() {
        let net = line5();
        let fam = FaultFamily::new(&net, vec![FaultSet::new()]).unwrap();
        assert!(construct_probes(&net, &fam).unwrap().is_empty());
        assert_eq!(brute_force_minmax(&net, &fam, 4).unwrap(), 0.0);
    }

    #[test]
    fn fattree_construction_matches_six_hop_optimum() {
        let (net, _) = build_fattree_topology(0.9f64).unwrap();
        let fam = FaultFamily::single_link(&net);
        let probes = construct_probes(&net, &fam).unwrap();
        assert!(check_identifiable(&probes, &fam).is_identifiable());
        let max = max_probe_length(&net, &probes).unwrap();
        assert!((max - 6.0 * w()).abs() < 1e-9, "max {max}");
        assert_eq!(probes, construct_probes(&net, &fam).unwrap());
    }

    #[test]
    fn construction_error_names_first_pair() {
        let net = Network::new(0..3, [0], [(0, 1, 0.9), (1, 2, 0.9)]).unwrap();
        let fam = FaultFamily::new(
            &net,
            vec![
                FaultSet::from([EdgeId(0), EdgeId(1)]),
                FaultSet::new(),
                FaultSet::from([EdgeId(0)]),
                FaultSet::from([EdgeId(1)]),
            ],
        )
        .unwrap();
        assert_eq!(
            construct_probes(&net, &fam).unwrap_err(),
            TomographyError::Indistinguishable {
                first: FaultSet::from([EdgeId(0)]),
                second: FaultSet::from([EdgeId(0), EdgeId(1)]),
            }
        );
        let (sub, dropped) = maximal_identifiable_subfamily(&net, &fam).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(
            dropped,
            vec![DroppedFault {
                dropped: FaultSet::from([EdgeId(0), EdgeId(1)]),
                kept: FaultSet::from([EdgeId(0)]),
            }]
        );
        let probes = construct_probes(&net, &sub).unwrap();
        assert!(check_identifiable(&probes, &sub).is_identifiable());
    }

    #[test]
    fn brute_force_small_cases() {
        let net = build_line_topology(3, 0.9f64).unwrap();
        let fam = FaultFamily::single_link(&net);
        let bf = brute_force_minmax(&net, &fam, 4).unwrap();
        let built = max_probe_length(&net, &construct_probes(&net, &fam).unwrap()).unwrap();
        assert!((bf - built).abs() < 1e-9);
        assert!(matches!(
            brute_force_minmax(&net, &fam, 1),
            Err(TomographyError::CapExhausted { cap: 1 })
        ));

        let both = build_line_topology(1, 0.7f64).unwrap();
        let fam = FaultFamily::single_link(&both);
        assert!((brute_force_minmax(&both, &fam, 3).unwrap() + 0.7f64.ln()).abs() < 1e-12);
        let one = Network::new(0..2, [0], [(0, 1, 0.7f64)]).unwrap();
        let fam = FaultFamily::single_link(&one);
        assert!((brute_force_minmax(&one, &fam, 3).unwrap() + 2.0 * 0.7f64.ln()).abs() < 1e-12);
    }

    prop_compose! {
        fn small_graph()(n in 2usize..=5)
            (parents in proptest::collection::vec(any::<proptest::sample::Index>(), n - 1),
             extra in proptest::collection::vec((0..n, 0..n), 0..=3),
             etas in proptest::collection::vec(0.5f64..0.99, 6),
             mons in proptest::sample::subsequence((0..n as u32).collect::<Vec<_>>(), 2.min(n)..=3.min(n)),
             n in Just(n))
            -> Network<f64>
        {
            let mut links: Vec<(u32, u32)> = Vec::new();
            for (k, p) in parents.iter().enumerate() {
                let child = k + 1;
                links.push((p.index(child) as u32, child as u32));
            }
            for (a, b) in extra {
                let (a, b) = (a.min(b) as u32, a.max(b) as u32);
                if a != b && links.len() < 6 && !links.iter().any(|&(x, y)| (x.min(y), x.max(y)) == (a, b)) {
                    links.push((a, b));
                }
            }
            let edges = links.iter().zip(&etas).map(|(&(a, b), &eta)| (a, b, eta));
            Network::new(0..n as u32, mons, edges).unwrap()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn floyd_warshall_matches_dijkstra(net in small_graph(), drop in any::<proptest::sample::Index>()) {
            let excluded = FaultSet::from([EdgeId(drop.index(net.num_edges()))]);
            let t = floyd_warshall_with_paths(&net, &excluded);
            for i in 0..net.num_vertices() {
                let d = dijkstra(&net, &excluded, i);
                for j in 0..net.num_vertices() {
                    match (t.distance_by_index(i, j), d[j]) {
                        (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
                        (None, None) => {}
                        other => prop_assert!(false, "mismatch {:?}", other),
                    }
                    prop_assert_eq!(t.distance_by_index(i, j).is_some(), t.distance_by_index(j, i).is_some());
                    if let Some(path) = t.path_indices(i, j) {
                        let len: f64 = path.windows(2).map(|h| {
                            let e = net.find_edge(net.vertices()[h[0]], net.vertices()[h[1]]).unwrap();
                            prop_assert!(!excluded.contains(&e));
                            Ok(net.edges()[e.0].weight())
                        }).collect::<Result<Vec<_>, TestCaseError>>()?.into_iter().sum();
                        prop_assert!((len - t.distance_by_index(i, j).unwrap()).abs() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn construction_is_identifying_and_optimal(net in small_graph()) {
            let fam = FaultFamily::single_link(&net);
            let probes = construct_probes(&net, &fam).unwrap();
            prop_assert!(check_identifiable(&probes, &fam).is_identifiable());
            for p in &probes {
                prop_assert!(net.is_monitor(p.vertices()[0]));
                prop_assert!(net.is_monitor(*p.vertices().last().unwrap()));
            }
            let built = max_probe_length(&net, &probes).unwrap();
            let bf = brute_force_minmax(&net, &fam, 2 * net.num_edges() + 1).unwrap();
            prop_assert!((built - bf).abs() < 1e-9, "built {} brute {}", built, bf);
            prop_assert_eq!(probes, construct_probes(&net, &fam).unwrap());
        }

        #[test]
        fn found_probe_avoids_the_other_set(net in small_graph(), a in any::<proptest::sample::Index>(), b in any::<proptest::sample::Index>()) {
            let f1 = FaultSet::from([EdgeId(a.index(net.num_edges()))]);
            let f2 = FaultSet::from([EdgeId(b.index(net.num_edges()))]);
            prop_assume!(f1 != f2);
            let p = find_probe(&net, &f1, &f2).unwrap();
            prop_assert!(p.intersects(&f1) != p.intersects(&f2));
        }
    }
}

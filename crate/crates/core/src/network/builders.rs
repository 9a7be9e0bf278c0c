use super::{Network, NetworkError, Probe, VertexId};
use crate::scalar::Real;

/// Path graph `0 — 1 — … — num_links` with uniform transmissivity and monitors
/// at both ends.
pub fn build_line_topology<T: Real>(num_links: u32, eta: T) -> Result<Network<T>, NetworkError> {
    if num_links == 0 {
        return Err(NetworkError::NoLinks);
    }
    Network::new(
        0..=num_links,
        [0, num_links],
        (0..num_links).map(|i| (i, i + 1, eta)),
    )
}

/// Reference probe set for a line built by [`build_line_topology`]: nested
/// loop-backs from the left monitor, nested loop-backs from the right monitor,
/// and the end-to-end walk last. For five links this is the set
/// `0→1→0`, `0→1→2→1→0`, `5→4→5`, `5→4→3→4→5`, `0→…→5`.
pub fn line_reference_probes<T: Real>(network: &Network<T>) -> Result<Vec<Probe>, NetworkError> {
    let last = *network.vertices().last().ok_or(NetworkError::NoLinks)?;
    let inner = last.saturating_sub(1);
    let left = inner / 2 + inner % 2;
    let right = inner - left;

    let loop_back = |from: VertexId, depth: u32, step: i64| -> Result<Probe, NetworkError> {
        let out: Vec<VertexId> = (0..=depth)
            .map(|k| (from as i64 + step * k as i64) as VertexId)
            .collect();
        let mut walk = out.clone();
        walk.extend(out.iter().rev().skip(1));
        Probe::from_walk(network, &walk)
    };

    let mut probes = Vec::with_capacity(last as usize);
    for depth in 1..=left {
        probes.push(loop_back(0, depth, 1)?);
    }
    for depth in 1..=right {
        probes.push(loop_back(last, depth, -1)?);
    }
    let end_to_end: Vec<VertexId> = (0..=last).collect();
    probes.push(Probe::from_walk(network, &end_to_end)?);
    Ok(probes)
}

const QNICS: u32 = 16;

/// The 48-link, 36-node, 3-tier optical fat-tree together with its 48 loop-back
/// probes.
///
/// Vertices: qNICs `0..16` (the monitors), tier-1 switches `16..24`, tier-2
/// `24..32`, core `32..36`. The probe list holds the sixteen length-6 loop-backs
/// first, then for each of those (in the same order) its nested length-2 and
/// length-4 loop-backs.
pub fn build_fattree_topology<T: Real>(eta: T) -> Result<(Network<T>, Vec<Probe>), NetworkError> {
    let mut edges: Vec<(VertexId, VertexId, T)> = Vec::with_capacity(48);
    for q in 0..QNICS {
        edges.push((q, 16 + q / 2, eta));
    }
    for pod in 0..4 {
        let a = 16 + 2 * pod;
        let sx = 24 + 2 * pod;
        for agg in [a, a + 1] {
            for spine in [sx, sx + 1] {
                edges.push((agg, spine, eta));
            }
        }
    }
    for spine in [24, 26, 28, 30] {
        for core in [32, 33] {
            edges.push((spine, core, eta));
        }
    }
    for spine in [25, 27, 29, 31] {
        for core in [34, 35] {
            edges.push((spine, core, eta));
        }
    }
    let network = Network::new(0..36, 0..QNICS, edges)?;

    let mut uplinks: Vec<[VertexId; 4]> = Vec::with_capacity(16);
    for i in [0, 2, 4, 6] {
        uplinks.push([2 * i, i + 16, i + 24, 32]);
        uplinks.push([2 * i + 1, i + 16, i + 25, 34]);
    }
    for i in [1, 3, 5, 7] {
        uplinks.push([2 * i, i + 16, i + 23, 33]);
        uplinks.push([2 * i + 1, i + 16, i + 24, 35]);
    }

    let there_and_back = |path: &[VertexId]| -> Vec<VertexId> {
        let mut walk = path.to_vec();
        walk.extend(path.iter().rev().skip(1));
        walk
    };
    let mut probes = Vec::with_capacity(48);
    for path in &uplinks {
        probes.push(Probe::from_walk(&network, &there_and_back(path))?);
    }
    for path in &uplinks {
        probes.push(Probe::from_walk(&network, &there_and_back(&path[..2]))?);
        probes.push(Probe::from_walk(&network, &there_and_back(&path[..3]))?);
    }
    Ok((network, probes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{check_identifiable, probes_covering, FaultFamily};

    #[test]
    fn line_shapes() {
        let one = build_line_topology(1, 0.9f64).unwrap();
        assert_eq!(one.num_edges(), 1);
        assert_eq!(
            one.monitors().iter().copied().collect::<Vec<_>>(),
            vec![0, 1]
        );

        let two = build_line_topology(2, 0.9f64).unwrap();
        assert_eq!(two.num_vertices(), 3);
        assert_eq!(
            two.monitors().iter().copied().collect::<Vec<_>>(),
            vec![0, 2]
        );

        assert!(build_line_topology(0, 0.9f64).is_err());
        assert!(build_line_topology(3, 1.0f64).is_err());
    }

    #[test]
    fn line5_reference_probes_match_figure() {
        let net = build_line_topology(5, 0.9f64).unwrap();
        let probes = line_reference_probes(&net).unwrap();
        let walks: Vec<Vec<VertexId>> = probes.iter().map(|p| p.vertices().to_vec()).collect();
        assert_eq!(
            walks,
            vec![
                vec![0, 1, 0],
                vec![0, 1, 2, 1, 0],
                vec![5, 4, 5],
                vec![5, 4, 3, 4, 5],
                vec![0, 1, 2, 3, 4, 5],
            ]
        );
    }

    #[test]
    fn line_reference_probes_identify_any_length() {
        for links in 1..12 {
            let net = build_line_topology(links, 0.8f64).unwrap();
            let probes = line_reference_probes(&net).unwrap();
            assert_eq!(probes.len(), links as usize);
            let fam = FaultFamily::single_link(&net);
            assert!(
                check_identifiable(&probes, &fam).is_identifiable(),
                "links={links}"
            );
        }
    }

    #[test]
    fn fattree_counts_and_identifiability() {
        let (net, probes) = build_fattree_topology(0.9f64).unwrap();
        assert_eq!(net.num_vertices(), 36);
        assert_eq!(net.num_edges(), 48);
        assert_eq!(net.monitors().len(), 16);
        assert_eq!(probes.len(), 48);
        for p in &probes {
            let v = p.vertices();
            assert_eq!(v.first(), v.last(), "loop-back");
            assert!(net.is_monitor(v[0]));
        }
        let mut lengths: Vec<usize> = probes.iter().map(Probe::traversals).collect();
        lengths.sort_unstable();
        assert_eq!(lengths.iter().filter(|&&l| l == 2).count(), 16);
        assert_eq!(lengths.iter().filter(|&&l| l == 4).count(), 16);
        assert_eq!(lengths.iter().filter(|&&l| l == 6).count(), 16);
        assert!(check_identifiable(&probes, &FaultFamily::single_link(&net)).is_identifiable());
    }

    #[test]
    fn fattree_link_1_16_covered_twice_by_three_probes() {
        let (net, probes) = build_fattree_topology(0.9f64).unwrap();
        let e = net.find_edge(1, 16).unwrap();
        let covering = probes_covering(&probes, e);
        assert_eq!(covering.len(), 3);
        for i in covering {
            assert_eq!(probes[i].multiplicity(e), 2);
        }
    }

    #[test]
    fn builders_are_deterministic() {
        assert_eq!(
            build_line_topology(7, 0.9f64),
            build_line_topology(7, 0.9f64)
        );
        assert_eq!(
            build_fattree_topology(0.9f64),
            build_fattree_topology(0.9f64)
        );
    }
}

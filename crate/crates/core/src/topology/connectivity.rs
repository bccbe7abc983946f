//! Density, reciprocity, triads, clustering and maximal cliques.

use serde::{Deserialize, Serialize};

use super::TopologyError;
use crate::graph::Graph;

/// `|E| / (n (n - 1))`.
pub fn density(graph: &Graph) -> Result<f64, TopologyError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(TopologyError::TooFewNodes { required: 2, found: n });
    }
    Ok(graph.edge_count() as f64 / (n * (n - 1)) as f64)
}

/// Fraction of directed edges whose reverse edge also exists.
pub fn reciprocity(graph: &Graph) -> Result<f64, TopologyError> {
    if graph.edge_count() == 0 {
        return Err(TopologyError::NoEdges);
    }
    let mutual = graph
        .edges()
        .iter()
        .filter(|e| graph.has_edge(e.target, e.source))
        .count();
    Ok(mutual as f64 / graph.edge_count() as f64)
}

/// Triad closure statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriadReport {
    /// Directed two-paths `i -> j -> k` (`i != k`) closed by `i -> k`.
    pub triad_closed_fraction: f64,
    /// `3 * triangles / connected triples` on the undirected projection.
    pub transitivity: f64,
    /// Mean of the defined local coefficients.
    pub mean_local_clustering: f64,
    /// Per-node local clustering; `None` when the undirected degree is < 2.
    pub local_clustering: Vec<Option<f64>>,
}

pub fn triad_closure(graph: &Graph) -> Result<TriadReport, TopologyError> {
    let n = graph.node_count();
    if n < 3 {
        return Err(TopologyError::TooFewNodes { required: 3, found: n });
    }
    let mut mark = vec![false; n];
    let mut local = Vec::with_capacity(n);
    let mut closed_at = 0usize; // sum over nodes of neighbour pairs that are linked
    let mut triples = 0usize;
    for i in 0..n {
        let nbrs = graph.undirected_neighbors(i);
        let d = nbrs.len();
        for &j in nbrs {
            mark[j] = true;
        }
        let mut links = 0usize;
        for &j in nbrs {
            links += graph
                .undirected_neighbors(j)
                .iter()
                .filter(|&&k| k > j && mark[k])
                .count();
        }
        for &j in nbrs {
            mark[j] = false;
        }
        let pairs = d * d.saturating_sub(1) / 2;
        closed_at += links;
        triples += pairs;
        local.push((d >= 2).then(|| links as f64 / pairs as f64));
    }
    let defined: Vec<f64> = local.iter().flatten().copied().collect();
    let mean_local_clustering = if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    // closed_at counts each triangle once per corner, i.e. 3 * triangles.
    let transitivity = if triples == 0 {
        0.0
    } else {
        closed_at as f64 / triples as f64
    };

    let mut two_paths = 0usize;
    let mut closed_paths = 0usize;
    for j in 0..n {
        for &(i, _) in graph.in_neighbors(j) {
            for &(k, _) in graph.out_neighbors(j) {
                if k != i {
                    two_paths += 1;
                    if graph.has_edge(i, k) {
                        closed_paths += 1;
                    }
                }
            }
        }
    }
    let triad_closed_fraction = if two_paths == 0 {
        0.0
    } else {
        closed_paths as f64 / two_paths as f64
    };

    Ok(TriadReport {
        triad_closed_fraction,
        transitivity,
        mean_local_clustering,
        local_clustering: local,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64)],
        }
    }

    fn full(n: usize) -> Self {
        let mut s = Self::new(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn intersect(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn difference(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    fn intersection_len(&self, other: &BitSet) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }
}

/// All maximal cliques of the undirected projection with at least
/// `min_size` members. Each clique is sorted; the list is in lexicographic
/// order.
pub fn maximal_cliques(graph: &Graph, min_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_maximal_clique(graph, |clique| {
        if clique.len() >= min_size {
            out.push(clique.to_vec());
        }
    });
    out.sort();
    out
}

/// Size of the largest clique of the undirected projection.
pub fn max_clique_size(graph: &Graph) -> usize {
    let mut best = 0;
    for_each_maximal_clique(graph, |c| best = best.max(c.len()));
    best
}

/// Bron–Kerbosch with Tomita pivoting; `visit` receives each maximal clique
/// sorted ascending.
pub fn for_each_maximal_clique(graph: &Graph, mut visit: impl FnMut(&[usize])) {
    let n = graph.node_count();
    let neighbors: Vec<BitSet> = (0..n)
        .map(|i| {
            let mut s = BitSet::new(n);
            for &j in graph.undirected_neighbors(i) {
                s.insert(j);
            }
            s
        })
        .collect();
    let mut current = Vec::new();
    expand(
        &neighbors,
        &mut current,
        BitSet::full(n),
        BitSet::new(n),
        &mut visit,
    );
}

fn expand(
    neighbors: &[BitSet],
    current: &mut Vec<usize>,
    mut candidates: BitSet,
    mut excluded: BitSet,
    visit: &mut impl FnMut(&[usize]),
) {
    if candidates.is_empty() {
        if excluded.is_empty() {
            let mut clique = current.clone();
            clique.sort_unstable();
            visit(&clique);
        }
        return;
    }
    let pivot = candidates
        .iter()
        .chain(excluded.iter())
        .max_by_key(|&u| (candidates.intersection_len(&neighbors[u]), std::cmp::Reverse(u)))
        .expect("non-empty candidate set");
    let branch: Vec<usize> = candidates.difference(&neighbors[pivot]).iter().collect();
    for v in branch {
        current.push(v);
        expand(
            neighbors,
            current,
            candidates.intersect(&neighbors[v]),
            excluded.intersect(&neighbors[v]),
            visit,
        );
        current.pop();
        candidates.remove(v);
        excluded.insert(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::test_support::{brute_force_maximal_cliques, graph_from, random_digraph};
    use proptest::prelude::*;

    fn complete(n: usize) -> Graph {
        let pairs: Vec<_> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        graph_from(n, &pairs)
    }

    #[test]
    fn density_cases() {
        assert_eq!(density(&complete(5)).unwrap(), 1.0);
        assert_eq!(density(&graph_from(4, &[(0, 1)])).unwrap(), 1.0 / 12.0);
        assert!(matches!(
            density(&graph_from(1, &[])),
            Err(TopologyError::TooFewNodes { .. })
        ));
    }

    #[test]
    fn reciprocity_cases() {
        assert_eq!(reciprocity(&complete(4)).unwrap(), 1.0);
        assert_eq!(reciprocity(&graph_from(2, &[(0, 1)])).unwrap(), 0.0);
        assert_eq!(
            reciprocity(&graph_from(3, &[(0, 1), (1, 0), (1, 2)])).unwrap(),
            2.0 / 3.0
        );
    }

    #[test]
    fn triangle_and_star_triads() {
        let t = triad_closure(&graph_from(3, &[(0, 1), (1, 2), (2, 0)])).unwrap();
        assert_eq!(t.transitivity, 1.0);
        assert!(t.local_clustering.iter().all(|c| *c == Some(1.0)));
        // Cyclic triangle: no two-path i->j->k is closed by i->k.
        assert_eq!(t.triad_closed_fraction, 0.0);

        let star = triad_closure(&graph_from(5, &[(0, 1), (0, 2), (3, 0), (4, 0)])).unwrap();
        assert_eq!(star.transitivity, 0.0);
        assert_eq!(star.local_clustering[0], Some(0.0));
        assert_eq!(star.local_clustering[1], None);
    }

    #[test]
    fn transitive_triad_is_fully_closed() {
        let t = triad_closure(&graph_from(3, &[(0, 1), (1, 2), (0, 2)])).unwrap();
        assert_eq!(t.triad_closed_fraction, 1.0);
    }

    #[test]
    fn complete_graph_has_one_clique() {
        assert_eq!(maximal_cliques(&complete(5), 2), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(max_clique_size(&complete(5)), 5);
    }

    #[test]
    fn five_cycle_has_five_edges_as_cliques() {
        let g = graph_from(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let found = maximal_cliques(&g, 2);
        assert_eq!(found, brute_force_maximal_cliques(&g, 2));
        assert_eq!(
            found,
            vec![vec![0, 1], vec![0, 4], vec![1, 2], vec![2, 3], vec![3, 4]]
        );
    }

    #[test]
    fn cliques_span_mixed_directions() {
        // 0->1, 1->2, 2->0 is a clique in the "some direction" sense.
        let g = graph_from(4, &[(0, 1), (1, 2), (2, 0), (3, 2)]);
        assert_eq!(maximal_cliques(&g, 3), vec![vec![0, 1, 2]]);
        assert_eq!(maximal_cliques(&g, 1), vec![vec![0, 1, 2], vec![2, 3]]);
    }

    fn brute_triangles(g: &Graph) -> (usize, usize) {
        let n = g.node_count();
        let adj = |a: usize, b: usize| g.has_edge(a, b) || g.has_edge(b, a);
        let mut tri = 0;
        let mut connected_triples = 0;
        for c in 0..n {
            for a in 0..n {
                for b in (a + 1)..n {
                    if a != c && b != c && adj(c, a) && adj(c, b) {
                        connected_triples += 1;
                        if adj(a, b) && c < a {
                            tri += 1;
                        }
                    }
                }
            }
        }
        (tri, connected_triples)
    }

    proptest! {
        #[test]
        fn cliques_match_enumeration(g in random_digraph(1, 7)) {
            prop_assert_eq!(maximal_cliques(&g, 1), brute_force_maximal_cliques(&g, 1));
        }

        #[test]
        fn scalar_metrics_in_unit_interval(g in random_digraph(3, 7)) {
            let n = g.node_count();
            let d = density(&g).unwrap();
            let m = g.edge_count();
            prop_assert_eq!(d, m as f64 / (n * (n - 1)) as f64);
            if m > 0 {
                let r = reciprocity(&g).unwrap();
                prop_assert!((0.0..=1.0).contains(&r));
                let mutual = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| g.has_edge(i, j) && g.has_edge(j, i)).count();
                prop_assert_eq!(r, mutual as f64 / m as f64);
            }
            let t = triad_closure(&g).unwrap();
            let (tri, triples) = brute_triangles(&g);
            let expected = if triples == 0 { 0.0 } else { 3.0 * tri as f64 / triples as f64 };
            prop_assert!((t.transitivity - expected).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&t.transitivity));
            prop_assert!((0.0..=1.0).contains(&t.triad_closed_fraction));
            for c in t.local_clustering.iter().flatten() {
                prop_assert!((0.0..=1.0).contains(c));
            }
        }

        #[test]
        fn every_reported_clique_is_maximal(g in random_digraph(1, 12)) {
            let adj = |a: usize, b: usize| g.has_edge(a, b) || g.has_edge(b, a);
            for c in maximal_cliques(&g, 1) {
                for (x, &a) in c.iter().enumerate() {
                    for &b in &c[x + 1..] {
                        prop_assert!(adj(a, b));
                    }
                }
                for v in 0..g.node_count() {
                    if !c.contains(&v) {
                        prop_assert!(c.iter().any(|&u| !adj(u, v)));
                    }
                }
            }
        }
    }
}

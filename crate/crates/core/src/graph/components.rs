use serde::{Deserialize, Serialize};

use super::Graph;

/// Weak/strong component structure and cut vertices of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    /// Weak component sizes, largest first.
    pub weak_component_sizes: Vec<usize>,
    /// Strong component sizes, largest first.
    pub strong_component_sizes: Vec<usize>,
    /// Articulation points of the undirected projection, ascending.
    pub articulation_points: Vec<usize>,
    /// True when a single weak component spans every node.
    pub is_giant_weak_component: bool,
    pub is_strongly_connected: bool,
}

pub fn components(graph: &Graph) -> ComponentReport {
    let mut weak = weak_component_sizes(graph);
    let mut strong = strong_component_labels(graph)
        .into_iter()
        .fold(vec![0usize; graph.node_count()], |mut acc, c| {
            acc[c] += 1;
            acc
        });
    strong.retain(|&s| s > 0);
    weak.sort_unstable_by(|a, b| b.cmp(a));
    strong.sort_unstable_by(|a, b| b.cmp(a));
    ComponentReport {
        is_giant_weak_component: weak.len() == 1,
        is_strongly_connected: strong.len() == 1,
        weak_component_sizes: weak,
        strong_component_sizes: strong,
        articulation_points: articulation_points(graph),
    }
}

fn weak_component_sizes(graph: &Graph) -> Vec<usize> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in graph.undirected_neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Tarjan's algorithm, iterative; returns a component label per node.
pub(crate) fn strong_component_labels(graph: &Graph) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let n = graph.node_count();
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut label = vec![UNSET; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut next_label = 0;

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            let succ = graph.out_neighbors(v);
            if *pos < succ.len() {
                let w = succ[*pos].0;
                *pos += 1;
                if index[w] == UNSET {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    label[w] = next_label;
                    if w == v {
                        break;
                    }
                }
                next_label += 1;
            }
        }
    }
    label
}

/// Cut vertices of the undirected projection (iterative Hopcroft–Tarjan).
fn articulation_points(graph: &Graph) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let n = graph.node_count();
    let mut disc = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut is_cut = vec![false; n];
    let mut timer = 0;
    // (vertex, parent, next neighbour position)
    let mut call: Vec<(usize, usize, usize)> = Vec::new();

    for root in 0..n {
        if disc[root] != UNSET {
            continue;
        }
        let mut root_children = 0;
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        call.push((root, UNSET, 0));
        while let Some(&mut (v, parent, ref mut pos)) = call.last_mut() {
            let nbrs = graph.undirected_neighbors(v);
            if *pos < nbrs.len() {
                let w = nbrs[*pos];
                *pos += 1;
                if disc[w] == UNSET {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    if v == root {
                        root_children += 1;
                    }
                    call.push((w, v, 0));
                } else if w != parent {
                    low[v] = low[v].min(disc[w]);
                }
                continue;
            }
            call.pop();
            if parent != UNSET {
                low[parent] = low[parent].min(low[v]);
                if parent != root && low[v] >= disc[parent] {
                    is_cut[parent] = true;
                }
            }
        }
        if root_children > 1 {
            is_cut[root] = true;
        }
    }
    (0..n).filter(|&v| is_cut[v]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use proptest::prelude::*;

    fn graph_from(n: usize, pairs: &[(usize, usize)]) -> Graph {
        let ids = (0..n).map(|i| i.to_string()).collect();
        let edges = pairs
            .iter()
            .map(|&(source, target)| Edge {
                source,
                target,
                weight: 1.0,
            })
            .collect();
        Graph::from_parts(ids, edges).unwrap()
    }

    #[test]
    fn directed_path() {
        let r = components(&graph_from(3, &[(0, 1), (1, 2)]));
        assert_eq!(r.weak_component_sizes, vec![3]);
        assert_eq!(r.strong_component_sizes, vec![1, 1, 1]);
        assert_eq!(r.articulation_points, vec![1]);
        assert!(r.is_giant_weak_component);
        assert!(!r.is_strongly_connected);
    }

    #[test]
    fn two_disjoint_dyads() {
        let r = components(&graph_from(4, &[(0, 1), (2, 3), (3, 2)]));
        assert_eq!(r.weak_component_sizes, vec![2, 2]);
        assert_eq!(r.strong_component_sizes, vec![2, 1, 1]);
        assert!(r.articulation_points.is_empty());
        assert!(!r.is_giant_weak_component);
    }

    #[test]
    fn directed_cycle_is_strongly_connected_without_cut_vertices() {
        let r = components(&graph_from(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]));
        assert!(r.is_strongly_connected);
        assert!(r.articulation_points.is_empty());
    }

    fn weak_count_without(graph: &Graph, removed: usize) -> usize {
        let keep: Vec<usize> = (0..graph.node_count()).filter(|&v| v != removed).collect();
        weak_component_sizes(&graph.subgraph(&keep).unwrap()).len()
    }

    fn random_graph() -> impl Strategy<Value = Graph> {
        (2usize..=50).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..(2 * n)).prop_map(move |pairs| {
                let mut seen = std::collections::HashSet::new();
                let pairs: Vec<_> = pairs
                    .into_iter()
                    .filter(|&(a, b)| a != b && seen.insert((a, b)))
                    .collect();
                graph_from(n, &pairs)
            })
        })
    }

    proptest! {
        #[test]
        fn component_sizes_partition_nodes(g in random_graph()) {
            let r = components(&g);
            prop_assert_eq!(r.weak_component_sizes.iter().sum::<usize>(), g.node_count());
            prop_assert_eq!(r.strong_component_sizes.iter().sum::<usize>(), g.node_count());
        }

        #[test]
        fn articulation_points_match_removal(g in random_graph()) {
            let r = components(&g);
            let base = weak_component_sizes(&g).len();
            for v in 0..g.node_count() {
                let increases = g.node_count() > 1 && weak_count_without(&g, v) > base;
                prop_assert_eq!(r.articulation_points.contains(&v), increases, "node {}", v);
            }
        }
    }
}

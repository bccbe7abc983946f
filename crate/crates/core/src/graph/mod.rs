//! Directed weighted network, node attributes and connectivity primitives.
//!
//! A [`Graph`] is immutable once built. Nodes are indexed `0..n` in the order
//! they first appear in the input, and every other module addresses nodes by
//! that position. External identifiers are kept for reporting only.

mod attributes;
mod components;
mod io;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

pub use attributes::{
    AttributeError, AttributeTable, Categorical, CategoricalColumn, Quantitative,
};
pub use components::{components, ComponentReport};
pub use io::{
    load_attributes, load_edge_list, write_dot, write_edge_csv, write_graphml, EdgeFormat,
    JsonMapping,
};

/// Errors raised while building or loading a [`Graph`].
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no nodes")]
    NoNodes,
    #[error("line {line}: malformed row: {message}")]
    Malformed { line: u64, message: String },
    #[error("{}empty node identifier", line_prefix(*.line))]
    EmptyNodeId { line: Option<u64> },
    #[error("{}self-loop on node '{node}'", line_prefix(*.line))]
    SelfLoop { node: String, line: Option<u64> },
    #[error("{}duplicate directed edge {from} -> {to}", line_prefix(*.line))]
    DuplicateEdge {
        from: String,
        to: String,
        line: Option<u64>,
    },
    #[error("{}weight {weight} of edge {from} -> {to} outside (0, 1]", line_prefix(*.line))]
    InvalidWeight {
        from: String,
        to: String,
        weight: f64,
        line: Option<u64>,
    },
    #[error("attribute '{attribute}' has no level '{level}'")]
    UnknownLevel { attribute: String, level: String },
    #[error("attribute '{0}' is not present in the attribute table")]
    MissingAttribute(String),
    #[error("selection is empty")]
    EmptySelection,
    #[error("invalid upstream JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn line_prefix(line: Option<u64>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

/// One directed edge `source -> target` carrying an influence weight in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Immutable directed weighted network without self-loops or parallel edges.
#[derive(Clone, Debug)]
pub struct Graph {
    node_ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
    undirected: Vec<Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.node_ids == other.node_ids && self.edges == other.edges
    }
}

impl Graph {
    /// Builds a graph from explicit node identifiers and positional edges.
    pub fn from_parts(node_ids: Vec<String>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let mut builder = GraphBuilder::default();
        for id in node_ids {
            builder.add_node(&id, None)?;
        }
        let n = builder.node_ids.len();
        for e in edges {
            if e.source >= n || e.target >= n {
                return Err(GraphError::Malformed {
                    line: 0,
                    message: format!("edge {} -> {} references a missing node", e.source, e.target),
                });
            }
            builder.add_indexed_edge(e.source, e.target, e.weight, None)?;
        }
        builder.build()
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.node_ids[i]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Edges in input order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Out-neighbours of `i` with weights, sorted by target index.
    pub fn out_neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.out_adj[i]
    }

    /// In-neighbours of `i` with weights, sorted by source index.
    pub fn in_neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.in_adj[i]
    }

    /// Neighbours of `i` in the undirected projection, sorted.
    pub fn undirected_neighbors(&self, i: usize) -> &[usize] {
        &self.undirected[i]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_adj[i].len()
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_adj[i].len()
    }

    pub fn weight(&self, source: usize, target: usize) -> Option<f64> {
        let row = &self.out_adj[source];
        row.binary_search_by_key(&target, |&(t, _)| t)
            .ok()
            .map(|k| row[k].1)
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.weight(source, target).is_some()
    }

    /// Subgraph over `nodes` (kept in their current relative order) with
    /// every edge whose endpoints are both selected.
    pub fn subgraph(&self, nodes: &[usize]) -> Result<Graph, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::EmptySelection);
        }
        let mut keep: Vec<Option<usize>> = vec![None; self.node_count()];
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for (new, &old) in sorted.iter().enumerate() {
            keep[old] = Some(new);
        }
        let ids = sorted.iter().map(|&i| self.node_ids[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| match (keep[e.source], keep[e.target]) {
                (Some(s), Some(t)) => Some(Edge {
                    source: s,
                    target: t,
                    weight: e.weight,
                }),
                _ => None,
            })
            .collect();
        Graph::from_parts(ids, edges)
    }

    /// Short content digest used to tie fitted models to their graph.
    pub fn digest(&self) -> String {
        let mut buf = Vec::with_capacity(self.edges.len() * 16);
        for id in &self.node_ids {
            buf.extend_from_slice(id.as_bytes());
            buf.push(0);
        }
        for e in &self.edges {
            buf.extend_from_slice(&(e.source as u64).to_le_bytes());
            buf.extend_from_slice(&(e.target as u64).to_le_bytes());
            buf.extend_from_slice(&e.weight.to_le_bytes());
        }
        crate::numeric::hex_digest(&buf)[..16].to_string()
    }
}

/// Incremental graph construction with first-appearance node numbering.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    node_ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    seen: HashSet<(usize, usize)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `id`, returning its index.
    pub fn add_node(&mut self, id: &str, line: Option<u64>) -> Result<usize, GraphError> {
        let id = id.trim();
        if id.is_empty() {
            return Err(GraphError::EmptyNodeId { line });
        }
        if let Some(&i) = self.index.get(id) {
            return Ok(i);
        }
        let i = self.node_ids.len();
        self.node_ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        Ok(i)
    }

    pub fn add_edge(
        &mut self,
        source: &str,
        target: &str,
        weight: f64,
        line: Option<u64>,
    ) -> Result<(), GraphError> {
        let s = self.add_node(source, line)?;
        let t = self.add_node(target, line)?;
        self.add_indexed_edge(s, t, weight, line)
    }

    fn add_indexed_edge(
        &mut self,
        source: usize,
        target: usize,
        weight: f64,
        line: Option<u64>,
    ) -> Result<(), GraphError> {
        if source == target {
            return Err(GraphError::SelfLoop {
                node: self.node_ids[source].clone(),
                line,
            });
        }
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(GraphError::InvalidWeight {
                from: self.node_ids[source].clone(),
                to: self.node_ids[target].clone(),
                weight,
                line,
            });
        }
        if !self.seen.insert((source, target)) {
            return Err(GraphError::DuplicateEdge {
                from: self.node_ids[source].clone(),
                to: self.node_ids[target].clone(),
                line,
            });
        }
        self.edges.push(Edge {
            source,
            target,
            weight,
        });
        Ok(())
    }

    pub fn build(self) -> Result<Graph, GraphError> {
        let n = self.node_ids.len();
        if n == 0 {
            return Err(GraphError::NoNodes);
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut undirected = vec![Vec::new(); n];
        for e in &self.edges {
            out_adj[e.source].push((e.target, e.weight));
            in_adj[e.target].push((e.source, e.weight));
            undirected[e.source].push(e.target);
            undirected[e.target].push(e.source);
        }
        for row in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            row.sort_unstable_by_key(|&(k, _)| k);
        }
        for row in &mut undirected {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Graph {
            node_ids: self.node_ids,
            index: self.index,
            edges: self.edges,
            out_adj,
            in_adj,
            undirected,
        })
    }
}

/// Dense 0/1 view of the adjacency matrix; weights are discarded and the
/// diagonal is always zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryAdjacency {
    n: usize,
    cells: Vec<bool>,
    edges: usize,
}

impl BinaryAdjacency {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            cells: vec![false; n * n],
            edges: 0,
        }
    }

    pub fn from_graph(graph: &Graph) -> Self {
        let mut adj = Self::empty(graph.node_count());
        for e in graph.edges() {
            adj.set(e.source, e.target, true);
        }
        adj
    }

    /// Builds a view from positional pairs, ignoring diagonal entries.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = Self::empty(n);
        for (i, j) in pairs {
            if i != j {
                adj.set(i, j, true);
            }
        }
        adj
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        if self.get(i, j) {
            1.0
        } else {
            0.0
        }
    }

    /// Sets `y_ij`; setting a diagonal entry is a no-op.
    pub fn set(&mut self, i: usize, j: usize, present: bool) {
        if i == j {
            return;
        }
        let cell = &mut self.cells[i * self.n + j];
        if *cell != present {
            if present {
                self.edges += 1;
            } else {
                self.edges -= 1;
            }
            *cell = present;
        }
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        let current = self.get(i, j);
        self.set(i, j, !current);
    }

    /// Present `(i, j)` pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(k, _)| (k / n, k % n))
    }

    /// Out-neighbour lists.
    pub fn out_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| (0..self.n).filter(|&j| self.get(i, j)).collect())
            .collect()
    }

    /// In-neighbour lists.
    pub fn in_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|j| (0..self.n).filter(|&i| self.get(i, j)).collect())
            .collect()
    }
}

/// Binary adjacency view of `graph`.
pub fn binary_adjacency(graph: &Graph) -> BinaryAdjacency {
    BinaryAdjacency::from_graph(graph)
}

/// Subgraph induced by the nodes whose categorical `attribute` equals `level`.
pub fn induced_subgraph(
    graph: &Graph,
    attrs: &AttributeTable,
    attribute: Categorical,
    level: &str,
) -> Result<Graph, GraphError> {
    let column = attrs
        .categorical(attribute)
        .ok_or_else(|| GraphError::MissingAttribute(attribute.name().to_string()))?;
    let code = column
        .level_code(level)
        .ok_or_else(|| GraphError::UnknownLevel {
            attribute: attribute.name().to_string(),
            level: level.to_string(),
        })?;
    let nodes: Vec<usize> = (0..graph.node_count())
        .filter(|&i| column.code(i) == code)
        .collect();
    graph.subgraph(&nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn graph_from(n: usize, pairs: &[(usize, usize)]) -> Graph {
        let ids = (0..n).map(|i| format!("v{i}")).collect();
        let edges = pairs
            .iter()
            .map(|&(s, t)| Edge {
                source: s,
                target: t,
                weight: 0.5,
            })
            .collect();
        Graph::from_parts(ids, edges).unwrap()
    }

    #[test]
    fn builder_rejects_self_loops_duplicates_and_bad_weights() {
        let mut b = GraphBuilder::new();
        assert!(matches!(
            b.add_edge("a", "a", 0.5, Some(2)),
            Err(GraphError::SelfLoop { line: Some(2), .. })
        ));
        b.add_edge("a", "b", 0.5, None).unwrap();
        assert!(matches!(
            b.add_edge("a", "b", 0.1, None),
            Err(GraphError::DuplicateEdge { .. })
        ));
        for w in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                b.add_edge("b", "c", w, None),
                Err(GraphError::InvalidWeight { .. })
            ));
        }
        b.add_edge("b", "a", 1.0, None).unwrap();
        let g = b.build().unwrap();
        assert_eq!(g.node_count(), 3, "c was interned before the weight check");
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn empty_builder_has_no_nodes() {
        assert!(matches!(GraphBuilder::new().build(), Err(GraphError::NoNodes)));
    }

    #[test]
    fn adjacency_access_is_directional() {
        let g = graph_from(3, &[(0, 1), (2, 0)]);
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 0));
        assert_eq!(g.out_degree(0), 1);
        assert_eq!(g.in_degree(0), 1);
        assert_eq!(g.undirected_neighbors(0), &[1, 2]);
        assert_eq!(g.weight(2, 0), Some(0.5));
    }

    #[test]
    fn binary_view_of_edgeless_and_two_cycle() {
        let g = graph_from(4, &[]);
        let y = binary_adjacency(&g);
        assert_eq!(y.edge_count(), 0);
        assert!((0..4).all(|i| (0..4).all(|j| !y.get(i, j))));

        let g = graph_from(2, &[(0, 1), (1, 0)]);
        let y = binary_adjacency(&g);
        assert!(y.get(0, 1) && y.get(1, 0));
        assert!(!y.get(0, 0) && !y.get(1, 1));
    }

    #[test]
    fn binary_view_toggle_tracks_edge_count() {
        let mut y = BinaryAdjacency::empty(3);
        y.toggle(0, 1);
        y.toggle(1, 2);
        y.toggle(0, 1);
        y.set(2, 2, true);
        assert_eq!(y.edge_count(), 1);
        assert_eq!(y.pairs().collect::<Vec<_>>(), vec![(1, 2)]);
    }

    #[test]
    fn subgraph_keeps_internal_edges_only() {
        let g = graph_from(4, &[(0, 1), (1, 2), (2, 0), (3, 0)]);
        let s = g.subgraph(&[2, 0]).unwrap();
        assert_eq!(s.node_ids(), &["v0".to_string(), "v2".to_string()]);
        assert_eq!(s.edge_count(), 1);
        assert!(s.has_edge(1, 0));
        assert!(matches!(g.subgraph(&[]), Err(GraphError::EmptySelection)));
    }
}

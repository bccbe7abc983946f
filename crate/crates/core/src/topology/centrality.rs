//! Node-level centralities on the binary digraph.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TopologyError;
use crate::graph::Graph;

/// Sources per work unit in the parallel passes. Fixed so that the reduction
/// order, and therefore the floating-point result, does not depend on the
/// number of worker threads.
const SOURCE_CHUNK: usize = 32;

/// `(in_degree, out_degree, out_strength)` for one node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeStrength {
    pub in_degree: usize,
    pub out_degree: usize,
    pub out_strength: f64,
}

pub fn degree_strength(graph: &Graph) -> Vec<DegreeStrength> {
    (0..graph.node_count())
        .map(|i| DegreeStrength {
            in_degree: graph.in_degree(i),
            out_degree: graph.out_degree(i),
            out_strength: graph.out_neighbors(i).iter().map(|&(_, w)| w).sum(),
        })
        .collect()
}

/// Direction of travel for geodesic distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Distances from the node along out-edges.
    #[default]
    Out,
    /// Distances to the node, i.e. along in-edges.
    In,
}

fn bfs_distances(graph: &Graph, source: usize, direction: Direction, dist: &mut [usize]) {
    dist.fill(usize::MAX);
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let next = match direction {
            Direction::Out => graph.out_neighbors(v),
            Direction::In => graph.in_neighbors(v),
        };
        for &(w, _) in next {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
}

/// Closeness over reachable nodes only: `|R_i| / sum_{j in R_i} d(i, j)`.
/// Nodes that reach nobody are `None`.
pub fn closeness(graph: &Graph, direction: Direction) -> Result<Vec<Option<f64>>, TopologyError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(TopologyError::TooFewNodes { required: 2, found: n });
    }
    Ok((0..n)
        .into_par_iter()
        .map_init(
            || vec![0usize; n],
            |dist, i| {
                bfs_distances(graph, i, direction, dist);
                let (reached, total) = dist
                    .iter()
                    .enumerate()
                    .filter(|&(j, &d)| j != i && d != usize::MAX)
                    .fold((0usize, 0usize), |(c, s), (_, &d)| (c + 1, s + d));
                (reached > 0).then(|| reached as f64 / total as f64)
            },
        )
        .collect())
}

/// Brandes accumulation for one source; adds pair dependencies into `acc`.
fn brandes_source(graph: &Graph, s: usize, acc: &mut [f64], scratch: &mut BrandesScratch) {
    let BrandesScratch {
        sigma,
        dist,
        delta,
        order,
        queue,
    } = scratch;
    sigma.fill(0.0);
    dist.fill(usize::MAX);
    delta.fill(0.0);
    order.clear();
    queue.clear();

    sigma[s] = 1.0;
    dist[s] = 0;
    queue.push_back(s);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, _) in graph.out_neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
            }
        }
    }
    for &w in order.iter().rev() {
        for &(v, _) in graph.in_neighbors(w) {
            if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
        }
        if w != s {
            acc[w] += delta[w];
        }
    }
}

struct BrandesScratch {
    sigma: Vec<f64>,
    dist: Vec<usize>,
    delta: Vec<f64>,
    order: Vec<usize>,
    queue: VecDeque<usize>,
}

impl BrandesScratch {
    fn new(n: usize) -> Self {
        Self {
            sigma: vec![0.0; n],
            dist: vec![0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            queue: VecDeque::with_capacity(n),
        }
    }
}

/// Unweighted directed betweenness normalised by `(n-1)(n-2)`.
pub fn betweenness(graph: &Graph) -> Result<Vec<f64>, TopologyError> {
    let n = graph.node_count();
    if n < 3 {
        return Err(TopologyError::TooFewNodes { required: 3, found: n });
    }
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut scratch = BrandesScratch::new(n);
            for &s in chunk {
                brandes_source(graph, s, &mut acc, &mut scratch);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    let scale = ((n - 1) * (n - 2)) as f64;
    Ok(total.into_iter().map(|b| b / scale).collect())
}

/// How the directed adjacency is made symmetric for eigenvector centrality.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// `a_ij = max(y_ij, y_ji)`.
    #[default]
    Binary,
    /// `a_ij = y_ij + y_ji`, so reciprocated ties count twice.
    Summed,
}

/// Settings for the power iterations (eigenvector centrality and HITS).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerOptions {
    /// Use edge weights instead of 0/1 entries.
    pub weighted: bool,
    pub projection: Projection,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            weighted: false,
            projection: Projection::Binary,
            tolerance: 1e-10,
            max_iter: 10_000,
        }
    }
}

fn scale_to_max(v: &mut [f64]) -> bool {
    let max = v.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        v.iter_mut().for_each(|x| *x /= max);
        true
    } else {
        false
    }
}

/// Iterates `x <- op(x)` with max-normalisation until the sup-norm change
/// drops below the tolerance.
fn power_iterate(
    n: usize,
    options: &PowerOptions,
    metric: &'static str,
    mut op: impl FnMut(&[f64], &mut [f64]),
) -> Result<Vec<f64>, TopologyError> {
    let mut x = vec![1.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..options.max_iter {
        op(&x, &mut next);
        if !scale_to_max(&mut next) {
            return Ok(next);
        }
        let change = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if change < options.tolerance {
            return Ok(x);
        }
    }
    Err(TopologyError::NotConverged {
        metric,
        iterations: options.max_iter,
    })
}

/// Dominant eigenvector of the undirected projection, scaled to max 1.
pub fn eigen_centrality(graph: &Graph, options: &PowerOptions) -> Result<Vec<f64>, TopologyError> {
    if graph.edge_count() == 0 {
        return Err(TopologyError::NoEdges);
    }
    let n = graph.node_count();
    let value = |w: f64| if options.weighted { w } else { 1.0 };
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for &j in graph.undirected_neighbors(i) {
                let out = graph.weight(i, j).map(value);
                let inc = graph.weight(j, i).map(value);
                let a = match options.projection {
                    Projection::Binary => out.unwrap_or(0.0).max(inc.unwrap_or(0.0)),
                    Projection::Summed => out.unwrap_or(0.0) + inc.unwrap_or(0.0),
                };
                row.push((j, a));
            }
            row
        })
        .collect();
    // Iterating on A + I leaves the eigenvectors unchanged and avoids the
    // sign oscillation of bipartite components.
    power_iterate(n, options, "eigenvector centrality", |x, out| {
        for (i, row) in rows.iter().enumerate() {
            out[i] = x[i] + row.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        }
    })
}

/// Hub and authority scores, each scaled to max 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitsScores {
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
}

/// HITS by power iteration on `A A^T` (hubs) and `A^T A` (authorities).
pub fn hits(graph: &Graph, options: &PowerOptions) -> Result<HitsScores, TopologyError> {
    if graph.edge_count() == 0 {
        return Err(TopologyError::NoEdges);
    }
    let n = graph.node_count();
    let value = |w: f64| if options.weighted { w } else { 1.0 };
    let mut tmp = vec![0.0; n];
    // out[i] = sum_j A_ij (sum_k A_kj x_k)
    let hub = power_iterate(n, options, "HITS hubs", |x, out| {
        for j in 0..n {
            tmp[j] = graph.in_neighbors(j).iter().map(|&(k, w)| value(w) * x[k]).sum();
        }
        for i in 0..n {
            out[i] = graph.out_neighbors(i).iter().map(|&(j, w)| value(w) * tmp[j]).sum();
        }
    })?;
    let authority = power_iterate(n, options, "HITS authorities", |x, out| {
        for i in 0..n {
            tmp[i] = graph.out_neighbors(i).iter().map(|&(j, w)| value(w) * x[j]).sum();
        }
        for j in 0..n {
            out[j] = graph.in_neighbors(j).iter().map(|&(k, w)| value(w) * tmp[k]).sum();
        }
    })?;
    Ok(HitsScores { hub, authority })
}

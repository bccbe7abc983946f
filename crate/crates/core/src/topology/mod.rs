//! Descriptive statistics of the network: centralities, HITS, density
//! family, triads, clustering, maximal cliques and assortativity.
//!
//! Geodesic metrics run on the unweighted digraph. Clique and clustering
//! metrics use the undirected projection, where two nodes are adjacent when
//! a tie exists in either direction.

mod assortativity;
mod centrality;
mod connectivity;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assortativity::{
    assortativity_categorical, assortativity_report, assortativity_scalar, AssortativityEntry,
    AssortativityReport, StructuralMode, VariableKind,
};
pub use centrality::{
    betweenness, closeness, degree_strength, eigen_centrality, hits, DegreeStrength, Direction,
    HitsScores, PowerOptions, Projection,
};
pub use connectivity::{
    density, for_each_maximal_clique, max_clique_size, maximal_cliques, reciprocity,
    triad_closure, TriadReport,
};

use crate::graph::Graph;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("metric needs at least {required} nodes, graph has {found}")]
    TooFewNodes { required: usize, found: usize },
    #[error("metric needs at least one edge")]
    NoEdges,
    #[error("{metric} did not converge after {iterations} iterations")]
    NotConverged {
        metric: &'static str,
        iterations: usize,
    },
    #[error("mixing matrix is degenerate; assortativity undefined")]
    DegenerateMixing,
    #[error("expected one value per node ({expected}), got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// All node-level metrics for one node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeCentrality {
    pub in_degree: usize,
    pub out_degree: usize,
    pub out_strength: f64,
    /// Out-direction closeness; `None` if the node reaches nobody.
    pub closeness: Option<f64>,
    pub betweenness: f64,
    pub eigen: f64,
    pub hub: f64,
    pub authority: f64,
    pub local_clustering: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralityReport {
    pub nodes: Vec<NodeCentrality>,
}

/// Metric selector for [`CentralityReport::values`] and top-k tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    InDegree,
    OutDegree,
    OutStrength,
    Closeness,
    Betweenness,
    Eigen,
    Hub,
    Authority,
    LocalClustering,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::InDegree,
        Metric::OutDegree,
        Metric::OutStrength,
        Metric::Closeness,
        Metric::Betweenness,
        Metric::Eigen,
        Metric::Hub,
        Metric::Authority,
        Metric::LocalClustering,
    ];

    /// The eight structural metrics used as covariates and in summaries.
    pub const STRUCTURAL: [Metric; 8] = [
        Metric::InDegree,
        Metric::OutDegree,
        Metric::OutStrength,
        Metric::Closeness,
        Metric::Betweenness,
        Metric::Eigen,
        Metric::Hub,
        Metric::Authority,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::InDegree => "in_degree",
            Metric::OutDegree => "out_degree",
            Metric::OutStrength => "out_strength",
            Metric::Closeness => "closeness",
            Metric::Betweenness => "betweenness",
            Metric::Eigen => "eigen",
            Metric::Hub => "hub",
            Metric::Authority => "authority",
            Metric::LocalClustering => "local_clustering",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl CentralityReport {
    pub fn compute(graph: &Graph, options: &PowerOptions) -> Result<Self, TopologyError> {
        let degrees = degree_strength(graph);
        let close = closeness(graph, Direction::Out)?;
        let between = betweenness(graph)?;
        let eigen = eigen_centrality(graph, options)?;
        let h = hits(graph, options)?;
        let triads = triad_closure(graph)?;
        let nodes = (0..graph.node_count())
            .map(|i| NodeCentrality {
                in_degree: degrees[i].in_degree,
                out_degree: degrees[i].out_degree,
                out_strength: degrees[i].out_strength,
                closeness: close[i],
                betweenness: between[i],
                eigen: eigen[i],
                hub: h.hub[i],
                authority: h.authority[i],
                local_clustering: triads.local_clustering[i],
            })
            .collect();
        Ok(Self { nodes })
    }

    /// Values of `metric` per node; undefined entries are `None`.
    pub fn values(&self, metric: Metric) -> Vec<Option<f64>> {
        self.nodes
            .iter()
            .map(|c| match metric {
                Metric::InDegree => Some(c.in_degree as f64),
                Metric::OutDegree => Some(c.out_degree as f64),
                Metric::OutStrength => Some(c.out_strength),
                Metric::Closeness => c.closeness,
                Metric::Betweenness => Some(c.betweenness),
                Metric::Eigen => Some(c.eigen),
                Metric::Hub => Some(c.hub),
                Metric::Authority => Some(c.authority),
                Metric::LocalClustering => c.local_clustering,
            })
            .collect()
    }

    /// Values with undefined entries replaced by zero, for use as covariates.
    pub fn covariate(&self, metric: Metric) -> Vec<f64> {
        self.values(metric).into_iter().map(|v| v.unwrap_or(0.0)).collect()
    }

    /// The `k` highest-scoring nodes, ties broken by node index.
    pub fn top_k(&self, metric: Metric, k: usize) -> Vec<(usize, f64)> {
        let mut ranked: Vec<(usize, f64)> = self
            .values(metric)
            .into_iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }

    /// One CSV row per node.
    pub fn write_csv<W: Write>(&self, graph: &Graph, mut sink: W) -> std::io::Result<()> {
        write!(sink, "node_id")?;
        for m in Metric::ALL {
            write!(sink, ",{}", m.name())?;
        }
        writeln!(sink)?;
        let columns: Vec<Vec<Option<f64>>> = Metric::ALL.iter().map(|&m| self.values(m)).collect();
        for i in 0..self.nodes.len() {
            write!(sink, "{}", csv_field(graph.node_id(i)))?;
            for col in &columns {
                match col[i] {
                    Some(v) => write!(sink, ",{v}")?,
                    None => write!(sink, ",")?,
                }
            }
            writeln!(sink)?;
        }
        Ok(())
    }
}

/// Graph-level connectivity summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub density: f64,
    pub reciprocity: f64,
    pub transitivity: f64,
    pub mean_local_clustering: f64,
    pub triad_closed_fraction: f64,
    /// Maximal cliques with at least `min_clique_size` members.
    pub maximal_cliques: Vec<Vec<usize>>,
    pub max_clique_size: usize,
    pub min_clique_size: usize,
}

impl ConnectivityReport {
    /// `min_clique_size = None` keeps only the largest cliques.
    pub fn compute(graph: &Graph, min_clique_size: Option<usize>) -> Result<Self, TopologyError> {
        let triads = triad_closure(graph)?;
        let mut all = Vec::new();
        let mut largest = 0;
        let threshold = min_clique_size.unwrap_or(0);
        for_each_maximal_clique(graph, |c| {
            largest = largest.max(c.len());
            if c.len() >= threshold {
                all.push(c.to_vec());
            }
        });
        let min_clique_size = min_clique_size.unwrap_or(largest);
        all.retain(|c| c.len() >= min_clique_size);
        all.sort();
        Ok(Self {
            density: density(graph)?,
            reciprocity: reciprocity(graph)?,
            transitivity: triads.transitivity,
            mean_local_clustering: triads.mean_local_clustering,
            triad_closed_fraction: triads.triad_closed_fraction,
            maximal_cliques: all,
            max_clique_size: largest,
            min_clique_size,
        })
    }

    /// `key,value` rows; cliques are listed as `clique_k` with `;`-joined
    /// node identifiers.
    pub fn write_csv<W: Write>(&self, graph: &Graph, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "key,value")?;
        writeln!(sink, "density,{}", self.density)?;
        writeln!(sink, "reciprocity,{}", self.reciprocity)?;
        writeln!(sink, "transitivity,{}", self.transitivity)?;
        writeln!(sink, "mean_local_clustering,{}", self.mean_local_clustering)?;
        writeln!(sink, "triad_closed_fraction,{}", self.triad_closed_fraction)?;
        writeln!(sink, "max_clique_size,{}", self.max_clique_size)?;
        writeln!(sink, "clique_count,{}", self.maximal_cliques.len())?;
        for (k, c) in self.maximal_cliques.iter().enumerate() {
            let ids: Vec<&str> = c.iter().map(|&i| graph.node_id(i)).collect();
            writeln!(sink, "clique_{},{}", k + 1, csv_field(&ids.join(";")))?;
        }
        Ok(())
    }
}

impl AssortativityReport {
    /// `key,value` rows; undefined coefficients leave the value empty.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "key,value")?;
        for e in &self.entries {
            match e.coefficient {
                Some(v) => writeln!(sink, "{},{v}", e.variable)?,
                None => writeln!(sink, "{},", e.variable)?,
            }
        }
        Ok(())
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

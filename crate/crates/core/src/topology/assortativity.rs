//! Newman assortativity over directed edges.

use serde::{Deserialize, Serialize};

use super::{CentralityReport, TopologyError};
use crate::graph::{AttributeTable, Graph};

/// Categorical assortativity from the directed mixing matrix:
/// `r = (sum_g e_gg - sum_g a_g b_g) / (1 - sum_g a_g b_g)`.
///
/// `labels` are level codes per node. When every edge joins two nodes of a
/// single level the denominator vanishes; that case is reported as `1.0`.
pub fn assortativity_categorical(graph: &Graph, labels: &[usize]) -> Result<f64, TopologyError> {
    check_len(graph, labels.len())?;
    let m = graph.edge_count();
    if m == 0 {
        return Err(TopologyError::NoEdges);
    }
    let levels = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut e = vec![0.0; levels * levels];
    for edge in graph.edges() {
        e[labels[edge.source] * levels + labels[edge.target]] += 1.0;
    }
    let m = m as f64;
    let mut trace = 0.0;
    let mut ab = 0.0;
    for g in 0..levels {
        trace += e[g * levels + g] / m;
        let a: f64 = (0..levels).map(|h| e[g * levels + h]).sum::<f64>() / m;
        let b: f64 = (0..levels).map(|h| e[h * levels + g]).sum::<f64>() / m;
        ab += a * b;
    }
    let denom = 1.0 - ab;
    if denom.abs() < 1e-12 {
        return if (trace - 1.0).abs() < 1e-12 {
            Ok(1.0)
        } else {
            Err(TopologyError::DegenerateMixing)
        };
    }
    Ok((trace - ab) / denom)
}

/// Pearson correlation over directed edges between `source_values[i]` and
/// `target_values[j]`. `None` when either end has zero variance.
pub fn assortativity_scalar(
    graph: &Graph,
    source_values: &[f64],
    target_values: &[f64],
) -> Result<Option<f64>, TopologyError> {
    check_len(graph, source_values.len())?;
    check_len(graph, target_values.len())?;
    let m = graph.edge_count();
    if m == 0 {
        return Ok(None);
    }
    let m_f = m as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for e in graph.edges() {
        sx += source_values[e.source];
        sy += target_values[e.target];
    }
    let (mx, my) = (sx / m_f, sy / m_f);
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for e in graph.edges() {
        let dx = source_values[e.source] - mx;
        let dy = target_values[e.target] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    let scale = (vx * vy).sqrt();
    if !(scale > 1e-12 * m_f) {
        return Ok(None);
    }
    Ok(Some((cov / scale).clamp(-1.0, 1.0)))
}

fn check_len(graph: &Graph, len: usize) -> Result<(), TopologyError> {
    if len != graph.node_count() {
        return Err(TopologyError::LengthMismatch {
            expected: graph.node_count(),
            found: len,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Categorical,
    Scalar,
    Structural,
}

/// Pairing of source and target values for direction-split structural
/// metrics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructuralMode {
    /// The same metric on both edge ends.
    #[default]
    SameValue,
    /// Source uses its out-variant and target its in-variant (out/in degree,
    /// out/in strength, hub/authority).
    OutIn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssortativityEntry {
    pub variable: String,
    pub kind: VariableKind,
    /// `None` when the coefficient is undefined.
    pub coefficient: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssortativityReport {
    pub entries: Vec<AssortativityEntry>,
}

impl AssortativityReport {
    pub fn get(&self, variable: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.variable == variable)
            .and_then(|e| e.coefficient)
    }
}

/// Assortativity of every available attribute plus the structural metrics.
pub fn assortativity_report(
    graph: &Graph,
    attrs: Option<&AttributeTable>,
    centrality: &CentralityReport,
    mode: StructuralMode,
) -> Result<AssortativityReport, TopologyError> {
    let mut entries = Vec::new();
    if let Some(attrs) = attrs {
        for (attribute, column) in attrs.categorical_columns() {
            let coefficient = match assortativity_categorical(graph, column.codes()) {
                Ok(r) => Some(r),
                Err(TopologyError::DegenerateMixing | TopologyError::NoEdges) => None,
                Err(e) => return Err(e),
            };
            entries.push(AssortativityEntry {
                variable: attribute.name().to_string(),
                kind: VariableKind::Categorical,
                coefficient,
            });
        }
        for (attribute, values) in attrs.quantitative_columns() {
            entries.push(AssortativityEntry {
                variable: attribute.name().to_string(),
                kind: VariableKind::Scalar,
                coefficient: assortativity_scalar(graph, values, values)?,
            });
        }
    }

    let n = graph.node_count();
    let in_strength: Vec<f64> = (0..n)
        .map(|j| graph.in_neighbors(j).iter().map(|&(_, w)| w).sum())
        .collect();
    let column = |f: &dyn Fn(usize) -> f64| (0..n).map(f).collect::<Vec<f64>>();
    let c = centrality;
    let out_degree = column(&|i| c.nodes[i].out_degree as f64);
    let in_degree = column(&|i| c.nodes[i].in_degree as f64);
    let out_strength = column(&|i| c.nodes[i].out_strength);
    let closeness = column(&|i| c.nodes[i].closeness.unwrap_or(0.0));
    let betweenness = column(&|i| c.nodes[i].betweenness);
    let eigen = column(&|i| c.nodes[i].eigen);
    let hub = column(&|i| c.nodes[i].hub);
    let authority = column(&|i| c.nodes[i].authority);

    let split = mode == StructuralMode::OutIn;
    let rows: [(&str, &[f64], &[f64]); 8] = [
        ("out_degree", &out_degree, if split { &in_degree } else { &out_degree }),
        ("in_degree", if split { &out_degree } else { &in_degree }, &in_degree),
        ("out_strength", &out_strength, if split { &in_strength } else { &out_strength }),
        ("closeness", &closeness, &closeness),
        ("betweenness", &betweenness, &betweenness),
        ("eigen", &eigen, &eigen),
        ("hub", &hub, if split { &authority } else { &hub }),
        ("authority", if split { &hub } else { &authority }, &authority),
    ];
    for (name, src, tgt) in rows {
        entries.push(AssortativityEntry {
            variable: name.to_string(),
            kind: VariableKind::Structural,
            coefficient: assortativity_scalar(graph, src, tgt)?,
        });
    }
    Ok(AssortativityReport { entries })
}

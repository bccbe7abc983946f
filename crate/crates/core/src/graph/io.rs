//! Readers and writers for the edge list, the attribute table and the
//! GraphML/DOT exports.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::attributes::column_for;
use super::{
    AttributeError, AttributeTable, Categorical, Graph, GraphBuilder, GraphError, Quantitative,
};

/// Field names of the upstream per-node JSON distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct JsonMapping {
    /// Array of node identifiers; positions define node indices.
    pub nodes: String,
    /// Per-node array of out-neighbour positions.
    pub out_list: String,
    /// Per-node array of out-edge weights, parallel to `out_list`.
    pub out_weight: String,
}

impl Default for JsonMapping {
    fn default() -> Self {
        Self {
            nodes: "usernameList".into(),
            out_list: "outList".into(),
            out_weight: "outWeight".into(),
        }
    }
}

/// Supported edge-list encodings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeFormat {
    /// `source,target,weight` with a header row.
    Csv,
    /// Per-node adjacency arrays, field names from the mapping.
    UpstreamJson(JsonMapping),
}

/// Parses a directed weighted edge list.
pub fn load_edge_list<R: Read>(source: R, format: &EdgeFormat) -> Result<Graph, GraphError> {
    match format {
        EdgeFormat::Csv => load_csv(source),
        EdgeFormat::UpstreamJson(mapping) => load_upstream_json(source, mapping),
    }
}

fn load_csv<R: Read>(source: R) -> Result<Graph, GraphError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let mut builder = GraphBuilder::new();
    let mut records = reader.records();

    match records.next() {
        None => return Err(GraphError::NoNodes),
        Some(header) => {
            let header = header.map_err(|e| csv_error(&e))?;
            let cols: Vec<String> = header.iter().map(|c| c.to_ascii_lowercase()).collect();
            if cols != ["source", "target", "weight"] {
                return Err(GraphError::Malformed {
                    line: 1,
                    message: format!("expected header source,target,weight, got {}", cols.join(",")),
                });
            }
        }
    }

    for record in records {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(GraphError::Malformed {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let weight: f64 = record[2].parse().map_err(|_| GraphError::Malformed {
            line,
            message: format!("weight '{}' is not a number", &record[2]),
        })?;
        builder.add_edge(&record[0], &record[1], weight, Some(line))?;
    }
    builder.build()
}

fn csv_error(e: &csv::Error) -> GraphError {
    GraphError::Malformed {
        line: e.position().map(|p| p.line()).unwrap_or(0),
        message: e.to_string(),
    }
}

fn load_upstream_json<R: Read>(source: R, mapping: &JsonMapping) -> Result<Graph, GraphError> {
    let value: serde_json::Value =
        serde_json::from_reader(source).map_err(|e| GraphError::Json(e.to_string()))?;
    // The upstream file wraps the record in a one-element array.
    let record = match &value {
        serde_json::Value::Array(items) => items
            .first()
            .ok_or_else(|| GraphError::Json("empty top-level array".into()))?,
        other => other,
    };
    let field = |name: &str| {
        record
            .get(name)
            .and_then(|v| v.as_array())
            .ok_or_else(|| GraphError::Json(format!("missing array field '{name}'")))
    };
    let out_list = field(&mapping.out_list)?;
    let out_weight = field(&mapping.out_weight)?;
    let names: Vec<String> = match record.get(&mapping.nodes).and_then(|v| v.as_array()) {
        Some(arr) => arr
            .iter()
            .map(|v| match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect(),
        None => (0..out_list.len()).map(|i| i.to_string()).collect(),
    };
    if names.len() != out_list.len() || out_list.len() != out_weight.len() {
        return Err(GraphError::Json(format!(
            "node/adjacency length mismatch: {} names, {} out-lists, {} weight lists",
            names.len(),
            out_list.len(),
            out_weight.len()
        )));
    }

    let mut builder = GraphBuilder::new();
    for name in &names {
        builder.add_node(name, None)?;
    }
    for (i, (targets, weights)) in out_list.iter().zip(out_weight).enumerate() {
        let (targets, weights) = match (targets.as_array(), weights.as_array()) {
            (Some(t), Some(w)) if t.len() == w.len() => (t, w),
            _ => {
                return Err(GraphError::Json(format!(
                    "node {i}: out-list and out-weight arrays differ"
                )))
            }
        };
        for (t, w) in targets.iter().zip(weights) {
            let t = t
                .as_u64()
                .filter(|&t| (t as usize) < names.len())
                .ok_or_else(|| GraphError::Json(format!("node {i}: bad neighbour index {t}")))?;
            let w = w
                .as_f64()
                .ok_or_else(|| GraphError::Json(format!("node {i}: bad weight {w}")))?;
            builder.add_edge(&names[i], &names[t as usize], w, None)?;
        }
    }
    builder.build()
}

/// Writes the canonical `source,target,weight` CSV in input edge order, so
/// that reloading reproduces the same node numbering.
pub fn write_edge_csv<W: Write>(graph: &Graph, sink: W) -> Result<(), GraphError> {
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| GraphError::Io(std::io::Error::other(e));
    w.write_record(["source", "target", "weight"]).map_err(io)?;
    for e in graph.edges() {
        w.write_record([
            graph.node_id(e.source),
            graph.node_id(e.target),
            &e.weight.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the attribute CSV and aligns rows to graph indices.
pub fn load_attributes<R: Read>(source: R, graph: &Graph) -> Result<AttributeTable, AttributeError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| AttributeError::Csv(e.to_string()))?
        .clone();

    let mut id_col = None;
    let mut cat_cols: Vec<(usize, Categorical)> = Vec::new();
    let mut num_cols: Vec<(usize, Quantitative)> = Vec::new();
    for (k, h) in headers.iter().enumerate() {
        let h = h.to_ascii_lowercase();
        if h == "node_id" {
            id_col = Some(k);
        } else if let Some(c) = Categorical::from_name(&h) {
            cat_cols.push((k, c));
        } else if let Some(q) = Quantitative::ALL.into_iter().find(|q| q.name() == h) {
            num_cols.push((k, q));
        } else {
            log::warn!("attribute column '{h}' is not recognised and will be ignored");
        }
    }
    let id_col = id_col.ok_or(AttributeError::MissingNodeIdColumn)?;

    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut cat_values: HashMap<Categorical, Vec<String>> =
        cat_cols.iter().map(|&(_, c)| (c, vec![String::new(); n])).collect();
    let mut num_values: HashMap<Quantitative, Vec<f64>> =
        num_cols.iter().map(|&(_, q)| (q, vec![0.0; n])).collect();
    let mut rows = 0usize;

    for record in reader.records() {
        let record = record.map_err(|e| AttributeError::Csv(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let id = record.get(id_col).unwrap_or("").to_string();
        let node = graph
            .node_index(&id)
            .ok_or_else(|| AttributeError::UnknownNode { id: id.clone(), line })?;
        if std::mem::replace(&mut seen[node], true) {
            return Err(AttributeError::DuplicateNode { id, line });
        }
        rows += 1;
        for &(k, c) in &cat_cols {
            let raw = record.get(k).unwrap_or("");
            let level = c
                .canonical_level(raw)
                .ok_or_else(|| AttributeError::UnknownLevelInRow {
                    column: c.name(),
                    value: raw.to_string(),
                    line,
                })?;
            cat_values.get_mut(&c).expect("column registered")[node] = level;
        }
        for &(k, q) in &num_cols {
            let raw = record.get(k).unwrap_or("");
            let value = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| AttributeError::NotNumeric {
                    column: q.name(),
                    value: raw.to_string(),
                    line,
                })?;
            num_values.get_mut(&q).expect("column registered")[node] = value;
        }
    }
    if rows != n {
        return Err(AttributeError::Mismatch { rows, nodes: n });
    }

    let mut table = AttributeTable::new(graph.node_ids().to_vec());
    for (c, labels) in cat_values {
        table.insert_categorical(c, column_for(c, &labels));
    }
    for (q, values) in num_values {
        table = table.with_quantitative(q, values);
    }
    Ok(table)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// GraphML export with node attributes as `<data>` keys.
pub fn write_graphml<W: Write>(
    graph: &Graph,
    attrs: Option<&AttributeTable>,
    mut sink: W,
) -> std::io::Result<()> {
    writeln!(sink, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        sink,
        r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#
    )?;
    writeln!(
        sink,
        r#"  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>"#
    )?;
    if let Some(a) = attrs {
        for (c, _) in a.categorical_columns() {
            writeln!(
                sink,
                r#"  <key id="{0}" for="node" attr.name="{0}" attr.type="string"/>"#,
                c.name()
            )?;
        }
        for (q, _) in a.quantitative_columns() {
            writeln!(
                sink,
                r#"  <key id="{0}" for="node" attr.name="{0}" attr.type="double"/>"#,
                q.name()
            )?;
        }
    }
    writeln!(sink, r#"  <graph id="G" edgedefault="directed">"#)?;
    for i in 0..graph.node_count() {
        let id = xml_escape(graph.node_id(i));
        match attrs {
            None => writeln!(sink, r#"    <node id="{id}"/>"#)?,
            Some(a) => {
                writeln!(sink, r#"    <node id="{id}">"#)?;
                for (c, col) in a.categorical_columns() {
                    writeln!(
                        sink,
                        r#"      <data key="{}">{}</data>"#,
                        c.name(),
                        xml_escape(col.label(i))
                    )?;
                }
                for (q, values) in a.quantitative_columns() {
                    writeln!(sink, r#"      <data key="{}">{}</data>"#, q.name(), values[i])?;
                }
                writeln!(sink, "    </node>")?;
            }
        }
    }
    for e in graph.edges() {
        writeln!(
            sink,
            r#"    <edge source="{}" target="{}"><data key="weight">{}</data></edge>"#,
            xml_escape(graph.node_id(e.source)),
            xml_escape(graph.node_id(e.target)),
            e.weight
        )?;
    }
    writeln!(sink, "  </graph>")?;
    writeln!(sink, "</graphml>")
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz DOT export with node attributes as node properties.
pub fn write_dot<W: Write>(
    graph: &Graph,
    attrs: Option<&AttributeTable>,
    mut sink: W,
) -> std::io::Result<()> {
    writeln!(sink, "digraph G {{")?;
    for i in 0..graph.node_count() {
        let mut props = Vec::new();
        if let Some(a) = attrs {
            for (c, col) in a.categorical_columns() {
                props.push(format!("{}={}", c.name(), dot_quote(col.label(i))));
            }
            for (q, values) in a.quantitative_columns() {
                props.push(format!("{}={}", q.name(), values[i]));
            }
        }
        if props.is_empty() {
            writeln!(sink, "  {};", dot_quote(graph.node_id(i)))?;
        } else {
            writeln!(sink, "  {} [{}];", dot_quote(graph.node_id(i)), props.join(", "))?;
        }
    }
    for e in graph.edges() {
        writeln!(
            sink,
            "  {} -> {} [weight={}];",
            dot_quote(graph.node_id(e.source)),
            dot_quote(graph.node_id(e.target)),
            e.weight
        )?;
    }
    writeln!(sink, "}}")
}

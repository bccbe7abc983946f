//! Batch runner binding every analysis stage into one reproducible report
//! bundle.
//!
//! Stages run sequentially in dependency order; parallelism lives inside
//! the stages and never changes output bytes.

mod bundle;
mod summary;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bundle::{scan_outputs, verify_manifest, FileDigest, InputDigest, Manifest, MANIFEST};
pub use summary::render_summary;

use crate::ergm::{
    self, build_model, compare_models, fit_exact_dyad, fit_mcmle, fit_mple, likelihood_ratio_test,
    mcmc_diagnostics, named_model, report_effects, CovariateRoles, Effect, ErgmError, ErgmFit,
    LikelihoodRatioTest, McmcControl, Method, ModelComparison, ModelDefinition, ModelOptions,
    TermDiagnostics,
};
use crate::graph::{
    components, induced_subgraph, load_attributes, load_edge_list, write_dot, write_edge_csv,
    write_graphml, AttributeTable, BinaryAdjacency, Categorical, ComponentReport, EdgeFormat, Graph,
    JsonMapping,
};
use crate::numeric::{fmt_float, hex_digest, mean, sample_variance};
use crate::partition::{score, NmiNormalization, Partition, ScoreTable};
use crate::sbm::{
    community_summary, interaction_matrix, select_q, CommunitySummary, IclPoint, InteractionMatrix,
    SbmControl, SbmFit, SbmInit,
};
use crate::topology::{
    assortativity_report, csv_field, density, AssortativityReport, CentralityReport,
    ConnectivityReport, Metric, PowerOptions, StructuralMode,
};
use bundle::BundleWriter;

pub const RESULTS: &str = "results.json";
pub const SUMMARY: &str = "summary.md";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("output error: {0}")]
    Output(String),
}

impl PipelineError {
    /// Process exit status: 2 configuration, 3 data, 4 estimation, 1 output.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Data(_) => 3,
            PipelineError::Estimation(_) => 4,
            PipelineError::Output(_) => 1,
        }
    }

    fn output(path: &Path, e: std::io::Error) -> Self {
        PipelineError::Output(format!("{}: {e}", path.display()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Topology,
    Assortativity,
    Ergm,
    Sbm,
    Score,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Topology,
        Stage::Assortativity,
        Stage::Ergm,
        Stage::Sbm,
        Stage::Score,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Topology => "topology",
            Stage::Assortativity => "assortativity",
            Stage::Ergm => "ergm",
            Stage::Sbm => "sbm",
            Stage::Score => "score",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// `.json` files are read as upstream JSON, everything else as CSV.
    #[default]
    Auto,
    Csv,
    UpstreamJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SbmSettings {
    pub q_min: usize,
    /// Clamped to the node count.
    pub q_max: usize,
    pub restarts: usize,
    pub init: SbmInit,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SbmSettings {
    fn default() -> Self {
        let control = SbmControl::default();
        Self {
            q_min: 1,
            q_max: 20,
            restarts: control.restarts,
            init: control.init,
            max_iter: control.max_iter,
            tol: control.tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErgmSettings {
    /// Names of built-in (`model1`..`model6`) or custom models.
    pub models: Vec<String>,
    pub custom_models: Vec<ModelDefinition>,
    pub method: Method,
    pub standardize: bool,
    pub roles: CovariateRoles,
    pub mcmc: McmcControl,
}

impl Default for ErgmSettings {
    fn default() -> Self {
        Self {
            models: ergm::NAMED_MODELS.iter().map(|s| s.to_string()).collect(),
            custom_models: Vec::new(),
            method: Method::ExactDyad,
            standardize: false,
            roles: CovariateRoles::default(),
            mcmc: McmcControl::default(),
        }
    }
}

/// Everything a run needs. Relative paths in a config file resolve against
/// the file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub edges: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub edge_format: InputFormat,
    pub json_mapping: JsonMapping,
    /// `node_id -> party` applied by models flagged for reassignment.
    pub party_reassignment: BTreeMap<String, String>,
    pub ergm: ErgmSettings,
    pub sbm: SbmSettings,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub stages: Vec<Stage>,
    pub power: PowerOptions,
    pub structural_mode: StructuralMode,
    pub nmi: NmiNormalization,
    /// Worker cap; does not change output bytes.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            edges: None,
            attributes: None,
            edge_format: InputFormat::Auto,
            json_mapping: JsonMapping::default(),
            party_reassignment: BTreeMap::new(),
            ergm: ErgmSettings::default(),
            sbm: SbmSettings::default(),
            seed: 0,
            out: None,
            stages: Stage::ALL.to_vec(),
            power: PowerOptions::default(),
            structural_mode: StructuralMode::default(),
            nmi: NmiNormalization::default(),
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(x) = p.as_mut() {
                if x.is_relative() {
                    *x = base.join(&*x);
                }
            }
        };
        resolve(&mut config.edges);
        resolve(&mut config.attributes);
        resolve(&mut config.out);
        Ok(config)
    }

    /// Checks everything that can fail before any computation starts.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let edges = self
            .edges
            .as_ref()
            .ok_or_else(|| PipelineError::Config("no edge list given".into()))?;
        if !edges.is_file() {
            return Err(PipelineError::Config(format!("edge list {} not found", edges.display())));
        }
        if self.out.is_none() {
            return Err(PipelineError::Config("no output directory given".into()));
        }
        if self.stages.is_empty() {
            return Err(PipelineError::Config("no stages selected".into()));
        }
        if self.threads == Some(0) {
            return Err(PipelineError::Config("threads must be at least 1".into()));
        }
        let s = &self.sbm;
        if s.q_min == 0 || s.q_min > s.q_max {
            return Err(PipelineError::Config(format!("invalid community range {}:{}", s.q_min, s.q_max)));
        }
        if s.restarts == 0 || s.max_iter == 0 || !(s.tol.is_finite() && s.tol >= 0.0) {
            return Err(PipelineError::Config("invalid SBM control".into()));
        }
        if self.stages.contains(&Stage::Ergm) {
            for name in &self.ergm.models {
                self.model_definition(name)?;
            }
        }
        Ok(())
    }

    fn model_definition(&self, name: &str) -> Result<ModelDefinition, PipelineError> {
        if let Some(m) = self.ergm.custom_models.iter().find(|m| m.name == name) {
            return Ok(m.clone());
        }
        named_model(name).map_err(|e| PipelineError::Config(e.to_string()))
    }

    fn edge_format(&self, path: &Path) -> EdgeFormat {
        let json = match self.edge_format {
            InputFormat::Csv => false,
            InputFormat::UpstreamJson => true,
            InputFormat::Auto => path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")),
        };
        if json {
            EdgeFormat::UpstreamJson(self.json_mapping.clone())
        } else {
            EdgeFormat::Csv
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub nodes: usize,
    pub edges: usize,
    pub graph_digest: String,
    pub components: ComponentReport,
    /// Share of nodes at each level, per categorical attribute.
    pub attribute_proportions: BTreeMap<String, Vec<(String, f64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub max_in_degree: usize,
    pub min_in_degree: usize,
    pub max_out_degree: usize,
    pub min_out_degree: usize,
    pub mean_degree: f64,
    pub out_strength_mean: f64,
    /// Sample standard deviation.
    pub out_strength_sd: f64,
    pub out_strength_min: f64,
    pub out_strength_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedNode {
    pub metric: Metric,
    pub rank: usize,
    pub node_id: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupDensity {
    pub attribute: Categorical,
    pub level: String,
    pub nodes: usize,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologySummary {
    pub degrees: DegreeSummary,
    pub connectivity: ConnectivityReport,
    /// Top five nodes per metric.
    pub top: Vec<RankedNode>,
    pub group_densities: Vec<GroupDensity>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub name: String,
    pub fit: ErgmFit,
    pub effects: Vec<Effect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<TermDiagnostics>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmResults {
    pub curve: Vec<IclPoint>,
    pub best: SbmFit,
    pub interaction: InteractionMatrix,
    pub communities: CommunitySummary,
}

/// Everything the summary is rendered from; stored as `results.json`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunResults {
    pub stages: Vec<Stage>,
    pub census: Option<Census>,
    pub topology: Option<TopologySummary>,
    pub assortativity: Option<AssortativityReport>,
    pub ergm: Vec<ModelResult>,
    pub comparison: Option<ModelComparison>,
    /// Each model against the edges-only baseline.
    pub likelihood_ratio_tests: Vec<(String, LikelihoodRatioTest)>,
    pub sbm: Option<SbmResults>,
    pub scores: Option<ScoreTable>,
    pub notices: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportBundle {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub results: RunResults,
}

/// Runs every enabled stage and writes the bundle. Honors `config.threads`.
pub fn run(config: &RunConfig) -> Result<ReportBundle, PipelineError> {
    config.validate()?;
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?
            .install(|| run_stages(config)),
        None => run_stages(config),
    }
}

struct Context {
    notices: Vec<String>,
}

impl Context {
    fn notice(&mut self, message: String) {
        log::warn!("{message}");
        self.notices.push(message);
    }
}

fn digest_file(role: &str, path: &Path) -> Result<(InputDigest, Vec<u8>), PipelineError> {
    let bytes = fs::read(path).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok((
        InputDigest {
            role: role.into(),
            file,
            sha256: hex_digest(&bytes),
        },
        bytes,
    ))
}

fn estimation(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Estimation(e.to_string())
}

/// Stages to run once dependencies are added, with a notice for each one
/// pulled in implicitly.
fn plan(config: &RunConfig, cx: &mut Context) -> Result<BTreeSet<Stage>, PipelineError> {
    let mut stages: BTreeSet<Stage> = config.stages.iter().copied().collect();
    stages.insert(Stage::Ingest);
    if stages.contains(&Stage::Score) && stages.insert(Stage::Sbm) {
        cx.notice("sbm stage enabled because partition scores need a fitted partition".into());
    }
    let centrality_models = stages.contains(&Stage::Ergm)
        && config
            .ergm
            .models
            .iter()
            .map(|m| config.model_definition(m))
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .any(ModelDefinition::needs_centrality);
    if centrality_models && stages.insert(Stage::Topology) {
        cx.notice("topology stage enabled because ERGM models use centrality covariates".into());
    }
    if stages.contains(&Stage::Assortativity) && stages.insert(Stage::Topology) {
        cx.notice("topology stage enabled because structural assortativity needs centralities".into());
    }
    Ok(stages)
}

fn run_stages(config: &RunConfig) -> Result<ReportBundle, PipelineError> {
    let mut cx = Context { notices: Vec::new() };
    let stages = plan(config, &mut cx)?;
    let edges_path = config.edges.as_ref().expect("validated");
    let root = config.out.as_ref().expect("validated");

    // Ingest.
    let (edges_digest, edge_bytes) = digest_file("edges", edges_path)?;
    let graph = load_edge_list(edge_bytes.as_slice(), &config.edge_format(edges_path))
        .map_err(|e| PipelineError::Data(format!("{}: {e}", edges_path.display())))?;
    let mut inputs = vec![edges_digest];
    let attrs = match &config.attributes {
        Some(path) if path.is_file() => {
            let (digest, bytes) = digest_file("attributes", path)?;
            inputs.push(digest);
            Some(
                load_attributes(bytes.as_slice(), &graph)
                    .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?,
            )
        }
        Some(path) => {
            cx.notice(format!(
                "attribute file {} not found; attribute-dependent outputs are skipped",
                path.display()
            ));
            None
        }
        None => {
            cx.notice("no attribute file given; attribute-dependent outputs are skipped".into());
            None
        }
    };
    if !config.party_reassignment.is_empty() {
        if let Some(a) = &attrs {
            a.reassign_party(&config.party_reassignment)
                .map_err(|e| PipelineError::Config(format!("party reassignment: {e}")))?;
        }
    }

    let mut out = BundleWriter::create(root)?;
    let mut results = RunResults {
        stages: stages.iter().copied().collect(),
        ..RunResults::default()
    };
    let y = BinaryAdjacency::from_graph(&graph);

    let census = Census {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        graph_digest: graph.digest(),
        components: components(&graph),
        attribute_proportions: attrs
            .as_ref()
            .map(|a| {
                a.categorical_columns()
                    .map(|(c, col)| (c.name().to_string(), col.proportions()))
                    .collect()
            })
            .unwrap_or_default(),
    };
    out.write_json("ingest/census.json", &census)?;
    out.write_with("ingest/edges.csv", |buf| {
        write_edge_csv(&graph, buf).map_err(|e| std::io::Error::other(e.to_string()))
    })?;
    out.write_with("exports/graph.graphml", |buf| write_graphml(&graph, attrs.as_ref(), buf))?;
    out.write_with("exports/graph.dot", |buf| write_dot(&graph, attrs.as_ref(), buf))?;
    results.census = Some(census);

    // Topology.
    let centrality = if stages.contains(&Stage::Topology) {
        let c = CentralityReport::compute(&graph, &config.power).map_err(estimation)?;
        let connectivity = ConnectivityReport::compute(&graph, None).map_err(estimation)?;
        let mut group_densities = Vec::new();
        match &attrs {
            Some(a) => {
                for attribute in [Categorical::Party, Categorical::Chamber] {
                    let Some(col) = a.categorical(attribute) else { continue };
                    for level in col.levels() {
                        let Ok(sub) = induced_subgraph(&graph, a, attribute, level) else { continue };
                        if sub.node_count() < 2 {
                            continue;
                        }
                        group_densities.push(GroupDensity {
                            attribute,
                            level: level.clone(),
                            nodes: sub.node_count(),
                            density: density(&sub).map_err(estimation)?,
                        });
                    }
                }
            }
            None => cx.notice("group densities skipped: no attributes".into()),
        }
        let summary = TopologySummary {
            degrees: degree_summary(&c),
            top: Metric::ALL
                .iter()
                .flat_map(|&m| {
                    c.top_k(m, 5).into_iter().enumerate().map(move |(r, (i, v))| (m, r, i, v))
                })
                .map(|(metric, r, i, value)| RankedNode {
                    metric,
                    rank: r + 1,
                    node_id: graph.node_id(i).to_string(),
                    value,
                })
                .collect(),
            connectivity,
            group_densities,
        };
        out.write_with("topology/centrality.csv", |buf| c.write_csv(&graph, buf))?;
        out.write_with("topology/connectivity.csv", |buf| summary.connectivity.write_csv(&graph, buf))?;
        out.write_with("topology/top_nodes.csv", |buf| {
            use std::io::Write;
            writeln!(buf, "metric,rank,node_id,value")?;
            for r in &summary.top {
                writeln!(buf, "{},{},{},{}", r.metric.name(), r.rank, csv_field(&r.node_id), fmt_float(r.value))?;
            }
            Ok(())
        })?;
        if !summary.group_densities.is_empty() {
            out.write_with("topology/group_density.csv", |buf| {
                use std::io::Write;
                writeln!(buf, "attribute,level,nodes,density")?;
                for g in &summary.group_densities {
                    writeln!(buf, "{},{},{},{}", g.attribute.name(), csv_field(&g.level), g.nodes, fmt_float(g.density))?;
                }
                Ok(())
            })?;
        }
        out.write_json("topology/summary.json", &summary)?;
        results.topology = Some(summary);
        Some(c)
    } else {
        None
    };

    // Assortativity.
    if stages.contains(&Stage::Assortativity) {
        let c = centrality.as_ref().expect("planned with topology");
        if attrs.is_none() {
            cx.notice("attribute assortativity skipped: no attributes; structural rows only".into());
        }
        let report = assortativity_report(&graph, attrs.as_ref(), c, config.structural_mode).map_err(estimation)?;
        out.write_with("assortativity/assortativity.csv", |buf| report.write_csv(buf))?;
        out.write_json("assortativity/assortativity.json", &report)?;
        results.assortativity = Some(report);
    }

    // ERGM suite.
    if stages.contains(&Stage::Ergm) {
        run_ergm(config, &graph, &y, attrs.as_ref(), centrality.as_ref(), &mut cx, &mut out, &mut results)?;
    }

    // SBM suite.
    if stages.contains(&Stage::Sbm) {
        let s = &config.sbm;
        let q_max = s.q_max.min(graph.node_count());
        if q_max < s.q_max {
            cx.notice(format!("community range capped at {q_max}, the node count"));
        }
        if s.q_min > q_max {
            return Err(PipelineError::Config(format!("community range starts above {q_max} nodes")));
        }
        let control = SbmControl {
            init: s.init,
            restarts: s.restarts,
            seed: config.seed,
            max_iter: s.max_iter,
            tol: s.tol,
        };
        let selection = select_q(&y, s.q_min..=q_max, &control).map_err(estimation)?;
        let best = &selection.best;
        if centrality.is_none() {
            cx.notice("community summary has no centrality columns: topology stage not run".into());
        }
        let interaction = interaction_matrix(best, attrs.as_ref()).map_err(estimation)?;
        let communities = community_summary(best, attrs.as_ref(), centrality.as_ref()).map_err(estimation)?;
        out.write_json("sbm/fit.json", best)?;
        out.write_with("sbm/icl_curve.csv", |buf| selection.write_curve_csv(buf))?;
        out.write_with("sbm/pi.csv", |buf| best.write_pi_csv(buf))?;
        out.write_with("sbm/interaction.csv", |buf| interaction.write_csv(buf))?;
        out.write_with("sbm/membership.csv", |buf| best.write_membership_csv(&graph, buf))?;
        out.write_with("sbm/communities.csv", |buf| communities.write_csv(buf))?;
        results.sbm = Some(SbmResults {
            curve: selection.curve.clone(),
            best: selection.best.clone(),
            interaction,
            communities,
        });
    }

    // Partition scores.
    if stages.contains(&Stage::Score) {
        match (&attrs, &results.sbm) {
            (Some(a), Some(s)) => {
                let mut table = ScoreTable::default();
                for (attribute, column) in a.categorical_columns() {
                    let reference = Partition::from_categorical(column).map_err(estimation)?;
                    let scores = score(&s.best.labels, &reference, config.nmi).map_err(estimation)?;
                    table.columns.push((attribute.name().to_string(), scores));
                }
                out.write_with("score/scores.csv", |buf| table.write_csv(buf))?;
                out.write_json("score/scores.json", &table)?;
                results.scores = Some(table);
            }
            _ => cx.notice("partition scores skipped: no attributes".into()),
        }
    }

    results.notices = cx.notices.clone();
    out.write_json(RESULTS, &results)?;
    let mut listed = out.paths();
    listed.push(SUMMARY.to_string());
    listed.sort();
    let summary = render_summary(&results, &listed);
    out.write(SUMMARY, summary.as_bytes())?;

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        stages: stages.iter().map(|s| s.name().to_string()).collect(),
        inputs,
        outputs: out.outputs(),
        notices: cx.notices,
    };
    debug_assert!(!out.contains(MANIFEST));
    out.write_json(MANIFEST, &manifest)?;
    Ok(ReportBundle {
        root: root.clone(),
        manifest,
        results,
    })
}

fn degree_summary(c: &CentralityReport) -> DegreeSummary {
    let ins: Vec<usize> = c.nodes.iter().map(|n| n.in_degree).collect();
    let outs: Vec<usize> = c.nodes.iter().map(|n| n.out_degree).collect();
    let strength: Vec<f64> = c.nodes.iter().map(|n| n.out_strength).collect();
    let n = c.nodes.len().max(1) as f64;
    DegreeSummary {
        max_in_degree: ins.iter().copied().max().unwrap_or(0),
        min_in_degree: ins.iter().copied().min().unwrap_or(0),
        max_out_degree: outs.iter().copied().max().unwrap_or(0),
        min_out_degree: outs.iter().copied().min().unwrap_or(0),
        mean_degree: ins.iter().chain(&outs).sum::<usize>() as f64 / n,
        out_strength_mean: mean(&strength),
        out_strength_sd: sample_variance(&strength).sqrt(),
        out_strength_min: strength.iter().copied().fold(f64::INFINITY, f64::min),
        out_strength_max: strength.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_ergm(
    config: &RunConfig,
    graph: &Graph,
    y: &BinaryAdjacency,
    attrs: Option<&AttributeTable>,
    centrality: Option<&CentralityReport>,
    cx: &mut Context,
    out: &mut BundleWriter,
    results: &mut RunResults,
) -> Result<(), PipelineError> {
    let options = ModelOptions {
        standardize: config.ergm.standardize,
        roles: config.ergm.roles.clone(),
        party_reassignment: config.party_reassignment.clone(),
    };
    let mut mcmc = config.ergm.mcmc.clone();
    mcmc.seed = config.seed;
    for name in &config.ergm.models {
        let definition = config.model_definition(name)?;
        if definition.needs_attributes() && attrs.is_none() {
            cx.notice(format!("ERGM {name} skipped: it needs node attributes"));
            continue;
        }
        let spec = match build_model(&definition, graph.node_count(), attrs, centrality, &options) {
            Ok(s) => s,
            Err(ErgmError::MissingAttribute(a)) => {
                cx.notice(format!("ERGM {name} skipped: attribute '{a}' is not available"));
                continue;
            }
            Err(e @ (ErgmError::InvalidSpec(_) | ErgmError::UnknownModel(_))) => {
                return Err(PipelineError::Config(format!("{name}: {e}")))
            }
            Err(e) => return Err(PipelineError::Estimation(format!("{name}: {e}"))),
        };
        let fit = match config.ergm.method {
            Method::ExactDyad => fit_exact_dyad(y, &spec),
            Method::Mple => fit_mple(y, &spec),
            Method::Mcmle => fit_mcmle(y, &spec, &mcmc),
        }
        .map_err(|e| PipelineError::Estimation(format!("{name}: {e}")))?;
        for (label, _) in fit.labels.iter().zip(&fit.separated).filter(|(_, s)| **s) {
            cx.notice(format!("ERGM {name}: term {label} is separated; its estimate is infinite"));
        }
        let diagnostics = fit.chain.as_ref().map(|_| mcmc_diagnostics(&fit)).transpose().map_err(estimation)?;
        let result = ModelResult {
            name: name.clone(),
            effects: report_effects(&fit),
            fit,
            diagnostics,
        };
        out.write_json(&format!("ergm/{name}.json"), &result)?;
        out.write_with(&format!("ergm/{name}.csv"), |buf| result.fit.write_csv(buf))?;
        if let Some(d) = &result.diagnostics {
            out.write_with(&format!("ergm/{name}_diagnostics.csv"), |buf| write_diagnostics(d, buf))?;
        }
        results.ergm.push(result);
    }
    if results.ergm.len() >= 2 {
        let fits: Vec<(&str, &ErgmFit)> = results.ergm.iter().map(|r| (r.name.as_str(), &r.fit)).collect();
        let cmp = compare_models(&fits).map_err(estimation)?;
        out.write_with("ergm/comparison.csv", |buf| cmp.write_csv(buf))?;
        out.write_json("ergm/comparison.json", &cmp)?;
        results.comparison = Some(cmp);
        if let Some(base) = results.ergm.iter().find(|r| r.fit.labels == ["edges"]) {
            results.likelihood_ratio_tests = results
                .ergm
                .iter()
                .filter(|r| r.fit.k() > 1)
                .filter_map(|r| likelihood_ratio_test(&base.fit, &r.fit).ok().map(|t| (r.name.clone(), t)))
                .collect();
        }
    }
    Ok(())
}

fn write_diagnostics<W: std::io::Write>(d: &[TermDiagnostics], mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "term,observed,mean,sd,q025,median,q975,geweke_z,effective_sample_size,stationarity_flag")?;
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for t in d {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{},{}",
            t.term,
            fmt_float(t.observed),
            fmt_float(t.mean),
            fmt_float(t.sd),
            fmt_float(t.q025),
            fmt_float(t.median),
            fmt_float(t.q975),
            opt(t.geweke_z),
            opt(t.effective_sample_size),
            t.stationarity_flag
        )?;
    }
    Ok(())
}

/// Re-renders `summary.md` from `results.json` and rewrites the manifest
/// digests, keeping its seed, inputs and notices.
pub fn rerender_report(root: &Path) -> Result<Manifest, PipelineError> {
    let read = |name: &str| {
        fs::read_to_string(root.join(name)).map_err(|e| PipelineError::Data(format!("{}: {e}", root.join(name).display())))
    };
    let results: RunResults =
        serde_json::from_str(&read(RESULTS)?).map_err(|e| PipelineError::Data(format!("{RESULTS}: {e}")))?;
    let mut manifest: Manifest =
        serde_json::from_str(&read(MANIFEST)?).map_err(|e| PipelineError::Data(format!("{MANIFEST}: {e}")))?;
    let mut listed: Vec<String> = scan_outputs(root)?.into_iter().map(|f| f.path).collect();
    if !listed.iter().any(|p| p == SUMMARY) {
        listed.push(SUMMARY.into());
        listed.sort();
    }
    let summary = render_summary(&results, &listed);
    fs::write(root.join(SUMMARY), summary).map_err(|e| PipelineError::output(&root.join(SUMMARY), e))?;
    manifest.outputs = scan_outputs(root)?;
    let mut buf = serde_json::to_vec_pretty(&manifest).map_err(|e| PipelineError::Output(e.to_string()))?;
    buf.push(b'\n');
    fs::write(root.join(MANIFEST), buf).map_err(|e| PipelineError::output(&root.join(MANIFEST), e))?;
    Ok(manifest)
}

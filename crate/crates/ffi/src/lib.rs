//! C ABI over `legnet`.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `legnet_*_new`/`_load`/`_fit` call and released by the matching `_free`.
//! Every fallible entry point returns a [`LegnetStatus`]; on failure the
//! message is available from [`legnet_last_error`] on the same thread until
//! the next failing call. Panics never unwind into C: they surface as
//! `LEGNET_STATUS_PANIC`.
//!
//! Array outputs use caller-owned buffers. Each accessor takes the buffer
//! capacity and fails with `LEGNET_STATUS_INVALID_ARGUMENT` when it is too
//! small; the required length is available from the matching count call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::OnceLock;

use legnet::ergm::{build_model, fit_exact_dyad, fit_mple, named_model, ErgmFit, ModelOptions};
use legnet::graph::{load_attributes, load_edge_list, EdgeFormat};
use legnet::partition::{score, NmiNormalization};
use legnet::pipeline::{run, PipelineError, RunConfig};
use legnet::sbm::{fit_q, select_q, SbmControl, SbmFit};
use legnet::topology::{density, reciprocity, CentralityReport, Metric, PowerOptions};
use legnet::{AttributeTable, BinaryAdjacency, Graph, Partition};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegnetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    EstimationError = 4,
    OutputError = 5,
    Panic = 6,
}

/// Node-level metric selector.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegnetMetric {
    InDegree = 0,
    OutDegree = 1,
    OutStrength = 2,
    Closeness = 3,
    Betweenness = 4,
    Eigen = 5,
    Hub = 6,
    Authority = 7,
    LocalClustering = 8,
}

impl From<LegnetMetric> for Metric {
    fn from(m: LegnetMetric) -> Self {
        Metric::ALL[m as usize]
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegnetErgmMethod {
    ExactDyad = 0,
    Mple = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegnetNmi {
    Arithmetic = 0,
    Geometric = 1,
    Max = 2,
    Min = 3,
}

impl From<LegnetNmi> for NmiNormalization {
    fn from(n: LegnetNmi) -> Self {
        match n {
            LegnetNmi::Arithmetic => NmiNormalization::Arithmetic,
            LegnetNmi::Geometric => NmiNormalization::Geometric,
            LegnetNmi::Max => NmiNormalization::Max,
            LegnetNmi::Min => NmiNormalization::Min,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LegnetPartitionScores {
    pub rand: f64,
    pub adjusted_rand: f64,
    pub nmi: f64,
}

/// Loaded graph with its node identifiers as C strings. Centralities are
/// computed on first use and cached.
pub struct LegnetGraph {
    graph: Graph,
    ids: Vec<CString>,
    centrality: OnceLock<CentralityReport>,
}

pub struct LegnetAttributes {
    table: AttributeTable,
}

pub struct LegnetErgmFit {
    fit: ErgmFit,
    labels: Vec<CString>,
}

pub struct LegnetSbm {
    fit: SbmFit,
}

struct Failure(LegnetStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(LegnetStatus::NullPointer, format!("{what} is null"))
    }
    fn invalid(message: impl Into<String>) -> Self {
        Failure(LegnetStatus::InvalidArgument, message.into())
    }
    fn data(e: impl std::fmt::Display) -> Self {
        Failure(LegnetStatus::DataError, e.to_string())
    }
    fn estimation(e: impl std::fmt::Display) -> Self {
        Failure(LegnetStatus::EstimationError, e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let status = match e {
            PipelineError::Config(_) => LegnetStatus::InvalidArgument,
            PipelineError::Data(_) => LegnetStatus::DataError,
            PipelineError::Estimation(_) => LegnetStatus::EstimationError,
            PipelineError::Output(_) => LegnetStatus::OutputError,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `body` behind a panic guard and records any failure message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LegnetStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LegnetStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {message}"));
            LegnetStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or point to a valid `T` that outlives the returned
/// reference.
unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

/// # Safety
/// `p` must be null or a NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::invalid(format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `out` must be null or valid for writing one `T`.
unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `out` must be null or valid for writing `capacity` elements.
unsafe fn fill<T: Copy>(out: *mut T, capacity: usize, values: &[T]) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("output buffer"));
    }
    if capacity < values.len() {
        return Err(Failure::invalid(format!(
            "buffer holds {capacity} values, {} required",
            values.len()
        )));
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn legnet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn legnet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn wrap_graph(graph: Graph) -> LegnetGraph {
    let ids = graph
        .node_ids()
        .iter()
        .map(|id| CString::new(id.as_str()).unwrap_or_default())
        .collect();
    LegnetGraph {
        graph,
        ids,
        centrality: OnceLock::new(),
    }
}

/// Loads a `source,target,weight` CSV edge list from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_graph_load_csv(path: *const c_char, out: *mut *mut LegnetGraph) -> LegnetStatus {
    guard(|| {
        let path = text(path, "path")?;
        let file = File::open(path).map_err(|e| Failure::data(format!("{path}: {e}")))?;
        let graph = load_edge_list(BufReader::new(file), &EdgeFormat::Csv).map_err(Failure::data)?;
        put(out, boxed(wrap_graph(graph)))
    })
}

/// Parses a `source,target,weight` CSV edge list held in memory.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_graph_from_csv_text(csv: *const c_char, out: *mut *mut LegnetGraph) -> LegnetStatus {
    guard(|| {
        let csv = text(csv, "csv")?;
        let graph = load_edge_list(csv.as_bytes(), &EdgeFormat::Csv).map_err(Failure::data)?;
        put(out, boxed(wrap_graph(graph)))
    })
}

/// # Safety
/// `graph` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn legnet_graph_free(graph: *mut LegnetGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_graph_node_count(graph: *const LegnetGraph, out: *mut usize) -> LegnetStatus {
    guard(|| put(out, get(graph, "graph")?.graph.node_count()))
}

/// # Safety
/// `graph` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_graph_edge_count(graph: *const LegnetGraph, out: *mut usize) -> LegnetStatus {
    guard(|| put(out, get(graph, "graph")?.graph.edge_count()))
}

/// Identifier of node `index` in first-appearance order, or null when out of
/// range. Owned by the graph handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn legnet_graph_node_id(graph: *const LegnetGraph, index: usize) -> *const c_char {
    graph
        .as_ref()
        .and_then(|g| g.ids.get(index))
        .map_or(std::ptr::null(), |c| c.as_ptr())
}

fn centrality(g: &LegnetGraph) -> Result<&CentralityReport, Failure> {
    if let Some(c) = g.centrality.get() {
        return Ok(c);
    }
    let report = CentralityReport::compute(&g.graph, &PowerOptions::default()).map_err(Failure::estimation)?;
    Ok(g.centrality.get_or_init(|| report))
}

/// Writes one value per node; undefined values (closeness of a sink, local
/// clustering below degree two) are NaN.
///
/// # Safety
/// `graph` must be a live handle and `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn legnet_graph_centrality(
    graph: *const LegnetGraph,
    metric: LegnetMetric,
    out: *mut f64,
    capacity: usize,
) -> LegnetStatus {
    guard(|| {
        let g = get(graph, "graph")?;
        let values: Vec<f64> = centrality(g)?
            .values(metric.into())
            .into_iter()
            .map(|v| v.unwrap_or(f64::NAN))
            .collect();
        fill(out, capacity, &values)
    })
}

/// # Safety
/// `graph` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_graph_density(graph: *const LegnetGraph, out: *mut f64) -> LegnetStatus {
    guard(|| put(out, density(&get(graph, "graph")?.graph).map_err(Failure::estimation)?))
}

/// # Safety
/// `graph` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_graph_reciprocity(graph: *const LegnetGraph, out: *mut f64) -> LegnetStatus {
    guard(|| put(out, reciprocity(&get(graph, "graph")?.graph).map_err(Failure::estimation)?))
}

/// Loads the node attribute CSV for `graph`; every graph node needs a row.
///
/// # Safety
/// `graph` must be a live handle, `path` a NUL-terminated string and `out`
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_attributes_load(
    graph: *const LegnetGraph,
    path: *const c_char,
    out: *mut *mut LegnetAttributes,
) -> LegnetStatus {
    guard(|| {
        let g = get(graph, "graph")?;
        let path = text(path, "path")?;
        let file = File::open(path).map_err(|e| Failure::data(format!("{path}: {e}")))?;
        let table = load_attributes(BufReader::new(file), &g.graph).map_err(Failure::data)?;
        put(out, boxed(LegnetAttributes { table }))
    })
}

/// # Safety
/// `attrs` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn legnet_attributes_free(attrs: *mut LegnetAttributes) {
    if !attrs.is_null() {
        drop(Box::from_raw(attrs));
    }
}

/// Fits a built-in model (`model1`..`model6`) on the binarised graph.
/// `attrs` may be null for models without attribute terms.
///
/// # Safety
/// `graph` must be a live handle, `attrs` null or live, `model` a
/// NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_ergm_fit_named(
    graph: *const LegnetGraph,
    attrs: *const LegnetAttributes,
    model: *const c_char,
    method: LegnetErgmMethod,
    out: *mut *mut LegnetErgmFit,
) -> LegnetStatus {
    guard(|| {
        let g = get(graph, "graph")?;
        let attrs = attrs.as_ref().map(|a| &a.table);
        let definition = named_model(text(model, "model")?).map_err(|e| Failure::invalid(e.to_string()))?;
        let centrality = if definition.needs_centrality() { Some(centrality(g)?) } else { None };
        let spec = build_model(&definition, g.graph.node_count(), attrs, centrality, &ModelOptions::default())
            .map_err(Failure::data)?;
        let y = BinaryAdjacency::from_graph(&g.graph);
        let fit = match method {
            LegnetErgmMethod::ExactDyad => fit_exact_dyad(&y, &spec),
            LegnetErgmMethod::Mple => fit_mple(&y, &spec),
        }
        .map_err(Failure::estimation)?;
        let labels = fit.labels.iter().map(|l| CString::new(l.as_str()).unwrap_or_default()).collect();
        put(out, boxed(LegnetErgmFit { fit, labels }))
    })
}

/// # Safety
/// `fit` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn legnet_ergm_fit_free(fit: *mut LegnetErgmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of model terms.
///
/// # Safety
/// `fit` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_ergm_fit_term_count(fit: *const LegnetErgmFit, out: *mut usize) -> LegnetStatus {
    guard(|| put(out, get(fit, "fit")?.fit.k()))
}

/// Label of term `index`, or null when out of range. Owned by the handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn legnet_ergm_fit_label(fit: *const LegnetErgmFit, index: usize) -> *const c_char {
    fit.as_ref()
        .and_then(|f| f.labels.get(index))
        .map_or(std::ptr::null(), |c| c.as_ptr())
}

/// Coefficients; separated terms are signed infinities.
///
/// # Safety
/// `fit` must be a live handle and `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn legnet_ergm_fit_theta(fit: *const LegnetErgmFit, out: *mut f64, capacity: usize) -> LegnetStatus {
    guard(|| fill(out, capacity, &get(fit, "fit")?.fit.theta))
}

/// Standard errors; NaN for separated terms.
///
/// # Safety
/// `fit` must be a live handle and `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn legnet_ergm_fit_std_err(fit: *const LegnetErgmFit, out: *mut f64, capacity: usize) -> LegnetStatus {
    guard(|| fill(out, capacity, &get(fit, "fit")?.fit.std_err))
}

/// Two-sided Wald p-values; NaN for separated terms.
///
/// # Safety
/// `fit` must be a live handle and `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn legnet_ergm_fit_p_values(fit: *const LegnetErgmFit, out: *mut f64, capacity: usize) -> LegnetStatus {
    guard(|| fill(out, capacity, &get(fit, "fit")?.fit.p_values))
}

/// Log-likelihood, AIC and BIC; any of the outputs may be null.
///
/// # Safety
/// `fit` must be a live handle; non-null outputs valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_ergm_fit_criteria(
    fit: *const LegnetErgmFit,
    log_likelihood: *mut f64,
    aic: *mut f64,
    bic: *mut f64,
) -> LegnetStatus {
    guard(|| {
        let f = &get(fit, "fit")?.fit;
        for (p, v) in [(log_likelihood, f.log_likelihood), (aic, f.aic), (bic, f.bic)] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

fn sbm_control(restarts: usize, seed: u64) -> SbmControl {
    SbmControl {
        restarts,
        seed,
        ..SbmControl::default()
    }
}

/// Fits block models for every Q in `q_min..=q_max` and keeps the ICL
/// optimum.
///
/// # Safety
/// `graph` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_sbm_select(
    graph: *const LegnetGraph,
    q_min: usize,
    q_max: usize,
    restarts: usize,
    seed: u64,
    out: *mut *mut LegnetSbm,
) -> LegnetStatus {
    guard(|| {
        let g = get(graph, "graph")?;
        let y = BinaryAdjacency::from_graph(&g.graph);
        let selection = select_q(&y, q_min..=q_max, &sbm_control(restarts, seed)).map_err(|e| Failure::invalid(e.to_string()))?;
        put(out, boxed(LegnetSbm { fit: selection.best }))
    })
}

/// Fits a block model with exactly `q` requested classes.
///
/// # Safety
/// `graph` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_sbm_fit_q(
    graph: *const LegnetGraph,
    q: usize,
    restarts: usize,
    seed: u64,
    out: *mut *mut LegnetSbm,
) -> LegnetStatus {
    guard(|| {
        let g = get(graph, "graph")?;
        let y = BinaryAdjacency::from_graph(&g.graph);
        let fit = fit_q(&y, q, &sbm_control(restarts, seed)).map_err(|e| Failure::invalid(e.to_string()))?;
        put(out, boxed(LegnetSbm { fit }))
    })
}

/// # Safety
/// `sbm` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn legnet_sbm_free(sbm: *mut LegnetSbm) {
    if !sbm.is_null() {
        drop(Box::from_raw(sbm));
    }
}

/// Effective number of classes after pruning.
///
/// # Safety
/// `sbm` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_sbm_q(sbm: *const LegnetSbm, out: *mut usize) -> LegnetStatus {
    guard(|| put(out, get(sbm, "sbm")?.fit.q))
}

/// # Safety
/// `sbm` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_sbm_icl(sbm: *const LegnetSbm, out: *mut f64) -> LegnetStatus {
    guard(|| put(out, get(sbm, "sbm")?.fit.icl))
}

/// Zero-based community of each node; community 0 is the largest.
///
/// # Safety
/// `sbm` must be a live handle and `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn legnet_sbm_labels(sbm: *const LegnetSbm, out: *mut usize, capacity: usize) -> LegnetStatus {
    guard(|| fill(out, capacity, get(sbm, "sbm")?.fit.labels.labels()))
}

/// Row-major `q * q` connection probabilities.
///
/// # Safety
/// `sbm` must be a live handle and `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn legnet_sbm_pi(sbm: *const LegnetSbm, out: *mut f64, capacity: usize) -> LegnetStatus {
    guard(|| {
        let flat: Vec<f64> = get(sbm, "sbm")?.fit.pi.concat();
        fill(out, capacity, &flat)
    })
}

/// Rand, adjusted Rand and NMI between two labelings of `len` nodes. Labels
/// are arbitrary integers; only equality matters.
///
/// # Safety
/// `a` and `b` must be valid for `len` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn legnet_partition_scores(
    a: *const usize,
    b: *const usize,
    len: usize,
    normalization: LegnetNmi,
    out: *mut LegnetPartitionScores,
) -> LegnetStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return Err(Failure::null("labels"));
        }
        let read = |p: *const usize| -> Result<Partition, Failure> {
            let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(p, len) };
            Partition::from_keys(slice.iter().copied()).map_err(|e| Failure::invalid(e.to_string()))
        };
        let s = score(&read(a)?, &read(b)?, normalization.into()).map_err(|e| Failure::invalid(e.to_string()))?;
        put(
            out,
            LegnetPartitionScores {
                rand: s.rand,
                adjusted_rand: s.adjusted_rand,
                nmi: s.nmi,
            },
        )
    })
}

/// Runs the batch pipeline from a JSON configuration. Relative paths in the
/// configuration resolve against the working directory. A non-null
/// `out_dir` overrides the configured output directory.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn legnet_run_pipeline(config_json: *const c_char, out_dir: *const c_char) -> LegnetStatus {
    guard(|| {
        let mut config = RunConfig::from_json(text(config_json, "config")?)?;
        if !out_dir.is_null() {
            config.out = Some(PathBuf::from(text(out_dir, "out_dir")?));
        }
        run(&config)?;
        Ok(())
    })
}

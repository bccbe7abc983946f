use super::likelihood::{maximize, Design, NewtonOutcome, FROZEN_MAGNITUDE};
use super::terms::{ErgmSpec, ErgmTerm};
use super::{adjacency_digest, information_criteria, ErgmError, ErgmFit, Method};
use crate::graph::BinaryAdjacency;
use crate::numeric::{logit, two_sided_normal_p};

/// Exact MLE from the factorised dyad likelihood: each unordered pair is a
/// four-state categorical variable.
pub fn fit_exact_dyad(y: &BinaryAdjacency, spec: &ErgmSpec) -> Result<ErgmFit, ErgmError> {
    check_node_count(y, spec)?;
    let design = Design::dyads(y, spec);
    estimate(&design, y, spec, Method::ExactDyad)
}

/// Maximum pseudolikelihood: logistic regression of every ordered pair on
/// its change statistic. The reported log-likelihood is the
/// pseudo-log-likelihood, which is exact for dyad-independent models.
pub fn fit_mple(y: &BinaryAdjacency, spec: &ErgmSpec) -> Result<ErgmFit, ErgmError> {
    check_node_count(y, spec)?;
    let design = Design::ordered_pairs(y, spec);
    estimate(&design, y, spec, Method::Mple)
}

fn check_node_count(y: &BinaryAdjacency, spec: &ErgmSpec) -> Result<(), ErgmError> {
    if y.node_count() != spec.node_count() {
        return Err(ErgmError::CovariateLength {
            term: "graph".into(),
            expected: spec.node_count(),
            found: y.node_count(),
        });
    }
    Ok(())
}

fn estimate(
    design: &Design,
    y: &BinaryAdjacency,
    spec: &ErgmSpec,
    method: Method,
) -> Result<ErgmFit, ErgmError> {
    if let Some(&t) = design.constant_terms().first() {
        return Err(ErgmError::DegenerateTerm(spec.terms()[t].label()));
    }
    let outcome = maximize(design, starting_point(y, spec))?;
    Ok(assemble(outcome, y, spec, method))
}

/// Edges at the logit of the density, every other coefficient at zero.
pub(crate) fn starting_point(y: &BinaryAdjacency, spec: &ErgmSpec) -> Vec<f64> {
    let n = y.node_count() as f64;
    let density = y.edge_count() as f64 / (n * (n - 1.0));
    let edges = logit(density.clamp(1e-6, 1.0 - 1e-6));
    spec.terms()
        .iter()
        .map(|t| if matches!(t, ErgmTerm::Edges) { edges } else { 0.0 })
        .collect()
}

fn assemble(o: NewtonOutcome, y: &BinaryAdjacency, spec: &ErgmSpec, method: Method) -> ErgmFit {
    let k = spec.len();
    let theta: Vec<f64> = (0..k)
        .map(|t| {
            if o.separated[t] {
                f64::INFINITY.copysign(o.theta[t])
            } else {
                o.theta[t]
            }
        })
        .collect();
    let std_err: Vec<f64> = (0..k).map(|t| o.covariance[t * k + t].sqrt()).collect();
    let p_values = theta
        .iter()
        .zip(&std_err)
        .map(|(t, s)| if t.is_finite() { two_sided_normal_p(t / s) } else { f64::NAN })
        .collect();
    let n = y.node_count();
    let (aic, bic) = information_criteria(o.log_likelihood, k, n);
    debug_assert!(o.theta.iter().all(|t| t.abs() <= FROZEN_MAGNITUDE));
    ErgmFit {
        method,
        labels: spec.labels(),
        theta,
        std_err,
        p_values,
        mc_std_err: Vec::new(),
        separated: o.separated,
        log_likelihood: o.log_likelihood,
        aic,
        bic,
        iterations: o.iterations,
        node_count: n,
        dyad_observations: (n * (n - 1)) as u64,
        graph_digest: adjacency_digest(y),
        chain: None,
    }
}

/// Internal coefficient vector with separated entries replaced by the
/// finite value used during estimation.
pub(crate) fn working_theta(fit: &ErgmFit) -> Vec<f64> {
    fit.theta
        .iter()
        .map(|t| if t.is_finite() { *t } else { FROZEN_MAGNITUDE.copysign(*t) })
        .collect()
}

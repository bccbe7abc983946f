//! Exponential random graph models for the binary digraph.
//!
//! A model is an ordered list of [`ErgmTerm`]s. Every supported term is
//! dyad-local, so the likelihood factorises over unordered pairs and
//! [`fit_exact_dyad`] is the reference estimator. [`fit_mple`] and
//! [`fit_mcmle`] cover the pseudolikelihood and Monte-Carlo routes.

mod diagnostics;
mod effects;
mod fit;
mod likelihood;
mod mcmle;
mod models;
mod simulate;
mod terms;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diagnostics::{
    effective_sample_size, geweke_z, mcmc_diagnostics, summarize_traces, TermDiagnostics,
};
pub use effects::{
    compare_models, likelihood_ratio_test, report_effects, Effect, LikelihoodRatioTest,
    ModelComparison, ModelRanking,
};
pub use fit::{fit_exact_dyad, fit_mple};
pub use mcmle::{fit_mcmle, ChainStart, McmcControl};
pub use models::{
    build_model, named_model, CovariateRoles, ModelDefinition, ModelOptions, TermSpec,
    NAMED_MODELS,
};
pub use simulate::{simulate, Simulation, SimulationControl};
pub use terms::{change_statistics, global_statistics, ErgmSpec, ErgmTerm, Role};

use crate::graph::BinaryAdjacency;
use crate::numeric::{fmt_float, hex_digest, lenient_float};

#[derive(Debug, Error)]
pub enum ErgmError {
    #[error("invalid model: {0}")]
    InvalidSpec(String),
    #[error("{term}: expected {expected} values, found {found}")]
    CovariateLength {
        term: String,
        expected: usize,
        found: usize,
    },
    #[error("term '{0}' is zero for every pair and cannot be estimated")]
    DegenerateTerm(String),
    #[error("change statistic requested for self-pair ({0}, {0})")]
    SelfPair(usize),
    #[error("model needs attribute '{0}', which is not available")]
    MissingAttribute(String),
    #[error("model needs centrality covariates, which were not supplied")]
    MissingCentrality,
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("{method} did not converge after {iterations} iterations")]
    NotConverged {
        method: &'static str,
        iterations: usize,
    },
    #[error("information matrix is singular")]
    SingularInformation,
    #[error("parameter vector must be finite and have {expected} entries")]
    InvalidTheta { expected: usize },
    #[error("simulated statistic '{term}' is constant ({excerpt}); the model is degenerate at these parameters")]
    Degenerate { term: String, excerpt: String },
    #[error("fit was not produced by MC-MLE and carries no chain")]
    NoChain,
    #[error("{0}")]
    Comparison(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactDyad,
    Mple,
    Mcmle,
}

/// Simulated statistics retained from the final MC-MLE phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcChain {
    pub acceptance_rate: f64,
    pub observed: Vec<f64>,
    /// One trace per term.
    pub traces: Vec<Vec<f64>>,
    pub phases: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgmFit {
    pub method: Method,
    pub labels: Vec<String>,
    /// Separated coefficients are reported as signed infinities.
    #[serde(with = "lenient_float::vec")]
    pub theta: Vec<f64>,
    #[serde(with = "lenient_float::vec")]
    pub std_err: Vec<f64>,
    #[serde(with = "lenient_float::vec")]
    pub p_values: Vec<f64>,
    /// Monte-Carlo part of the standard error; empty for exact methods.
    #[serde(with = "lenient_float::vec", default)]
    pub mc_std_err: Vec<f64>,
    pub separated: Vec<bool>,
    #[serde(with = "lenient_float")]
    pub log_likelihood: f64,
    #[serde(with = "lenient_float")]
    pub aic: f64,
    #[serde(with = "lenient_float")]
    pub bic: f64,
    pub iterations: usize,
    pub node_count: usize,
    pub dyad_observations: u64,
    pub graph_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<McmcChain>,
}

impl ErgmFit {
    pub fn k(&self) -> usize {
        self.theta.len()
    }

    pub fn coefficient(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.theta[i])
    }

    /// Coefficient CSV: `term,estimate,std_err,p_value`.
    pub fn write_csv<W: std::io::Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "term,estimate,std_err,p_value")?;
        for i in 0..self.k() {
            writeln!(
                sink,
                "{},{},{},{}",
                self.labels[i],
                fmt_float(self.theta[i]),
                fmt_float(self.std_err[i]),
                fmt_float(self.p_values[i])
            )?;
        }
        writeln!(sink, "log_likelihood,{},,", fmt_float(self.log_likelihood))?;
        writeln!(sink, "aic,{},,", fmt_float(self.aic))?;
        writeln!(sink, "bic,{},,", fmt_float(self.bic))?;
        Ok(())
    }
}

/// `(aic, bic)` for a log-likelihood with `k` parameters and `n(n-1)`
/// dyad observations.
pub fn information_criteria(log_likelihood: f64, k: usize, node_count: usize) -> (f64, f64) {
    let k = k as f64;
    let observations = (node_count * (node_count - 1)) as f64;
    (
        -2.0 * log_likelihood + 2.0 * k,
        -2.0 * log_likelihood + k * observations.ln(),
    )
}

pub(crate) fn adjacency_digest(y: &BinaryAdjacency) -> String {
    let n = y.node_count();
    let mut bytes = (n as u64).to_le_bytes().to_vec();
    let mut byte = 0u8;
    let mut bit = 0;
    for i in 0..n {
        for j in 0..n {
            byte |= u8::from(y.get(i, j)) << bit;
            bit += 1;
            if bit == 8 {
                bytes.push(byte);
                byte = 0;
                bit = 0;
            }
        }
    }
    bytes.push(byte);
    hex_digest(&bytes)[..16].to_string()
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::graph::BinaryAdjacency;
    use rand::{Rng, SeedableRng};

    pub fn random_adjacency(n: usize, p: f64, reciprocity: f64, seed: u64) -> BinaryAdjacency {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut y = BinaryAdjacency::empty(n);
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.gen::<f64>() < p {
                    y.set(i, j, true);
                    if rng.gen::<f64>() < reciprocity {
                        y.set(j, i, true);
                    }
                }
            }
        }
        y
    }

    pub fn covariate(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
}

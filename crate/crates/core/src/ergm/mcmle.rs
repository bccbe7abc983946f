//! Monte-Carlo maximum likelihood by Geyer–Thompson importance sampling.

use log::{debug, info};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_mple, working_theta};
use super::likelihood::{invert_spd, solve_spd};
use super::simulate::{simulate, SimulationControl};
use super::terms::{global_statistics, ErgmSpec};
use super::{adjacency_digest, information_criteria, ErgmError, ErgmFit, McmcChain, Method};
use crate::graph::BinaryAdjacency;
use crate::numeric::{log_sum_exp, two_sided_normal_p};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainStart {
    #[default]
    Observed,
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcControl {
    /// Defaults to four proposals per ordered pair.
    pub burnin: Option<u64>,
    /// Defaults to half a proposal per ordered pair, at least 64.
    pub interval: Option<u64>,
    pub sample_size: usize,
    pub max_phases: usize,
    /// Bound on `|mean(g(Y)) - g(y_obs)| / sd(g(Y))` per term once the
    /// Monte-Carlo noise (two batch-means standard errors) is discounted.
    pub tolerance: f64,
    /// Smallest importance-sampling effective sample size, as a fraction of
    /// the sample, that a parameter update may reach.
    pub min_ess_fraction: f64,
    /// Number of bridges between zero and the estimate for the
    /// log-likelihood.
    pub bridges: usize,
    pub bridge_sample_size: usize,
    pub start: ChainStart,
    pub seed: u64,
}

impl Default for McmcControl {
    fn default() -> Self {
        Self {
            burnin: None,
            interval: None,
            sample_size: 1024,
            max_phases: 20,
            tolerance: 0.1,
            min_ess_fraction: 0.25,
            bridges: 16,
            bridge_sample_size: 256,
            start: ChainStart::Observed,
            seed: 0,
        }
    }
}

impl McmcControl {
    fn dyads(n: usize) -> u64 {
        (n * (n - 1)) as u64
    }

    pub fn burnin_for(&self, n: usize) -> u64 {
        self.burnin.unwrap_or(4 * Self::dyads(n))
    }

    pub fn interval_for(&self, n: usize) -> u64 {
        self.interval.unwrap_or((Self::dyads(n) / 2).max(64))
    }

    fn validate(&self) -> Result<(), ErgmError> {
        if self.sample_size < 64
            || self.max_phases == 0
            || self.bridges == 0
            || self.bridge_sample_size < 16
            || !(self.tolerance > 0.0)
            || !(0.0..1.0).contains(&self.min_ess_fraction)
        {
            return Err(ErgmError::InvalidSpec(
                "MCMC control needs sample_size >= 64, bridge_sample_size >= 16, positive phases, bridges and tolerance, and min_ess_fraction in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

const BATCHES: usize = 32;
const BRIDGE_STREAM: u64 = 1 << 32;

/// MC-MLE starting from the MPLE.
///
/// Each phase samples `sample_size` networks at the current estimate and
/// moves it towards the maximiser of the importance-sampled log-likelihood
/// ratio, never letting the importance weights' effective sample size fall
/// below `min_ess_fraction`. Once the simulated mean statistics match the
/// observed ones the last sample refines the estimate a final time and
/// provides the Fisher information and batch-means Monte-Carlo error. The
/// log-likelihood is bridged from `theta = 0`, where `log kappa = n(n-1) ln 2`.
pub fn fit_mcmle(
    y: &BinaryAdjacency,
    spec: &ErgmSpec,
    control: &McmcControl,
) -> Result<ErgmFit, ErgmError> {
    control.validate()?;
    let mple = fit_mple(y, spec)?;
    let k = spec.len();
    let n = y.node_count();
    let separated = mple.separated.clone();
    let free: Vec<usize> = (0..k).filter(|&t| !separated[t]).collect();
    let observed = global_statistics(y, spec)?;
    let labels = spec.labels();
    let start = match control.start {
        ChainStart::Observed => y.clone(),
        ChainStart::Empty => BinaryAdjacency::empty(n),
    };
    let sim_control = |stream: u64, sample_size: usize| SimulationControl {
        burnin: control.burnin_for(n),
        interval: control.interval_for(n),
        sample_size,
        seed: control.seed,
        stream,
        keep_networks: false,
    };

    let mut theta = working_theta(&mple);
    let mut phase = 0;
    let (estimate, sample, acceptance) = loop {
        if phase == control.max_phases {
            return Err(ErgmError::NotConverged {
                method: "mcmle",
                iterations: phase,
            });
        }
        let sim = simulate(spec, &theta, &start, &sim_control(phase as u64, control.sample_size))?;
        let deviations: Vec<Vec<f64>> = sim
            .statistics
            .iter()
            .map(|s| free.iter().map(|&t| s[t] - observed[t]).collect())
            .collect();
        check_degeneracy(&deviations, &free, &labels, &sim.statistics)?;
        let gap = standardized_gap(&deviations);
        debug!("mcmle phase {phase}: standardized gap {gap:.4}, acceptance {:.4}", sim.acceptance_rate);
        let min_ess = control.min_ess_fraction * deviations.len() as f64;
        let step = importance_update(&deviations, min_ess);
        phase += 1;
        let mut next = theta.clone();
        for (idx, &t) in free.iter().enumerate() {
            next[t] += step[idx];
        }
        if gap < control.tolerance {
            break (next, (theta, sim.statistics, deviations), sim.acceptance_rate);
        }
        theta = next;
    };
    let (sampled_at, statistics, deviations) = sample;
    info!("mcmle converged after {phase} phases");

    let shift: Vec<f64> = free.iter().map(|&t| estimate[t] - sampled_at[t]).collect();
    let is = importance_moments(&deviations, &shift);
    let fisher_inverse = invert_spd(&is.information).ok_or(ErgmError::SingularInformation)?;
    let batch = batch_means_covariance(&deviations);
    let mc_cov = &fisher_inverse * batch * &fisher_inverse;

    let mut std_err = vec![f64::NAN; k];
    let mut mc_std_err = vec![f64::NAN; k];
    for (idx, &t) in free.iter().enumerate() {
        let mc = mc_cov[(idx, idx)].max(0.0);
        mc_std_err[t] = mc.sqrt();
        std_err[t] = (fisher_inverse[(idx, idx)] + mc).sqrt();
    }

    let log_kappa_ratio = bridge_log_normalizer(spec, &estimate, &start, control, n)?;
    let log_kappa = (n * (n - 1)) as f64 * std::f64::consts::LN_2 + log_kappa_ratio;
    let log_likelihood =
        estimate.iter().zip(&observed).map(|(t, g)| t * g).sum::<f64>() - log_kappa;
    let (aic, bic) = information_criteria(log_likelihood, k, n);

    let theta: Vec<f64> = (0..k)
        .map(|t| {
            if separated[t] {
                f64::INFINITY.copysign(estimate[t])
            } else {
                estimate[t]
            }
        })
        .collect();
    let p_values = theta
        .iter()
        .zip(&std_err)
        .map(|(t, s)| if t.is_finite() { two_sided_normal_p(t / s) } else { f64::NAN })
        .collect();
    let traces = (0..k).map(|t| statistics.iter().map(|s| s[t]).collect()).collect();
    Ok(ErgmFit {
        method: Method::Mcmle,
        labels,
        theta,
        std_err,
        p_values,
        mc_std_err,
        separated,
        log_likelihood,
        aic,
        bic,
        iterations: phase,
        node_count: n,
        dyad_observations: (n * (n - 1)) as u64,
        graph_digest: adjacency_digest(y),
        chain: Some(McmcChain {
            acceptance_rate: acceptance,
            observed,
            traces,
            phases: phase,
        }),
    })
}

fn check_degeneracy(
    deviations: &[Vec<f64>],
    free: &[usize],
    labels: &[String],
    statistics: &[Vec<f64>],
) -> Result<(), ErgmError> {
    for (idx, &t) in free.iter().enumerate() {
        let first = deviations[0][idx];
        if deviations.iter().all(|d| d[idx] == first) {
            let excerpt: Vec<String> = statistics.iter().take(5).map(|s| format!("{}", s[t])).collect();
            return Err(ErgmError::Degenerate {
                term: labels[t].clone(),
                excerpt: format!("first draws {}", excerpt.join(", ")),
            });
        }
    }
    Ok(())
}

/// Largest per-term `max(0, |mean d| - 2 mcse) / sd` over the sample.
fn standardized_gap(deviations: &[Vec<f64>]) -> f64 {
    let m = deviations.len() as f64;
    let k = deviations[0].len();
    let batch = batch_means_covariance(deviations);
    (0..k)
        .map(|t| {
            let mean = deviations.iter().map(|d| d[t]).sum::<f64>() / m;
            let var = deviations.iter().map(|d| (d[t] - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let mcse = batch[(t, t)].max(0.0).sqrt();
            (mean.abs() - 2.0 * mcse).max(0.0) / var.sqrt()
        })
        .fold(0.0, f64::max)
}

struct Moments {
    /// Importance-sampled `l(theta) - l(theta_sample)`.
    log_ratio: f64,
    gradient: DVector<f64>,
    information: DMatrix<f64>,
    ess: f64,
}

/// Weighted moments of the deviations `g(Y) - g(y_obs)` under weights
/// `exp(shift . d)`.
fn importance_moments(deviations: &[Vec<f64>], shift: &[f64]) -> Moments {
    let k = shift.len();
    let m = deviations.len() as f64;
    let a: Vec<f64> = deviations
        .iter()
        .map(|d| d.iter().zip(shift).map(|(x, s)| x * s).sum())
        .collect();
    let lse = log_sum_exp(&a);
    let w: Vec<f64> = a.iter().map(|v| (v - lse).exp()).collect();
    let mut mean = DVector::zeros(k);
    for (d, &wi) in deviations.iter().zip(&w) {
        for t in 0..k {
            mean[t] += wi * d[t];
        }
    }
    let mut information = DMatrix::zeros(k, k);
    for (d, &wi) in deviations.iter().zip(&w) {
        for a in 0..k {
            let da = d[a] - mean[a];
            for b in 0..k {
                information[(a, b)] += wi * da * (d[b] - mean[b]);
            }
        }
    }
    Moments {
        log_ratio: -(lse - m.ln()),
        gradient: -mean,
        information,
        ess: 1.0 / w.iter().map(|x| x * x).sum::<f64>(),
    }
}

/// Damped Newton ascent on the importance-sampled log-likelihood ratio,
/// constrained to keep the weights' effective sample size above `min_ess`.
/// Returns the parameter shift.
fn importance_update(deviations: &[Vec<f64>], min_ess: f64) -> Vec<f64> {
    let k = deviations[0].len();
    let mut shift = vec![0.0; k];
    let mut current = importance_moments(deviations, &shift);
    for _ in 0..50 {
        let Some(step) = solve_spd(&current.information, &current.gradient) else {
            break;
        };
        if current.gradient.dot(&step).abs() < 1e-14 {
            break;
        }
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let candidate: Vec<f64> = shift.iter().zip(step.iter()).map(|(s, d)| s + scale * d).collect();
            let next = importance_moments(deviations, &candidate);
            if next.ess >= min_ess && next.log_ratio > current.log_ratio {
                shift = candidate;
                current = next;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            break;
        }
    }
    shift
}

/// Covariance of the sample mean estimated from `BATCHES` batch means.
fn batch_means_covariance(deviations: &[Vec<f64>]) -> DMatrix<f64> {
    let k = deviations[0].len();
    let batches = BATCHES.min(deviations.len() / 2).max(2);
    let size = deviations.len() / batches;
    let means: Vec<Vec<f64>> = (0..batches)
        .map(|b| {
            let chunk = &deviations[b * size..(b + 1) * size];
            (0..k)
                .map(|t| chunk.iter().map(|d| d[t]).sum::<f64>() / size as f64)
                .collect()
        })
        .collect();
    let grand: Vec<f64> = (0..k)
        .map(|t| means.iter().map(|m| m[t]).sum::<f64>() / batches as f64)
        .collect();
    let mut cov = DMatrix::zeros(k, k);
    for m in &means {
        for a in 0..k {
            for b in 0..k {
                cov[(a, b)] += (m[a] - grand[a]) * (m[b] - grand[b]);
            }
        }
    }
    cov / ((batches - 1) * batches) as f64
}

/// `log kappa(theta) - log kappa(0)` as a sum of bridge ratios along the
/// straight path, each sampled at its midpoint. Bridges run concurrently on
/// independent streams and are summed in path order.
fn bridge_log_normalizer(
    spec: &ErgmSpec,
    theta: &[f64],
    start: &BinaryAdjacency,
    control: &McmcControl,
    n: usize,
) -> Result<f64, ErgmError> {
    let b = control.bridges;
    let pieces: Vec<Result<f64, ErgmError>> = (0..b)
        .into_par_iter()
        .map(|i| {
            let at = |f: f64| theta.iter().map(|t| t * f).collect::<Vec<f64>>();
            let lo = i as f64 / b as f64;
            let hi = (i + 1) as f64 / b as f64;
            let mid = at((lo + hi) / 2.0);
            let sim = simulate(
                spec,
                &mid,
                start,
                &SimulationControl {
                    burnin: control.burnin_for(n),
                    interval: control.interval_for(n),
                    sample_size: control.bridge_sample_size,
                    seed: control.seed,
                    stream: BRIDGE_STREAM + i as u64,
                    keep_networks: false,
                },
            )?;
            let energy = |f: f64| -> Vec<f64> {
                let d: Vec<f64> = at(f).iter().zip(&mid).map(|(a, m)| a - m).collect();
                sim.statistics
                    .iter()
                    .map(|s| s.iter().zip(&d).map(|(x, y)| x * y).sum())
                    .collect()
            };
            Ok(log_sum_exp(&energy(hi)) - log_sum_exp(&energy(lo)))
        })
        .collect();
    pieces.into_iter().sum()
}

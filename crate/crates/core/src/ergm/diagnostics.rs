use serde::{Deserialize, Serialize};

use super::{ErgmError, ErgmFit};
use crate::numeric::{lenient_float, mean, sample_variance};

/// Chain summary for one term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDiagnostics {
    pub term: String,
    #[serde(with = "lenient_float")]
    pub observed: f64,
    #[serde(with = "lenient_float")]
    pub mean: f64,
    #[serde(with = "lenient_float")]
    pub sd: f64,
    #[serde(with = "lenient_float")]
    pub q025: f64,
    #[serde(with = "lenient_float")]
    pub median: f64,
    #[serde(with = "lenient_float")]
    pub q975: f64,
    /// `None` when the chain is constant.
    pub geweke_z: Option<f64>,
    /// `None` when the chain is constant.
    pub effective_sample_size: Option<f64>,
    /// Set when `|geweke_z| > 2`.
    pub stationarity_flag: bool,
}

/// Effective sample size by Geyer's initial positive sequence estimator.
/// `None` for a constant trace.
pub fn effective_sample_size(trace: &[f64]) -> Option<f64> {
    let m = trace.len();
    if m < 4 {
        return None;
    }
    let mu = mean(trace);
    let centred: Vec<f64> = trace.iter().map(|v| v - mu).collect();
    let autocov = |lag: usize| -> f64 {
        centred[..m - lag]
            .iter()
            .zip(&centred[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / m as f64
    };
    let gamma0 = autocov(0);
    if !(gamma0 > 0.0) {
        return None;
    }
    let mut tau = -gamma0;
    let mut lag = 0;
    while lag + 1 < m {
        let pair = autocov(lag) + autocov(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    let ess = m as f64 * gamma0 / tau.max(gamma0 * 1e-12);
    Some(ess.min(m as f64))
}

/// Geweke's stationarity z-score comparing the first 10% of the chain with
/// the last 50%, each variance corrected by its effective sample size.
pub fn geweke_z(trace: &[f64]) -> Option<f64> {
    let m = trace.len();
    if m < 20 {
        return None;
    }
    let first = &trace[..m / 10];
    let last = &trace[m - m / 2..];
    let term = |seg: &[f64]| -> Option<f64> {
        let v = sample_variance(seg);
        if v == 0.0 {
            return Some(0.0);
        }
        Some(v / effective_sample_size(seg)?)
    };
    let (va, vb) = (term(first)?, term(last)?);
    let diff = mean(first) - mean(last);
    if va + vb == 0.0 {
        return if diff == 0.0 { None } else { Some(f64::INFINITY.copysign(diff)) };
    }
    Some(diff / (va + vb).sqrt())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per-term summary of simulated statistic traces.
pub fn summarize_traces(labels: &[String], observed: &[f64], traces: &[Vec<f64>]) -> Vec<TermDiagnostics> {
    labels
        .iter()
        .zip(observed)
        .zip(traces)
        .map(|((label, &obs), trace)| {
            let mut sorted = trace.clone();
            sorted.sort_by(f64::total_cmp);
            let z = geweke_z(trace);
            let empty = sorted.is_empty();
            TermDiagnostics {
                term: label.clone(),
                observed: obs,
                mean: if empty { f64::NAN } else { mean(trace) },
                sd: sample_variance(trace).sqrt(),
                q025: if empty { f64::NAN } else { quantile(&sorted, 0.025) },
                median: if empty { f64::NAN } else { quantile(&sorted, 0.5) },
                q975: if empty { f64::NAN } else { quantile(&sorted, 0.975) },
                geweke_z: z,
                effective_sample_size: effective_sample_size(trace),
                stationarity_flag: z.is_some_and(|z| z.abs() > 2.0),
            }
        })
        .collect()
}

/// Trace diagnostics of an MC-MLE fit.
pub fn mcmc_diagnostics(fit: &ErgmFit) -> Result<Vec<TermDiagnostics>, ErgmError> {
    let chain = fit.chain.as_ref().ok_or(ErgmError::NoChain)?;
    Ok(summarize_traces(&fit.labels, &chain.observed, &chain.traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn ar1(m: usize, phi: f64, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = 0.0;
        (0..m)
            .map(|_| {
                let e: f64 = (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0;
                x = phi * x + e;
                x
            })
            .collect()
    }

    #[test]
    fn constant_trace_is_degenerate() {
        assert_eq!(effective_sample_size(&[3.0; 100]), None);
        assert_eq!(geweke_z(&[3.0; 100]), None);
        let d = summarize_traces(&["edges".into()], &[3.0], &[vec![3.0; 100]]);
        assert!(!d[0].stationarity_flag);
        assert_eq!(d[0].effective_sample_size, None);
    }

    #[test]
    fn ess_tracks_autocorrelation() {
        let white = effective_sample_size(&ar1(4000, 0.0, 1)).unwrap();
        assert!(white > 3000.0, "{white}");
        // AR(1) with phi = 0.9 has integrated time (1 + phi) / (1 - phi) = 19.
        let sticky = effective_sample_size(&ar1(20_000, 0.9, 2)).unwrap();
        let expected = 20_000.0 / 19.0;
        assert!((sticky / expected - 1.0).abs() < 0.3, "{sticky} vs {expected}");
    }

    #[test]
    fn geweke_flags_trend_not_noise() {
        let noise = ar1(2000, 0.3, 4);
        assert!(geweke_z(&noise).unwrap().abs() < 2.0);
        let trend: Vec<f64> = noise.iter().enumerate().map(|(i, v)| v + i as f64 * 0.05).collect();
        assert!(geweke_z(&trend).unwrap().abs() > 2.0);
    }
}

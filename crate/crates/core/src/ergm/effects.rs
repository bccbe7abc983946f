use serde::{Deserialize, Serialize};

use super::{ErgmError, ErgmFit};
use crate::numeric::{chi_square_sf, expit, fmt_float, lenient_float};

/// A coefficient on the log-odds, odds and probability scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub term: String,
    #[serde(with = "lenient_float")]
    pub theta: f64,
    #[serde(with = "lenient_float")]
    pub odds_ratio: f64,
    #[serde(with = "lenient_float")]
    pub probability: f64,
}

/// `exp(theta)` and `expit(theta)` per term; infinite coefficients map to
/// the limits `0`/`Inf` and `0`/`1`.
pub fn report_effects(fit: &ErgmFit) -> Vec<Effect> {
    fit.labels
        .iter()
        .zip(&fit.theta)
        .map(|(term, &theta)| Effect {
            term: term.clone(),
            theta,
            odds_ratio: theta.exp(),
            probability: expit(theta),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRanking {
    pub name: String,
    pub k: usize,
    #[serde(with = "lenient_float")]
    pub log_likelihood: f64,
    #[serde(with = "lenient_float")]
    pub aic: f64,
    #[serde(with = "lenient_float")]
    pub bic: f64,
    /// Percentage reduction relative to the first model supplied.
    #[serde(with = "lenient_float")]
    pub aic_reduction_pct: f64,
    #[serde(with = "lenient_float")]
    pub bic_reduction_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub reference: String,
    /// Sorted by increasing AIC; ties keep input order.
    pub rows: Vec<ModelRanking>,
}

impl ModelComparison {
    pub fn row(&self, name: &str) -> Option<&ModelRanking> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "model,k,log_likelihood,aic,bic,aic_reduction_pct,bic_reduction_pct")?;
        for r in &self.rows {
            writeln!(
                sink,
                "{},{},{},{},{},{},{}",
                r.name,
                r.k,
                fmt_float(r.log_likelihood),
                fmt_float(r.aic),
                fmt_float(r.bic),
                fmt_float(r.aic_reduction_pct),
                fmt_float(r.bic_reduction_pct)
            )?;
        }
        Ok(())
    }
}

/// Ranks fits of the same graph by AIC with reductions relative to the first
/// fit.
pub fn compare_models(fits: &[(&str, &ErgmFit)]) -> Result<ModelComparison, ErgmError> {
    let Some(&(reference, first)) = fits.first() else {
        return Err(ErgmError::Comparison("no models to compare".into()));
    };
    if fits.len() < 2 {
        return Err(ErgmError::Comparison("comparison needs at least two models".into()));
    }
    if let Some((name, _)) = fits.iter().find(|(_, f)| f.graph_digest != first.graph_digest) {
        return Err(ErgmError::Comparison(format!(
            "model '{name}' was fitted to a different graph than '{reference}'"
        )));
    }
    let pct = |base: f64, v: f64| 100.0 * (base - v) / base;
    let mut rows: Vec<ModelRanking> = fits
        .iter()
        .map(|(name, f)| ModelRanking {
            name: name.to_string(),
            k: f.k(),
            log_likelihood: f.log_likelihood,
            aic: f.aic,
            bic: f.bic,
            aic_reduction_pct: pct(first.aic, f.aic),
            bic_reduction_pct: pct(first.bic, f.bic),
        })
        .collect();
    rows.sort_by(|a, b| a.aic.total_cmp(&b.aic));
    Ok(ModelComparison {
        reference: reference.to_string(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodRatioTest {
    #[serde(with = "lenient_float")]
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    #[serde(with = "lenient_float")]
    pub p_value: f64,
}

/// Likelihood-ratio test of `full` against the nested `null` model,
/// referred to a chi-square with the difference in parameter counts.
pub fn likelihood_ratio_test(null: &ErgmFit, full: &ErgmFit) -> Result<LikelihoodRatioTest, ErgmError> {
    if null.graph_digest != full.graph_digest {
        return Err(ErgmError::Comparison("models were fitted to different graphs".into()));
    }
    if full.k() <= null.k() {
        return Err(ErgmError::Comparison(
            "the full model must have more parameters than the null model".into(),
        ));
    }
    let dof = full.k() - null.k();
    let statistic = (2.0 * (full.log_likelihood - null.log_likelihood)).max(0.0);
    Ok(LikelihoodRatioTest {
        statistic,
        degrees_of_freedom: dof,
        p_value: chi_square_sf(statistic, dof as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergm::{fit_exact_dyad, ErgmSpec, ErgmTerm, Method};
    use crate::ergm::test_support::random_adjacency;

    fn fit_with(theta: Vec<f64>, ll: f64, digest: &str) -> ErgmFit {
        let k = theta.len();
        let (aic, bic) = crate::ergm::information_criteria(ll, k, 10);
        ErgmFit {
            method: Method::ExactDyad,
            labels: (0..k).map(|i| format!("t{i}")).collect(),
            theta,
            std_err: vec![0.1; k],
            p_values: vec![0.0; k],
            mc_std_err: vec![],
            separated: vec![false; k],
            log_likelihood: ll,
            aic,
            bic,
            iterations: 1,
            node_count: 10,
            dyad_observations: 90,
            graph_digest: digest.into(),
            chain: None,
        }
    }

    #[test]
    fn effects_transform() {
        let f = fit_with(vec![2.251, 0.0, 1.499, f64::NEG_INFINITY], -1.0, "g");
        let e = report_effects(&f);
        assert!((e[0].odds_ratio - 9.497).abs() < 1e-3);
        assert!((e[0].probability - 0.905).abs() < 1e-3);
        assert_eq!(e[1].odds_ratio, 1.0);
        assert_eq!(e[1].probability, 0.5);
        assert!((e[2].odds_ratio - 4.477).abs() < 1e-3);
        assert!((e[2].probability - 0.817).abs() < 1e-3);
        assert_eq!(e[3].odds_ratio, 0.0);
        assert_eq!(e[3].probability, 0.0);
    }

    #[test]
    fn comparison_sorts_and_reports_reductions() {
        let a = fit_with(vec![0.0], -100.0, "g");
        let b = fit_with(vec![0.0, 0.0, 0.0], -80.0, "g");
        let cmp = compare_models(&[("m1", &a), ("m3", &b)]).unwrap();
        assert_eq!(cmp.rows[0].name, "m3");
        let expected = 100.0 * (a.aic - b.aic) / a.aic;
        assert!((cmp.row("m3").unwrap().aic_reduction_pct - expected).abs() < 1e-12);
        assert_eq!(cmp.row("m1").unwrap().aic_reduction_pct, 0.0);

        let same = compare_models(&[("x", &a), ("y", &a)]).unwrap();
        assert!(same.rows.iter().all(|r| r.aic_reduction_pct == 0.0));

        let other = fit_with(vec![0.0], -100.0, "h");
        assert!(compare_models(&[("m1", &a), ("o", &other)]).is_err());
        assert!(compare_models(&[("m1", &a)]).is_err());
    }

    #[test]
    fn lrt_against_edges_only() {
        let y = random_adjacency(20, 0.1, 0.8, 3);
        let null = fit_exact_dyad(&y, &ErgmSpec::new(20, vec![ErgmTerm::Edges]).unwrap()).unwrap();
        let full = fit_exact_dyad(&y, &ErgmSpec::new(20, vec![ErgmTerm::Edges, ErgmTerm::Mutual]).unwrap()).unwrap();
        let t = likelihood_ratio_test(&null, &full).unwrap();
        assert_eq!(t.degrees_of_freedom, 1);
        assert!(t.statistic > 0.0);
        assert!(t.p_value < 0.05);
        assert!(likelihood_ratio_test(&full, &null).is_err());
    }
}

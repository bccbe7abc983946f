use serde::{Deserialize, Serialize};

use super::{SbmError, SbmFit};
use crate::graph::{AttributeTable, Categorical, CategoricalColumn};
use crate::numeric::{fmt_float, lenient_float};
use crate::topology::{csv_field, CentralityReport, Metric};

/// Most frequent level of one attribute inside a community; ties go to the
/// level listed first in the column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominantLevel {
    pub attribute: Categorical,
    pub level: String,
    pub share: f64,
}

fn dominant(fit: &SbmFit, attribute: Categorical, column: &CategoricalColumn) -> Vec<DominantLevel> {
    let levels = column.levels().len();
    let mut counts = vec![vec![0usize; levels]; fit.q];
    for (i, &c) in fit.labels.labels().iter().enumerate() {
        counts[c][column.code(i)] += 1;
    }
    counts
        .iter()
        .zip(fit.labels.sizes())
        .map(|(row, &size)| {
            let mut best = 0;
            for (k, &c) in row.iter().enumerate() {
                if c > row[best] {
                    best = k;
                }
            }
            DominantLevel {
                attribute,
                level: column.levels()[best].clone(),
                share: row[best] as f64 / size as f64,
            }
        })
        .collect()
}

fn check_aligned(fit: &SbmFit, attrs: Option<&AttributeTable>) -> Result<(), SbmError> {
    match attrs {
        Some(a) if a.node_count() != fit.labels.len() => Err(SbmError::Misaligned {
            expected: fit.labels.len(),
            found: a.node_count(),
        }),
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityAnnotation {
    /// Numbered from 1.
    pub community: usize,
    pub size: usize,
    pub party: Option<DominantLevel>,
    pub chamber: Option<DominantLevel>,
}

/// Block matrix with each community tagged by its dominant party and chamber.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub pi: Vec<Vec<f64>>,
    pub annotations: Vec<CommunityAnnotation>,
}

impl InteractionMatrix {
    pub fn write_csv<W: std::io::Write>(&self, mut sink: W) -> std::io::Result<()> {
        write!(sink, "community,size,party,chamber")?;
        for a in &self.annotations {
            write!(sink, ",{}", a.community)?;
        }
        writeln!(sink)?;
        let level = |d: &Option<DominantLevel>| d.as_ref().map(|d| csv_field(&d.level)).unwrap_or_default();
        for (a, row) in self.annotations.iter().zip(&self.pi) {
            write!(sink, "{},{},{},{}", a.community, a.size, level(&a.party), level(&a.chamber))?;
            for &p in row {
                write!(sink, ",{}", fmt_float(p))?;
            }
            writeln!(sink)?;
        }
        Ok(())
    }
}

pub fn interaction_matrix(fit: &SbmFit, attrs: Option<&AttributeTable>) -> Result<InteractionMatrix, SbmError> {
    check_aligned(fit, attrs)?;
    let tag = |attribute: Categorical| -> Vec<Option<DominantLevel>> {
        match attrs.and_then(|a| a.categorical(attribute)) {
            Some(col) => dominant(fit, attribute, col).into_iter().map(Some).collect(),
            None => vec![None; fit.q],
        }
    };
    let party = tag(Categorical::Party);
    let chamber = tag(Categorical::Chamber);
    let annotations = party
        .into_iter()
        .zip(chamber)
        .zip(fit.labels.sizes())
        .enumerate()
        .map(|(k, ((party, chamber), &size))| CommunityAnnotation {
            community: k + 1,
            size,
            party,
            chamber,
        })
        .collect();
    Ok(InteractionMatrix {
        pi: fit.pi.clone(),
        annotations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    /// Mean of the min-max normalised metric over members with a value.
    #[serde(with = "lenient_float")]
    pub mean: f64,
    /// Population standard deviation over the mean; NaN for a zero mean.
    #[serde(with = "lenient_float")]
    pub cv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityRow {
    pub community: usize,
    pub size: usize,
    pub share: f64,
    pub dominant: Vec<DominantLevel>,
    pub metrics: Vec<MetricSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    pub rows: Vec<CommunityRow>,
}

impl CommunitySummary {
    /// One row per community. Dominant-level and metric columns follow the
    /// first row's layout, which every row shares.
    pub fn write_csv<W: std::io::Write>(&self, mut sink: W) -> std::io::Result<()> {
        write!(sink, "community,size,share")?;
        if let Some(first) = self.rows.first() {
            for d in &first.dominant {
                write!(sink, ",{0}_dominant,{0}_share", d.attribute.name())?;
            }
            for m in &first.metrics {
                write!(sink, ",{0}_mean,{0}_cv", m.metric.name())?;
            }
        }
        writeln!(sink)?;
        for r in &self.rows {
            write!(sink, "{},{},{}", r.community, r.size, fmt_float(r.share))?;
            for d in &r.dominant {
                write!(sink, ",{},{}", csv_field(&d.level), fmt_float(d.share))?;
            }
            for m in &r.metrics {
                write!(sink, ",{},{}", fmt_float(m.mean), fmt_float(m.cv))?;
            }
            writeln!(sink)?;
        }
        Ok(())
    }
}

fn min_max(values: &[Option<f64>]) -> Vec<Option<f64>> {
    let present = values.iter().flatten();
    let lo = present.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = present.copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| v.map(|x| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 }))
        .collect()
}

/// Per community: size and share, the dominant level of every categorical
/// attribute supplied, and the mean and coefficient of variation of each
/// min-max normalised centrality metric.
pub fn community_summary(
    fit: &SbmFit,
    attrs: Option<&AttributeTable>,
    centrality: Option<&CentralityReport>,
) -> Result<CommunitySummary, SbmError> {
    check_aligned(fit, attrs)?;
    if let Some(c) = centrality {
        if c.nodes.len() != fit.labels.len() {
            return Err(SbmError::Misaligned {
                expected: fit.labels.len(),
                found: c.nodes.len(),
            });
        }
    }
    let n = fit.labels.len() as f64;
    let mut dominant_by_attr: Vec<Vec<DominantLevel>> = Vec::new();
    if let Some(a) = attrs {
        for (attribute, column) in a.categorical_columns() {
            dominant_by_attr.push(dominant(fit, attribute, column));
        }
    }
    let normalised: Vec<(Metric, Vec<Option<f64>>)> = centrality
        .map(|c| Metric::ALL.iter().map(|&m| (m, min_max(&c.values(m)))).collect())
        .unwrap_or_default();

    let rows = (0..fit.q)
        .map(|k| {
            let members: Vec<usize> = (0..fit.labels.len()).filter(|&i| fit.labels.labels()[i] == k).collect();
            let metrics = normalised
                .iter()
                .map(|(metric, values)| {
                    let xs: Vec<f64> = members.iter().filter_map(|&i| values[i]).collect();
                    let m = xs.len() as f64;
                    let mean = xs.iter().sum::<f64>() / m;
                    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m).sqrt();
                    MetricSummary {
                        metric: *metric,
                        mean,
                        cv: if mean != 0.0 { sd / mean } else { f64::NAN },
                    }
                })
                .collect();
            CommunityRow {
                community: k + 1,
                size: members.len(),
                share: members.len() as f64 / n,
                dominant: dominant_by_attr.iter().map(|d| d[k].clone()).collect(),
                metrics,
            }
        })
        .collect();
    Ok(CommunitySummary { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Graph};
    use crate::sbm::test_support::planted;
    use crate::sbm::{fit_q, SbmControl};
    use crate::topology::PowerOptions;

    fn setup() -> (Graph, SbmFit) {
        let (y, _) = planted(&[20, 10], 0.9, 0.05, 3);
        let ids: Vec<String> = (0..30).map(|i| format!("n{i}")).collect();
        let edges = y.pairs().map(|(i, j)| Edge { source: i, target: j, weight: 0.5 }).collect();
        let g = Graph::from_parts(ids, edges).unwrap();
        let fit = fit_q(&y, 2, &SbmControl { restarts: 2, ..SbmControl::default() }).unwrap();
        (g, fit)
    }

    #[test]
    fn constant_attribute_dominates_fully() {
        let (g, fit) = setup();
        let attrs = AttributeTable::new(g.node_ids().to_vec())
            .with_categorical(Categorical::Party, &vec!["Democrat"; 30])
            .unwrap();
        let m = interaction_matrix(&fit, Some(&attrs)).unwrap();
        assert!(m.annotations.iter().all(|a| a.party.as_ref().unwrap().share == 1.0));
        assert!(m.annotations.iter().all(|a| a.chamber.is_none()));
        assert_eq!(m.annotations[0].size, 20);

        let c = CentralityReport::compute(&g, &PowerOptions::default()).unwrap();
        let s = community_summary(&fit, Some(&attrs), Some(&c)).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert!((s.rows[0].share - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.rows[0].dominant[0].share, 1.0);
        assert_eq!(s.rows[0].metrics.len(), Metric::ALL.len());
        for row in &s.rows {
            for m in &row.metrics {
                assert!((0.0..=1.0).contains(&m.mean));
            }
        }
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("community,size,share,party_dominant,party_share,in_degree_mean,in_degree_cv"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn single_community_has_full_share() {
        let (y, _) = planted(&[8], 0.5, 0.5, 1);
        let fit = fit_q(&y, 1, &SbmControl::default()).unwrap();
        let s = community_summary(&fit, None, None).unwrap();
        assert_eq!(s.rows[0].share, 1.0);
        assert!(s.rows[0].metrics.is_empty());
        let m = interaction_matrix(&fit, None).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("community,size,party,chamber,1\n1,8,,,"));
    }

    #[test]
    fn misaligned_attributes_rejected() {
        let (_, fit) = setup();
        let attrs = AttributeTable::new(vec!["a".into()]);
        assert!(interaction_matrix(&fit, Some(&attrs)).is_err());
    }
}

//! Model definitions by attribute name, as read from JSON, and the built-in
//! roster `model1`..`model6`.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::terms::{ErgmSpec, ErgmTerm, Role};
use super::ErgmError;
use crate::graph::{AttributeTable, Categorical, Quantitative};
use crate::numeric::{mean, sample_variance};
use crate::topology::{CentralityReport, Metric};

/// One term of a model file. `attribute` names a quantitative or categorical
/// attribute column, or a structural metric (`in_degree`, `out_degree`,
/// `out_strength`, `closeness`, `betweenness`, `eigen`, `hub`, `authority`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "lowercase")]
pub enum TermSpec {
    Edges,
    Mutual,
    Nodecov {
        attribute: String,
        /// Defaults to the configured role for structural metrics and to
        /// `sum` for attributes.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        role: Option<Role>,
    },
    Nodematch {
        attribute: String,
        /// One coefficient per level instead of a single homophily term.
        #[serde(default)]
        differential: bool,
        /// Levels for the differential form, in output order; all levels
        /// with at least two members when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        levels: Option<Vec<String>>,
    },
    Absdiff {
        attribute: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDefinition {
    pub name: String,
    pub terms: Vec<TermSpec>,
    /// Apply the configured party reassignment before resolving terms.
    #[serde(default)]
    pub reassign_party: bool,
}

impl ModelDefinition {
    pub fn needs_centrality(&self) -> bool {
        self.terms.iter().any(|t| match t {
            TermSpec::Nodecov { attribute, .. } | TermSpec::Absdiff { attribute } => {
                Metric::from_name(attribute).is_some()
            }
            _ => false,
        })
    }

    pub fn needs_attributes(&self) -> bool {
        self.terms.iter().any(|t| match t {
            TermSpec::Nodecov { attribute, .. } | TermSpec::Absdiff { attribute } => {
                Metric::from_name(attribute).is_none()
            }
            TermSpec::Nodematch { .. } => true,
            _ => false,
        })
    }
}

/// Role of each structural metric when used as a node covariate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CovariateRoles {
    pub in_degree: Role,
    pub out_degree: Role,
    pub out_strength: Role,
    pub closeness: Role,
    pub betweenness: Role,
    pub eigen: Role,
    pub hub: Role,
    pub authority: Role,
    pub local_clustering: Role,
}

impl Default for CovariateRoles {
    fn default() -> Self {
        Self {
            in_degree: Role::Receiver,
            out_degree: Role::Sender,
            out_strength: Role::Sender,
            closeness: Role::Sum,
            betweenness: Role::Sum,
            eigen: Role::Sum,
            hub: Role::Sender,
            authority: Role::Sum,
            local_clustering: Role::Sum,
        }
    }
}

impl CovariateRoles {
    pub fn role(&self, metric: Metric) -> Role {
        match metric {
            Metric::InDegree => self.in_degree,
            Metric::OutDegree => self.out_degree,
            Metric::OutStrength => self.out_strength,
            Metric::Closeness => self.closeness,
            Metric::Betweenness => self.betweenness,
            Metric::Eigen => self.eigen,
            Metric::Hub => self.hub,
            Metric::Authority => self.authority,
            Metric::LocalClustering => self.local_clustering,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelOptions {
    /// Centre and scale real covariates to unit sample variance.
    pub standardize: bool,
    pub roles: CovariateRoles,
    /// `node_id -> party` overrides applied by models with
    /// `reassign_party`.
    pub party_reassignment: BTreeMap<String, String>,
}

pub const NAMED_MODELS: [&str; 6] = ["model1", "model2", "model3", "model4", "model5", "model6"];

fn cov(attribute: &str) -> TermSpec {
    TermSpec::Nodecov {
        attribute: attribute.into(),
        role: None,
    }
}

fn diff(attribute: &str, levels: Option<&[&str]>) -> TermSpec {
    TermSpec::Nodematch {
        attribute: attribute.into(),
        differential: true,
        levels: levels.map(|l| l.iter().map(|s| s.to_string()).collect()),
    }
}

/// Built-in roster: structural (1-3), attribute (4), mixed (5-6).
pub fn named_model(name: &str) -> Result<ModelDefinition, ErgmError> {
    use TermSpec::{Edges, Mutual};
    let terms = match name {
        "model1" => vec![Edges],
        "model2" => vec![Edges, Mutual],
        "model3" => vec![
            Edges,
            Mutual,
            cov("in_degree"),
            cov("out_degree"),
            cov("out_strength"),
            cov("closeness"),
            cov("betweenness"),
            cov("eigen"),
            cov("hub"),
            cov("authority"),
        ],
        "model4" => vec![
            Edges,
            cov("age"),
            cov("tenure"),
            diff("party", Some(&["Democrat", "Republican", "Independent"])),
            diff("race", Some(&["White", "Black", "Native American", "Asiatic", "Other"])),
            diff("ethnicity", Some(&["Hispanic", "Not Hispanic"])),
            diff("religion", Some(&["Christian", "Other"])),
            diff("sex", Some(&["Female", "Male"])),
            diff("chamber", Some(&["Upper", "Lower"])),
            diff("lgbtq", Some(&["Yes", "No"])),
        ],
        "model5" => vec![
            Edges,
            Mutual,
            cov("in_degree"),
            cov("out_degree"),
            cov("closeness"),
            cov("betweenness"),
            cov("hub"),
            cov("age"),
            cov("tenure"),
        ],
        "model6" => vec![
            Edges,
            Mutual,
            cov("in_degree"),
            cov("out_degree"),
            cov("closeness"),
            cov("betweenness"),
            cov("hub"),
            diff("party", Some(&["Democrat", "Republican"])),
            diff("chamber", Some(&["Upper", "Lower"])),
        ],
        other => return Err(ErgmError::UnknownModel(other.to_string())),
    };
    Ok(ModelDefinition {
        name: name.to_string(),
        terms,
        reassign_party: name == "model6",
    })
}

/// Resolves attribute names into covariate vectors for an `n`-node graph.
///
/// Differential levels with fewer than two members cannot carry a tie and
/// are dropped with a warning.
pub fn build_model(
    definition: &ModelDefinition,
    node_count: usize,
    attrs: Option<&AttributeTable>,
    centrality: Option<&CentralityReport>,
    options: &ModelOptions,
) -> Result<ErgmSpec, ErgmError> {
    let reassigned;
    let attrs = match attrs {
        Some(a) if definition.reassign_party && !options.party_reassignment.is_empty() => {
            reassigned = a
                .reassign_party(&options.party_reassignment)
                .map_err(|e| ErgmError::InvalidSpec(e.to_string()))?;
            Some(&reassigned)
        }
        other => other,
    };
    if let Some(a) = attrs {
        if a.node_count() != node_count {
            return Err(ErgmError::CovariateLength {
                term: "attribute table".into(),
                expected: node_count,
                found: a.node_count(),
            });
        }
    }

    let real = |attribute: &str| -> Result<(Vec<f64>, Option<Metric>), ErgmError> {
        if let Some(metric) = Metric::from_name(attribute) {
            let c = centrality.ok_or(ErgmError::MissingCentrality)?;
            return Ok((c.covariate(metric), Some(metric)));
        }
        let q = Quantitative::from_name(attribute)
            .ok_or_else(|| ErgmError::MissingAttribute(attribute.to_string()))?;
        let values = attrs
            .and_then(|a| a.quantitative(q))
            .ok_or_else(|| ErgmError::MissingAttribute(attribute.to_string()))?;
        Ok((values.to_vec(), None))
    };
    let scale = |mut v: Vec<f64>| {
        if options.standardize {
            let m = mean(&v);
            let sd = sample_variance(&v).sqrt();
            if sd > 0.0 {
                v.iter_mut().for_each(|x| *x = (*x - m) / sd);
            }
        }
        v
    };

    let mut terms = Vec::new();
    for spec in &definition.terms {
        match spec {
            TermSpec::Edges => terms.push(ErgmTerm::Edges),
            TermSpec::Mutual => terms.push(ErgmTerm::Mutual),
            TermSpec::Nodecov { attribute, role } => {
                let (values, metric) = real(attribute)?;
                let role = role.unwrap_or_else(|| metric.map_or(Role::Sum, |m| options.roles.role(m)));
                terms.push(ErgmTerm::node_covariate(attribute.as_str(), scale(values), role));
            }
            TermSpec::Absdiff { attribute } => {
                let (values, _) = real(attribute)?;
                terms.push(ErgmTerm::abs_diff(attribute.as_str(), scale(values)));
            }
            TermSpec::Nodematch {
                attribute,
                differential,
                levels,
            } => {
                let c = Categorical::from_name(attribute)
                    .ok_or_else(|| ErgmError::MissingAttribute(attribute.clone()))?;
                let column = attrs
                    .and_then(|a| a.categorical(c))
                    .ok_or_else(|| ErgmError::MissingAttribute(attribute.clone()))?;
                let labels = column.codes().to_vec();
                if !differential {
                    terms.push(ErgmTerm::node_match(c.name(), labels));
                    continue;
                }
                let wanted: Vec<String> = match levels {
                    Some(l) => l
                        .iter()
                        .map(|raw| {
                            c.canonical_level(raw).ok_or_else(|| {
                                ErgmError::InvalidSpec(format!("{attribute} has no level '{raw}'"))
                            })
                        })
                        .collect::<Result<_, _>>()?,
                    None => column.levels().to_vec(),
                };
                for level in wanted {
                    let code = column.level_code(&level).ok_or_else(|| {
                        ErgmError::InvalidSpec(format!("{attribute} has no level '{level}'"))
                    })?;
                    let members = labels.iter().filter(|&&l| l == code).count();
                    if members < 2 {
                        warn!("{}: level '{level}' has {members} member(s); term dropped", definition.name);
                        continue;
                    }
                    terms.push(ErgmTerm::node_match_level(c.name(), labels.clone(), code, level));
                }
            }
        }
    }
    ErgmSpec::new(node_count, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{PowerOptions, CentralityReport};
    use crate::topology::test_support::graph_from;

    fn table(n: usize) -> AttributeTable {
        let ids = (0..n).map(|i| format!("n{i}")).collect();
        let party: Vec<&str> = (0..n).map(|i| ["D", "R", "I"][i % 3]).collect();
        let chamber: Vec<&str> = (0..n).map(|i| if i < 3 { "Senate" } else { "House" }).collect();
        AttributeTable::new(ids)
            .with_categorical(Categorical::Party, &party)
            .unwrap()
            .with_categorical(Categorical::Chamber, &chamber)
            .unwrap()
            .with_quantitative(Quantitative::Age, (0..n).map(|i| 40.0 + i as f64).collect())
    }

    #[test]
    fn roster_labels() {
        let g = graph_from(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3)]);
        let c = CentralityReport::compute(&g, &PowerOptions::default()).unwrap();
        let spec = build_model(&named_model("model3").unwrap(), 6, None, Some(&c), &ModelOptions::default()).unwrap();
        assert_eq!(
            spec.labels(),
            vec![
                "edges",
                "mutual",
                "nodeicov.in_degree",
                "nodeocov.out_degree",
                "nodeocov.out_strength",
                "nodecov.closeness",
                "nodecov.betweenness",
                "nodecov.eigen",
                "nodeocov.hub",
                "nodecov.authority"
            ]
        );
        let mut options = ModelOptions::default();
        options.party_reassignment.insert("n2".into(), "Democrat".into());
        options.party_reassignment.insert("n5".into(), "Republican".into());
        let spec = build_model(&named_model("model6").unwrap(), 6, Some(&table(6)), Some(&c), &options).unwrap();
        let labels = spec.labels();
        assert_eq!(&labels[7..], ["nodematch.party.Democrat", "nodematch.party.Republican", "nodematch.chamber.Upper", "nodematch.chamber.Lower"]);
        assert!(matches!(named_model("model9"), Err(ErgmError::UnknownModel(_))));
    }

    #[test]
    fn missing_inputs_are_reported() {
        let def = named_model("model4").unwrap();
        assert!(def.needs_attributes() && !def.needs_centrality());
        assert!(matches!(build_model(&def, 6, None, None, &ModelOptions::default()), Err(ErgmError::MissingAttribute(_))));
        let def = named_model("model2").unwrap();
        assert!(!def.needs_attributes() && !def.needs_centrality());
        assert!(matches!(
            build_model(&named_model("model5").unwrap(), 6, Some(&table(6)), None, &ModelOptions::default()),
            Err(ErgmError::MissingCentrality)
        ));
    }

    #[test]
    fn json_definition_and_standardization() {
        let text = r#"{"name":"custom","terms":[
            {"term":"edges"},
            {"term":"nodecov","attribute":"age","role":"sender"},
            {"term":"absdiff","attribute":"age"},
            {"term":"nodematch","attribute":"party"},
            {"term":"nodematch","attribute":"party","differential":true}
        ]}"#;
        let def: ModelDefinition = serde_json::from_str(text).unwrap();
        let options = ModelOptions {
            standardize: true,
            ..ModelOptions::default()
        };
        let spec = build_model(&def, 6, Some(&table(6)), None, &options).unwrap();
        assert_eq!(
            spec.labels(),
            vec![
                "edges",
                "nodeocov.age",
                "absdiff.age",
                "nodematch.party",
                "nodematch.party.Democrat",
                "nodematch.party.Republican",
                "nodematch.party.Independent"
            ]
        );
        if let ErgmTerm::NodeCovariate { values, .. } = &spec.terms()[1] {
            assert!(mean(values).abs() < 1e-12);
            assert!((sample_variance(values) - 1.0).abs() < 1e-12);
        } else {
            panic!("expected covariate");
        }
    }
}

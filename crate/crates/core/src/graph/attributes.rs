use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while loading or transforming node attributes.
#[derive(Debug, Error)]
pub enum AttributeError {
    #[error("attribute file: {0}")]
    Csv(String),
    #[error("attribute header must name a node_id column")]
    MissingNodeIdColumn,
    #[error("row {line}: node '{id}' is not in the graph")]
    UnknownNode { id: String, line: u64 },
    #[error("row {line}: node '{id}' appears more than once")]
    DuplicateNode { id: String, line: u64 },
    #[error("row {line}: column '{column}' value '{value}' is not a non-negative number")]
    NotNumeric {
        column: &'static str,
        value: String,
        line: u64,
    },
    #[error("row {line}: column '{column}' value '{value}' is not a known level")]
    UnknownLevelInRow {
        column: &'static str,
        value: String,
        line: u64,
    },
    #[error("attribute/graph mismatch: {rows} attribute rows for {nodes} graph nodes")]
    Mismatch { rows: usize, nodes: usize },
    #[error("attribute '{0}' is not present")]
    MissingColumn(&'static str),
    #[error("node '{0}' is not in the attribute table")]
    UnknownNodeId(String),
    #[error("'{level}' is not a level of '{column}'")]
    UnknownLevel { column: &'static str, level: String },
}

/// Qualitative node attributes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Categorical {
    Party,
    Chamber,
    State,
    Race,
    Ethnicity,
    Religion,
    Sex,
    Lgbtq,
}

/// Quantitative node attributes, both measured in years.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantitative {
    Age,
    Tenure,
}

impl Categorical {
    pub const ALL: [Categorical; 8] = [
        Categorical::Party,
        Categorical::Chamber,
        Categorical::State,
        Categorical::Race,
        Categorical::Ethnicity,
        Categorical::Religion,
        Categorical::Sex,
        Categorical::Lgbtq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Categorical::Party => "party",
            Categorical::Chamber => "chamber",
            Categorical::State => "state",
            Categorical::Race => "race",
            Categorical::Ethnicity => "ethnicity",
            Categorical::Religion => "religion",
            Categorical::Sex => "sex",
            Categorical::Lgbtq => "lgbtq",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(name.trim()))
    }

    /// Declared vocabulary as `(canonical level, aliases)`; `None` for
    /// open vocabularies (state).
    fn vocabulary(self) -> Option<&'static [(&'static str, &'static [&'static str])]> {
        match self {
            Categorical::Party => Some(&[
                ("Democrat", &["D", "Democratic"]),
                ("Republican", &["R"]),
                ("Independent", &["I"]),
            ]),
            Categorical::Chamber => Some(&[
                ("Upper", &["Senate"]),
                ("Lower", &["House", "House of Representatives"]),
            ]),
            Categorical::Race => Some(&[
                ("White", &[]),
                ("Black", &[]),
                ("Other", &[]),
                ("Asiatic", &["Asian"]),
                ("Native American", &[]),
            ]),
            Categorical::Ethnicity => Some(&[
                ("Hispanic", &[]),
                ("Not Hispanic", &["No Hispanic", "Non-Hispanic", "Non Hispanic"]),
            ]),
            Categorical::Religion => Some(&[("Christian", &[]), ("Other", &[])]),
            Categorical::Sex => Some(&[("Male", &["M"]), ("Female", &["F"])]),
            Categorical::Lgbtq => Some(&[("Yes", &["Y", "True"]), ("No", &["N", "False"])]),
            Categorical::State => None,
        }
    }

    /// Canonical spelling of `raw` in this attribute's vocabulary.
    pub fn canonical_level(self, raw: &str) -> Option<String> {
        let raw = raw.trim();
        if raw.is_empty() {
            return None;
        }
        match self.vocabulary() {
            None => Some(raw.to_string()),
            Some(vocab) => vocab
                .iter()
                .find(|(level, aliases)| {
                    level.eq_ignore_ascii_case(raw)
                        || aliases.iter().any(|a| a.eq_ignore_ascii_case(raw))
                })
                .map(|(level, _)| level.to_string()),
        }
    }
}

impl Quantitative {
    pub const ALL: [Quantitative; 2] = [Quantitative::Age, Quantitative::Tenure];

    pub fn name(self) -> &'static str {
        match self {
            Quantitative::Age => "age",
            Quantitative::Tenure => "tenure",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(name.trim()))
    }
}

impl fmt::Display for Categorical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Quantitative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-node level codes for one categorical attribute.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalColumn {
    levels: Vec<String>,
    codes: Vec<usize>,
}

impl CategoricalColumn {
    pub fn new(levels: Vec<String>, codes: Vec<usize>) -> Self {
        debug_assert!(codes.iter().all(|&c| c < levels.len()));
        Self { levels, codes }
    }

    /// Builds a column from raw labels, levels ordered by first appearance.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut levels: Vec<String> = Vec::new();
        let codes = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                match levels.iter().position(|x| x == l) {
                    Some(k) => k,
                    None => {
                        levels.push(l.to_string());
                        levels.len() - 1
                    }
                }
            })
            .collect();
        Self { levels, codes }
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn codes(&self) -> &[usize] {
        &self.codes
    }

    pub fn code(&self, node: usize) -> usize {
        self.codes[node]
    }

    pub fn label(&self, node: usize) -> &str {
        &self.levels[self.codes[node]]
    }

    pub fn level_code(&self, level: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.eq_ignore_ascii_case(level.trim()))
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Share of nodes at each level, in level order.
    pub fn proportions(&self) -> Vec<(String, f64)> {
        let mut counts = vec![0usize; self.levels.len()];
        for &c in &self.codes {
            counts[c] += 1;
        }
        let n = self.codes.len().max(1) as f64;
        self.levels
            .iter()
            .zip(counts)
            .map(|(l, c)| (l.clone(), c as f64 / n))
            .collect()
    }
}

/// Node covariates aligned to graph indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeTable {
    node_ids: Vec<String>,
    categorical: BTreeMap<Categorical, CategoricalColumn>,
    quantitative: BTreeMap<Quantitative, Vec<f64>>,
}

impl AttributeTable {
    /// Empty table for `node_ids`; columns are added with the `with_*` methods.
    pub fn new(node_ids: Vec<String>) -> Self {
        Self {
            node_ids,
            categorical: BTreeMap::new(),
            quantitative: BTreeMap::new(),
        }
    }

    /// Adds a categorical column, canonicalising each label against the
    /// attribute's vocabulary.
    pub fn with_categorical<S: AsRef<str>>(
        mut self,
        attribute: Categorical,
        labels: &[S],
    ) -> Result<Self, AttributeError> {
        assert_eq!(labels.len(), self.node_ids.len(), "one label per node");
        let mut canonical = Vec::with_capacity(labels.len());
        for (row, l) in labels.iter().enumerate() {
            canonical.push(attribute.canonical_level(l.as_ref()).ok_or_else(|| {
                AttributeError::UnknownLevelInRow {
                    column: attribute.name(),
                    value: l.as_ref().to_string(),
                    line: row as u64 + 2,
                }
            })?);
        }
        self.categorical
            .insert(attribute, column_for(attribute, &canonical));
        Ok(self)
    }

    pub fn with_quantitative(mut self, attribute: Quantitative, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.node_ids.len(), "one value per node");
        self.quantitative.insert(attribute, values);
        self
    }

    pub(crate) fn insert_categorical(&mut self, attribute: Categorical, column: CategoricalColumn) {
        self.categorical.insert(attribute, column);
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn categorical(&self, attribute: Categorical) -> Option<&CategoricalColumn> {
        self.categorical.get(&attribute)
    }

    pub fn quantitative(&self, attribute: Quantitative) -> Option<&[f64]> {
        self.quantitative.get(&attribute).map(Vec::as_slice)
    }

    pub fn require_categorical(
        &self,
        attribute: Categorical,
    ) -> Result<&CategoricalColumn, AttributeError> {
        self.categorical(attribute)
            .ok_or(AttributeError::MissingColumn(attribute.name()))
    }

    pub fn require_quantitative(&self, attribute: Quantitative) -> Result<&[f64], AttributeError> {
        self.quantitative(attribute)
            .ok_or(AttributeError::MissingColumn(attribute.name()))
    }

    pub fn categorical_columns(&self) -> impl Iterator<Item = (Categorical, &CategoricalColumn)> {
        self.categorical.iter().map(|(k, v)| (*k, v))
    }

    pub fn quantitative_columns(&self) -> impl Iterator<Item = (Quantitative, &[f64])> {
        self.quantitative.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    /// Copy of the table with the party of selected nodes overridden.
    pub fn reassign_party(
        &self,
        mapping: &BTreeMap<String, String>,
    ) -> Result<AttributeTable, AttributeError> {
        let party = self.require_categorical(Categorical::Party)?;
        let mut codes = party.codes().to_vec();
        for (id, level) in mapping {
            let node = self
                .node_ids
                .iter()
                .position(|x| x == id)
                .ok_or_else(|| AttributeError::UnknownNodeId(id.clone()))?;
            let canonical = Categorical::Party.canonical_level(level).ok_or_else(|| {
                AttributeError::UnknownLevel {
                    column: "party",
                    level: level.clone(),
                }
            })?;
            codes[node] = party
                .level_code(&canonical)
                .expect("declared vocabulary holds every canonical level");
        }
        let mut out = self.clone();
        out.categorical.insert(
            Categorical::Party,
            CategoricalColumn::new(party.levels().to_vec(), codes),
        );
        Ok(out)
    }
}

/// Column whose levels are the declared vocabulary (or first-appearance
/// order for open vocabularies).
pub(crate) fn column_for(attribute: Categorical, canonical: &[String]) -> CategoricalColumn {
    match attribute.vocabulary() {
        Some(vocab) => {
            let levels: Vec<String> = vocab.iter().map(|(l, _)| l.to_string()).collect();
            let codes = canonical
                .iter()
                .map(|c| levels.iter().position(|l| l == c).expect("canonical level"))
                .collect();
            CategoricalColumn::new(levels, codes)
        }
        None => CategoricalColumn::from_labels(canonical),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> AttributeTable {
        AttributeTable::new(vec!["a".into(), "b".into(), "c".into()])
            .with_categorical(Categorical::Party, &["Democrat", "Independent", "R"])
            .unwrap()
    }

    #[test]
    fn aliases_canonicalise() {
        assert_eq!(Categorical::Chamber.canonical_level("senate").as_deref(), Some("Upper"));
        assert_eq!(
            Categorical::Ethnicity.canonical_level("No Hispanic").as_deref(),
            Some("Not Hispanic")
        );
        assert_eq!(Categorical::Party.canonical_level("Green"), None);
        assert_eq!(Categorical::State.canonical_level("Texas").as_deref(), Some("Texas"));
    }

    #[test]
    fn reassignment_applies_overrides_without_touching_original() {
        let t = table();
        let mapping = BTreeMap::from([("b".to_string(), "Democrat".to_string())]);
        let r = t.reassign_party(&mapping).unwrap();
        assert_eq!(r.categorical(Categorical::Party).unwrap().label(1), "Democrat");
        assert_eq!(t.categorical(Categorical::Party).unwrap().label(1), "Independent");
        let independents = r
            .categorical(Categorical::Party)
            .unwrap()
            .codes()
            .iter()
            .filter(|&&c| c == 2)
            .count();
        assert_eq!(independents, 0);
    }

    #[test]
    fn empty_reassignment_is_identity() {
        let t = table();
        assert_eq!(t.reassign_party(&BTreeMap::new()).unwrap(), t);
    }

    #[test]
    fn reassignment_errors() {
        let t = table();
        let bad_level = BTreeMap::from([("a".to_string(), "Green".to_string())]);
        assert!(matches!(
            t.reassign_party(&bad_level),
            Err(AttributeError::UnknownLevel { .. })
        ));
        let bad_node = BTreeMap::from([("zz".to_string(), "Democrat".to_string())]);
        assert!(matches!(
            t.reassign_party(&bad_node),
            Err(AttributeError::UnknownNodeId(_))
        ));
    }

    #[test]
    fn proportions_follow_vocabulary_order() {
        let p = table().categorical(Categorical::Party).unwrap().proportions();
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].0, "Democrat");
        assert!((p.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

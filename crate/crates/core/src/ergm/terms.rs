use serde::{Deserialize, Serialize};

use super::ErgmError;
use crate::graph::BinaryAdjacency;

/// Which endpoint(s) of a tie a node covariate is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Sender,
    Receiver,
    Sum,
}

impl Role {
    fn prefix(self) -> &'static str {
        match self {
            Role::Sender => "nodeocov",
            Role::Receiver => "nodeicov",
            Role::Sum => "nodecov",
        }
    }
}

/// One sufficient statistic of an ERGM.
#[derive(Clone, Debug, PartialEq)]
pub enum ErgmTerm {
    Edges,
    Mutual,
    NodeCovariate {
        name: String,
        values: Vec<f64>,
        role: Role,
    },
    /// Counts ties between nodes sharing a level; `level = Some(l)` restricts
    /// to pairs where both ends carry level `l`.
    NodeMatch {
        name: String,
        labels: Vec<usize>,
        level: Option<(usize, String)>,
    },
    AbsDiff {
        name: String,
        values: Vec<f64>,
    },
}

impl ErgmTerm {
    pub fn node_covariate(name: impl Into<String>, values: Vec<f64>, role: Role) -> Self {
        ErgmTerm::NodeCovariate {
            name: name.into(),
            values,
            role,
        }
    }

    pub fn node_match(name: impl Into<String>, labels: Vec<usize>) -> Self {
        ErgmTerm::NodeMatch {
            name: name.into(),
            labels,
            level: None,
        }
    }

    pub fn node_match_level(
        name: impl Into<String>,
        labels: Vec<usize>,
        level: usize,
        level_name: impl Into<String>,
    ) -> Self {
        ErgmTerm::NodeMatch {
            name: name.into(),
            labels,
            level: Some((level, level_name.into())),
        }
    }

    pub fn abs_diff(name: impl Into<String>, values: Vec<f64>) -> Self {
        ErgmTerm::AbsDiff {
            name: name.into(),
            values,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ErgmTerm::Edges => "edges".into(),
            ErgmTerm::Mutual => "mutual".into(),
            ErgmTerm::NodeCovariate { name, role, .. } => format!("{}.{name}", role.prefix()),
            ErgmTerm::NodeMatch {
                name, level: None, ..
            } => format!("nodematch.{name}"),
            ErgmTerm::NodeMatch {
                name,
                level: Some((_, l)),
                ..
            } => format!("nodematch.{name}.{l}"),
            ErgmTerm::AbsDiff { name, .. } => format!("absdiff.{name}"),
        }
    }

    fn node_len(&self) -> Option<usize> {
        match self {
            ErgmTerm::Edges | ErgmTerm::Mutual => None,
            ErgmTerm::NodeCovariate { values, .. } | ErgmTerm::AbsDiff { values, .. } => {
                Some(values.len())
            }
            ErgmTerm::NodeMatch { labels, .. } => Some(labels.len()),
        }
    }

    /// Contribution of the tie `i -> j` ignoring reciprocity. Zero for `Mutual`.
    #[inline]
    pub(crate) fn dyad_value(&self, i: usize, j: usize) -> f64 {
        match self {
            ErgmTerm::Edges => 1.0,
            ErgmTerm::Mutual => 0.0,
            ErgmTerm::NodeCovariate { values, role, .. } => match role {
                Role::Sender => values[i],
                Role::Receiver => values[j],
                Role::Sum => values[i] + values[j],
            },
            ErgmTerm::NodeMatch { labels, level, .. } => {
                let same = labels[i] == labels[j];
                let hit = match level {
                    None => same,
                    Some((l, _)) => same && labels[i] == *l,
                };
                if hit {
                    1.0
                } else {
                    0.0
                }
            }
            ErgmTerm::AbsDiff { values, .. } => (values[i] - values[j]).abs(),
        }
    }
}

/// Ordered list of terms defining `g(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgmSpec {
    terms: Vec<ErgmTerm>,
    node_count: usize,
    mutual: Option<usize>,
}

impl ErgmSpec {
    /// Validates term count, a single `Edges`, aligned covariates, valid
    /// levels and finite values.
    pub fn new(node_count: usize, terms: Vec<ErgmTerm>) -> Result<Self, ErgmError> {
        if terms.is_empty() {
            return Err(ErgmError::InvalidSpec("a model needs at least one term".into()));
        }
        if node_count < 2 {
            return Err(ErgmError::InvalidSpec("a model needs at least two nodes".into()));
        }
        let count = |pred: fn(&ErgmTerm) -> bool| terms.iter().filter(|t| pred(t)).count();
        if count(|t| matches!(t, ErgmTerm::Edges)) > 1 {
            return Err(ErgmError::InvalidSpec("edges appears more than once".into()));
        }
        if count(|t| matches!(t, ErgmTerm::Mutual)) > 1 {
            return Err(ErgmError::InvalidSpec("mutual appears more than once".into()));
        }
        for t in &terms {
            if let Some(len) = t.node_len() {
                if len != node_count {
                    return Err(ErgmError::CovariateLength {
                        term: t.label(),
                        expected: node_count,
                        found: len,
                    });
                }
            }
            match t {
                ErgmTerm::NodeCovariate { values, .. } | ErgmTerm::AbsDiff { values, .. } => {
                    if values.iter().any(|v| !v.is_finite()) {
                        return Err(ErgmError::InvalidSpec(format!(
                            "{} has a non-finite covariate value",
                            t.label()
                        )));
                    }
                }
                ErgmTerm::NodeMatch {
                    labels,
                    level: Some((l, _)),
                    ..
                } if !labels.contains(l) => {
                    return Err(ErgmError::InvalidSpec(format!(
                        "{} names a level no node carries",
                        t.label()
                    )));
                }
                _ => {}
            }
        }
        let mutual = terms.iter().position(|t| matches!(t, ErgmTerm::Mutual));
        Ok(Self {
            terms,
            node_count,
            mutual,
        })
    }

    pub fn terms(&self) -> &[ErgmTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn labels(&self) -> Vec<String> {
        self.terms.iter().map(ErgmTerm::label).collect()
    }

    /// True when no term couples the two ties of a dyad.
    pub fn dyad_independent(&self) -> bool {
        self.mutual.is_none()
    }

    pub(crate) fn mutual_index(&self) -> Option<usize> {
        self.mutual
    }

    /// Writes the reciprocity-free change statistic of `i -> j` into `out`.
    #[inline]
    pub(crate) fn dyad_vector(&self, i: usize, j: usize, out: &mut [f64]) {
        for (o, t) in out.iter_mut().zip(&self.terms) {
            *o = t.dyad_value(i, j);
        }
    }

    fn check_graph(&self, y: &BinaryAdjacency) -> Result<(), ErgmError> {
        if y.node_count() != self.node_count {
            return Err(ErgmError::CovariateLength {
                term: "graph".into(),
                expected: self.node_count,
                found: y.node_count(),
            });
        }
        Ok(())
    }
}

/// `g(y)` for the observed adjacency.
pub fn global_statistics(y: &BinaryAdjacency, spec: &ErgmSpec) -> Result<Vec<f64>, ErgmError> {
    spec.check_graph(y)?;
    let k = spec.len();
    let mut g = vec![0.0; k];
    let mut d = vec![0.0; k];
    for (i, j) in y.pairs() {
        spec.dyad_vector(i, j, &mut d);
        for (a, b) in g.iter_mut().zip(&d) {
            *a += b;
        }
        if let Some(m) = spec.mutual_index() {
            if i < j && y.get(j, i) {
                g[m] += 1.0;
            }
        }
    }
    Ok(g)
}

/// `g(y with y_ij = 1) - g(y with y_ij = 0)`.
pub fn change_statistics(
    y: &BinaryAdjacency,
    spec: &ErgmSpec,
    i: usize,
    j: usize,
) -> Result<Vec<f64>, ErgmError> {
    spec.check_graph(y)?;
    if i == j {
        return Err(ErgmError::SelfPair(i));
    }
    let mut d = vec![0.0; spec.len()];
    change_into(y, spec, i, j, &mut d);
    Ok(d)
}

#[inline]
pub(crate) fn change_into(y: &BinaryAdjacency, spec: &ErgmSpec, i: usize, j: usize, out: &mut [f64]) {
    spec.dyad_vector(i, j, out);
    if let Some(m) = spec.mutual_index() {
        out[m] = y.value(j, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec_for(n: usize, seed: &[f64], labels: &[usize]) -> ErgmSpec {
        ErgmSpec::new(
            n,
            vec![
                ErgmTerm::Edges,
                ErgmTerm::Mutual,
                ErgmTerm::node_covariate("x", seed.to_vec(), Role::Sender),
                ErgmTerm::node_covariate("x", seed.to_vec(), Role::Receiver),
                ErgmTerm::node_covariate("x", seed.to_vec(), Role::Sum),
                ErgmTerm::node_match("c", labels.to_vec()),
                ErgmTerm::node_match_level("c", labels.to_vec(), labels[0], "first"),
                ErgmTerm::abs_diff("x", seed.to_vec()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_cycle_counts() {
        let y = BinaryAdjacency::from_pairs(2, [(0, 1), (1, 0)]);
        let spec = ErgmSpec::new(2, vec![ErgmTerm::Edges, ErgmTerm::Mutual]).unwrap();
        assert_eq!(global_statistics(&y, &spec).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn mutual_change_reads_reverse_tie() {
        let spec = ErgmSpec::new(3, vec![ErgmTerm::Mutual]).unwrap();
        let y = BinaryAdjacency::from_pairs(3, [(1, 0)]);
        assert_eq!(change_statistics(&y, &spec, 0, 1).unwrap(), vec![1.0]);
        assert_eq!(change_statistics(&y, &spec, 0, 2).unwrap(), vec![0.0]);
        assert!(matches!(change_statistics(&y, &spec, 1, 1), Err(ErgmError::SelfPair(1))));
    }

    #[test]
    fn spec_validation() {
        assert!(ErgmSpec::new(3, vec![]).is_err());
        assert!(ErgmSpec::new(3, vec![ErgmTerm::Edges, ErgmTerm::Edges]).is_err());
        assert!(ErgmSpec::new(3, vec![ErgmTerm::abs_diff("a", vec![1.0])]).is_err());
        assert!(ErgmSpec::new(3, vec![ErgmTerm::node_match_level("a", vec![0, 0, 1], 2, "z")]).is_err());
        let spec = ErgmSpec::new(3, vec![ErgmTerm::Edges]).unwrap();
        assert!(spec.dyad_independent());
        assert_eq!(spec.labels(), vec!["edges"]);
    }

    fn small_case() -> impl Strategy<Value = (usize, Vec<bool>, Vec<f64>, Vec<usize>)> {
        (2usize..=6).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), n * n),
                proptest::collection::vec(-3.0f64..3.0, n),
                proptest::collection::vec(0usize..3, n),
            )
        })
    }

    proptest! {
        #[test]
        fn change_statistics_match_recomputation((n, bits, x, labels) in small_case()) {
            let y = BinaryAdjacency::from_pairs(
                n,
                (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j && bits[i * n + j]),
            );
            let spec = spec_for(n, &x, &labels);
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let mut plus = y.clone();
                    plus.set(i, j, true);
                    let mut minus = y.clone();
                    minus.set(i, j, false);
                    let gp = global_statistics(&plus, &spec).unwrap();
                    let gm = global_statistics(&minus, &spec).unwrap();
                    let d = change_statistics(&y, &spec, i, j).unwrap();
                    for k in 0..spec.len() {
                        prop_assert!((gp[k] - gm[k] - d[k]).abs() < 1e-12);
                    }
                }
            }
            // Adding the ties one at a time telescopes to g(y).
            let mut built = BinaryAdjacency::empty(n);
            let mut total = vec![0.0; spec.len()];
            for (i, j) in y.pairs() {
                let d = change_statistics(&built, &spec, i, j).unwrap();
                total.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
                built.set(i, j, true);
            }
            let g = global_statistics(&y, &spec).unwrap();
            for k in 0..spec.len() {
                prop_assert!((total[k] - g[k]).abs() < 1e-9);
            }
        }
    }
}

//! Hard partitions of the node set and agreement scores between two of them.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::CategoricalColumn;
use crate::numeric::{fmt_float, xlogy};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition of zero nodes")]
    Empty,
    #[error("class labels must be 0..Q with every class non-empty")]
    NotCompact,
    #[error("partitions cover different node counts ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Assignment of each node to one of `Q` non-empty classes `0..Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = PartitionError;

    fn try_from(labels: Vec<usize>) -> Result<Self, Self::Error> {
        Partition::new(labels)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.labels
    }
}

impl Partition {
    /// Labels must already be compact.
    pub fn new(labels: Vec<usize>) -> Result<Self, PartitionError> {
        if labels.is_empty() {
            return Err(PartitionError::Empty);
        }
        let q = labels.iter().copied().max().unwrap_or(0) + 1;
        let mut sizes = vec![0; q];
        for &l in &labels {
            sizes[l] += 1;
        }
        if sizes.contains(&0) {
            return Err(PartitionError::NotCompact);
        }
        Ok(Self { labels, sizes })
    }

    /// Classes numbered by first appearance of each distinct key.
    pub fn from_keys<K: Eq + Hash>(keys: impl IntoIterator<Item = K>) -> Result<Self, PartitionError> {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let labels = keys
            .into_iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Self::new(labels)
    }

    pub fn from_categorical(column: &CategoricalColumn) -> Result<Self, PartitionError> {
        Self::from_keys(column.codes().iter().copied())
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }
}

/// Counts `n_kl` of nodes in class `k` of the first and `l` of the second
/// partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    pub fn new(a: &Partition, b: &Partition) -> Result<Self, PartitionError> {
        if a.len() != b.len() {
            return Err(PartitionError::LengthMismatch(a.len(), b.len()));
        }
        let mut counts = vec![vec![0u64; b.class_count()]; a.class_count()];
        for (&x, &y) in a.labels().iter().zip(b.labels()) {
            counts[x][y] += 1;
        }
        Ok(Self {
            rows: a.sizes().iter().map(|&s| s as u64).collect(),
            cols: b.sizes().iter().map(|&s| s as u64).collect(),
            n: a.len() as u64,
            counts,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.rows
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.cols
    }

    pub fn total(&self) -> u64 {
        self.n
    }

    /// `(pairs together in both, together in first only, together in second
    /// only, total pairs)`.
    fn pair_counts(&self) -> (f64, f64, f64, f64) {
        let c2 = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
        let both: f64 = self.counts.iter().flatten().map(|&x| c2(x)).sum();
        let first: f64 = self.rows.iter().map(|&x| c2(x)).sum();
        let second: f64 = self.cols.iter().map(|&x| c2(x)).sum();
        (both, first, second, c2(self.n))
    }
}

/// Fraction of node pairs on which the partitions agree (together in both or
/// apart in both). One for fewer than two nodes.
pub fn rand_index(a: &Partition, b: &Partition) -> Result<f64, PartitionError> {
    let t = ContingencyTable::new(a, b)?;
    let (both, first, second, total) = t.pair_counts();
    if total == 0.0 {
        return Ok(1.0);
    }
    Ok((total + 2.0 * both - first - second) / total)
}

/// Hubert–Arabie adjusted Rand index. When the chance-corrected
/// denominator vanishes (both partitions single-class, or both all
/// singletons) the partitions coincide and the index is one.
pub fn adjusted_rand(a: &Partition, b: &Partition) -> Result<f64, PartitionError> {
    let t = ContingencyTable::new(a, b)?;
    let (both, first, second, total) = t.pair_counts();
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = first * second / total;
    let max = 0.5 * (first + second);
    if max == expected {
        return Ok(1.0);
    }
    Ok((both - expected) / (max - expected))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NmiNormalization {
    /// `2 I / (H(A) + H(B))`.
    #[default]
    Arithmetic,
    /// `I / sqrt(H(A) H(B))`.
    Geometric,
    /// `I / max(H(A), H(B))`.
    Max,
    /// `I / min(H(A), H(B))`.
    Min,
}

/// Normalised mutual information with the arithmetic-mean normaliser.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64, PartitionError> {
    nmi_with(a, b, NmiNormalization::Arithmetic)
}

/// Normalised mutual information. Both partitions single-class gives one by
/// convention; exactly one single-class side gives zero.
pub fn nmi_with(a: &Partition, b: &Partition, norm: NmiNormalization) -> Result<f64, PartitionError> {
    let t = ContingencyTable::new(a, b)?;
    let n = t.total() as f64;
    let entropy = |sizes: &[u64]| -> f64 { -sizes.iter().map(|&s| xlogy(s as f64 / n, s as f64 / n)).sum::<f64>() };
    let ha = entropy(t.row_sums());
    let hb = entropy(t.col_sums());
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (k, row) in t.counts().iter().enumerate() {
        for (l, &c) in row.iter().enumerate() {
            if c > 0 {
                let p = c as f64 / n;
                let pa = t.row_sums()[k] as f64 / n;
                let pb = t.col_sums()[l] as f64 / n;
                mi += p * (p / (pa * pb)).ln();
            }
        }
    }
    let denom = match norm {
        NmiNormalization::Arithmetic => 0.5 * (ha + hb),
        NmiNormalization::Geometric => (ha * hb).sqrt(),
        NmiNormalization::Max => ha.max(hb),
        NmiNormalization::Min => ha.min(hb),
    };
    Ok((mi / denom).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionScores {
    pub rand: f64,
    pub adjusted_rand: f64,
    pub nmi: f64,
}

pub fn score(a: &Partition, b: &Partition, norm: NmiNormalization) -> Result<PartitionScores, PartitionError> {
    Ok(PartitionScores {
        rand: rand_index(a, b)?,
        adjusted_rand: adjusted_rand(a, b)?,
        nmi: nmi_with(a, b, norm)?,
    })
}

/// Scores of one reference partition against several named partitions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub columns: Vec<(String, PartitionScores)>,
}

impl ScoreTable {
    pub fn get(&self, name: &str) -> Option<&PartitionScores> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Metric rows by attribute columns.
    pub fn write_csv<W: std::io::Write>(&self, mut sink: W) -> std::io::Result<()> {
        write!(sink, "metric")?;
        for (name, _) in &self.columns {
            write!(sink, ",{name}")?;
        }
        writeln!(sink)?;
        let rows: [(&str, fn(&PartitionScores) -> f64); 3] = [
            ("rand", |s| s.rand),
            ("adjusted_rand", |s| s.adjusted_rand),
            ("nmi", |s| s.nmi),
        ];
        for (metric, get) in rows {
            write!(sink, "{metric}")?;
            for (_, s) in &self.columns {
                write!(sink, ",{}", fmt_float(get(s)))?;
            }
            writeln!(sink)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn p(labels: &[usize]) -> Partition {
        Partition::from_keys(labels.iter().copied()).unwrap()
    }

    #[test]
    fn construction() {
        assert_eq!(Partition::new(vec![]), Err(PartitionError::Empty));
        assert_eq!(Partition::new(vec![0, 2]), Err(PartitionError::NotCompact));
        let q = p(&[7, 7, 3, 9]);
        assert_eq!(q.labels(), &[0, 0, 1, 2]);
        assert_eq!(q.sizes(), &[2, 1, 1]);
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, "[0,0,1,2]");
        assert!(serde_json::from_str::<Partition>("[0,2]").is_err());
    }

    #[test]
    fn four_node_example() {
        let a = p(&[0, 0, 1, 1]);
        let b = p(&[0, 1, 0, 1]);
        assert!((rand_index(&a, &b).unwrap() - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(rand_index(&a, &a).unwrap(), 1.0);
        assert_eq!(adjusted_rand(&a, &a).unwrap(), 1.0);
        assert!((nmi(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!(rand_index(&a, &p(&[0, 1])).is_err());
    }

    #[test]
    fn single_class_conventions() {
        let one = p(&[0, 0, 0, 0]);
        let multi = p(&[0, 1, 1, 2]);
        assert_eq!(adjusted_rand(&one, &one).unwrap(), 1.0);
        assert_eq!(nmi(&one, &one).unwrap(), 1.0);
        assert_eq!(nmi(&multi, &one).unwrap(), 0.0);
        for norm in [NmiNormalization::Geometric, NmiNormalization::Max, NmiNormalization::Min] {
            assert_eq!(nmi_with(&one, &multi, norm).unwrap(), 0.0);
        }
    }

    #[test]
    fn independent_random_partitions_have_near_zero_ari() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 2000;
        for _ in 0..100 {
            let a: Vec<usize> = (0..n).map(|_| rng.gen_range(0..5)).collect();
            let b: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let ari = adjusted_rand(&p(&a), &p(&b)).unwrap();
            assert!(ari.abs() < 0.05, "{ari}");
        }
    }

    /// Every set partition of `n` elements as a restricted growth string.
    fn all_partitions(n: usize) -> Vec<Vec<usize>> {
        fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
            if prefix.len() == n {
                out.push(prefix.clone());
                return;
            }
            for l in 0..=max + 1 {
                prefix.push(l);
                grow(prefix, max.max(l), n, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        let mut prefix = vec![0];
        grow(&mut prefix, 0, n, &mut out);
        out
    }

    /// Pair-level scores by direct enumeration of node pairs and of the joint
    /// label distribution.
    fn brute(a: &[usize], b: &[usize]) -> (f64, f64, f64) {
        let n = a.len();
        let (mut ss, mut sd, mut ds, mut dd) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                match (a[i] == a[j], b[i] == b[j]) {
                    (true, true) => ss += 1.0,
                    (true, false) => sd += 1.0,
                    (false, true) => ds += 1.0,
                    (false, false) => dd += 1.0,
                }
            }
        }
        let total = ss + sd + ds + dd;
        let rand = if total == 0.0 { 1.0 } else { (ss + dd) / total };
        let denom = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
        let ari = if denom == 0.0 { 1.0 } else { 2.0 * (ss * dd - sd * ds) / denom };

        let nf = n as f64;
        let frac = |f: &dyn Fn(usize) -> bool| (0..n).filter(|&i| f(i)).count() as f64 / nf;
        let h = |x: &[usize]| {
            let mut seen = x.to_vec();
            seen.sort();
            seen.dedup();
            -seen.iter().map(|&v| {
                let q = frac(&|i| x[i] == v);
                q * q.ln()
            }).sum::<f64>()
        };
        let (ha, hb) = (h(a), h(b));
        let mut mi = 0.0;
        for &x in a.iter().collect::<std::collections::BTreeSet<_>>() {
            for &y in b.iter().collect::<std::collections::BTreeSet<_>>() {
                let pxy = frac(&|i| a[i] == x && b[i] == y);
                if pxy > 0.0 {
                    mi += pxy * (pxy / (frac(&|i| a[i] == x) * frac(&|i| b[i] == y))).ln();
                }
            }
        }
        let nmi = match (ha == 0.0, hb == 0.0) {
            (true, true) => 1.0,
            (true, false) | (false, true) => 0.0,
            _ => 2.0 * mi / (ha + hb),
        };
        (rand, ari, nmi)
    }

    #[test]
    fn brute_force_on_all_small_partitions() {
        for n in 1..=6 {
            let parts = all_partitions(n);
            for a in &parts {
                for b in &parts {
                    let (pa, pb) = (p(a), p(b));
                    let (r, ari, nm) = brute(a, b);
                    assert!((rand_index(&pa, &pb).unwrap() - r).abs() < 1e-12);
                    assert!((adjusted_rand(&pa, &pb).unwrap() - ari).abs() < 1e-12, "{a:?} {b:?}");
                    assert!((nmi(&pa, &pb).unwrap() - nm).abs() < 1e-12, "{a:?} {b:?}");
                    assert_eq!(adjusted_rand(&pa, &pb).unwrap() == 1.0, a == b);
                }
            }
        }
    }

    fn labelled() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>)> {
        (1usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec(0usize..5, n),
                proptest::collection::vec(0usize..4, n),
                Just((0..5).rev().collect::<Vec<usize>>()),
            )
        })
    }

    proptest! {
        #[test]
        fn symmetry_bounds_and_relabelling((a, b, perm) in labelled()) {
            let (pa, pb) = (p(&a), p(&b));
            let relabelled: Vec<usize> = a.iter().map(|&x| perm[x]).collect();
            let pr = p(&relabelled);
            for norm in [NmiNormalization::Arithmetic, NmiNormalization::Geometric, NmiNormalization::Max, NmiNormalization::Min] {
                let s = score(&pa, &pb, norm).unwrap();
                let t = score(&pb, &pa, norm).unwrap();
                let u = score(&pr, &pb, norm).unwrap();
                prop_assert!((s.rand - t.rand).abs() < 1e-12);
                prop_assert!((s.adjusted_rand - t.adjusted_rand).abs() < 1e-12);
                prop_assert!((s.nmi - t.nmi).abs() < 1e-12);
                prop_assert!((s.rand - u.rand).abs() < 1e-12);
                prop_assert!((s.adjusted_rand - u.adjusted_rand).abs() < 1e-12);
                prop_assert!((s.nmi - u.nmi).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&s.rand));
                prop_assert!((0.0..=1.0).contains(&s.nmi));
                prop_assert!(s.adjusted_rand <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn score_table_csv() {
        let a = p(&[0, 0, 1, 1]);
        let table = ScoreTable {
            columns: vec![("party".into(), score(&a, &a, NmiNormalization::Arithmetic).unwrap())],
        };
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "metric,party\nrand,1\nadjusted_rand,1\nnmi,1\n");
    }
}

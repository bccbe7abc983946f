//! Directed Bernoulli stochastic block model fitted by variational EM, with
//! classification-ICL selection of the number of communities.
//!
//! Self-pairs never enter the likelihood. The E-step updates one
//! responsibility row at a time against the current values of all other
//! rows; each row update is the exact maximiser of the lower bound in that
//! row, so together with the closed-form M-step the bound never decreases.

mod init;
mod summary;

use std::ops::RangeInclusive;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BinaryAdjacency, Graph};
use crate::numeric::{fmt_float, lenient_float, xlogy};
use crate::partition::Partition;
use init::SpectralEmbedding;

pub use summary::{
    community_summary, interaction_matrix, CommunityAnnotation, CommunityRow, CommunitySummary,
    DominantLevel, InteractionMatrix, MetricSummary,
};

/// Classes whose total responsibility falls below this are removed.
pub const PRUNE_MASS: f64 = 1e-8;
/// Block probabilities used inside logarithms are kept this far from 0 and 1.
const PI_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SbmError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("number of communities {q} outside 1..={n}")]
    InvalidQ { q: usize, n: usize },
    #[error("empty community range")]
    EmptyRange,
    #[error("invalid control: {0}")]
    InvalidControl(String),
    #[error("invalid responsibilities: {0}")]
    InvalidTau(String),
    #[error("node data covers {found} nodes, expected {expected}")]
    Misaligned { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SbmInit {
    /// First restart from k-means on the spectral embedding, the rest random.
    #[default]
    Spectral,
    /// Every restart from random responsibilities.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SbmControl {
    pub init: SbmInit,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// EM stops once the bound gains less than `tol * max(1, |bound|)`.
    pub tol: f64,
}

impl Default for SbmControl {
    fn default() -> Self {
        Self {
            init: SbmInit::Spectral,
            restarts: 10,
            seed: 0,
            max_iter: 500,
            tol: 1e-10,
        }
    }
}

impl SbmControl {
    fn validate(&self) -> Result<(), SbmError> {
        if self.restarts == 0 {
            return Err(SbmError::InvalidControl("restarts must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(SbmError::InvalidControl("max_iter must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(SbmError::InvalidControl("tol must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// A fitted block model. Communities are numbered by decreasing size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmFit {
    /// Number of communities after pruning; may be below the requested count.
    pub q: usize,
    /// `n x q` responsibilities, rows on the simplex.
    pub tau: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    /// `pi[q][r]`: probability of a tie from community `q` to community `r`.
    pub pi: Vec<Vec<f64>>,
    pub labels: Partition,
    #[serde(with = "lenient_float")]
    pub icl: f64,
    #[serde(with = "lenient_float")]
    pub elbo: f64,
    #[serde(with = "lenient_float::vec")]
    pub elbo_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Classes removed for vanishing responsibility or no hard members.
    pub pruned: usize,
    pub restart: usize,
}

impl SbmFit {
    /// `node_id,community` with communities numbered from 1.
    pub fn write_membership_csv<W: std::io::Write>(&self, graph: &Graph, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "node_id,community")?;
        for (i, &l) in self.labels.labels().iter().enumerate() {
            writeln!(sink, "{},{}", crate::topology::csv_field(graph.node_id(i)), l + 1)?;
        }
        Ok(())
    }

    /// Block matrix with a header row of target communities.
    pub fn write_pi_csv<W: std::io::Write>(&self, mut sink: W) -> std::io::Result<()> {
        write!(sink, "community")?;
        for r in 1..=self.q {
            write!(sink, ",{r}")?;
        }
        writeln!(sink)?;
        for (q, row) in self.pi.iter().enumerate() {
            write!(sink, "{}", q + 1)?;
            for &p in row {
                write!(sink, ",{}", fmt_float(p))?;
            }
            writeln!(sink)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IclPoint {
    pub requested_q: usize,
    pub q: usize,
    #[serde(with = "lenient_float")]
    pub icl: f64,
    #[serde(with = "lenient_float")]
    pub elbo: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSelection {
    pub best: SbmFit,
    pub curve: Vec<IclPoint>,
}

impl QSelection {
    pub fn write_curve_csv<W: std::io::Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "q,effective_q,icl,elbo")?;
        for p in &self.curve {
            writeln!(sink, "{},{},{},{}", p.requested_q, p.q, fmt_float(p.icl), fmt_float(p.elbo))?;
        }
        Ok(())
    }
}

struct Problem {
    n: usize,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    y: BinaryAdjacency,
    embedding: OnceLock<SpectralEmbedding>,
}

impl Problem {
    fn new(y: &BinaryAdjacency) -> Result<Self, SbmError> {
        if y.node_count() == 0 {
            return Err(SbmError::EmptyGraph);
        }
        Ok(Self {
            n: y.node_count(),
            out: y.out_lists(),
            inn: y.in_lists(),
            y: y.clone(),
            embedding: OnceLock::new(),
        })
    }

    fn check_q(&self, q: usize) -> Result<(), SbmError> {
        if q == 0 || q > self.n {
            return Err(SbmError::InvalidQ { q, n: self.n });
        }
        Ok(())
    }

    fn embedding(&self) -> &SpectralEmbedding {
        self.embedding.get_or_init(|| SpectralEmbedding::new(&self.y))
    }
}

/// Closed-form M-step quantities for flat `n x q` responsibilities.
struct Params {
    alpha: Vec<f64>,
    pi: Vec<f64>,
    log_pi: Vec<f64>,
    log_1m_pi: Vec<f64>,
    /// Expected tie counts and pair counts per ordered block pair.
    ties: Vec<f64>,
    pairs: Vec<f64>,
}

fn m_step(p: &Problem, tau: &[f64], q: usize) -> Params {
    let mut mass = vec![0.0; q];
    let mut ties = vec![0.0; q * q];
    let mut self_pairs = vec![0.0; q * q];
    let mut out_mass = vec![0.0; q];
    for i in 0..p.n {
        let ti = &tau[i * q..(i + 1) * q];
        out_mass.iter_mut().for_each(|x| *x = 0.0);
        for &j in &p.out[i] {
            out_mass.iter_mut().zip(&tau[j * q..(j + 1) * q]).for_each(|(o, t)| *o += t);
        }
        for a in 0..q {
            mass[a] += ti[a];
            for b in 0..q {
                ties[a * q + b] += ti[a] * out_mass[b];
                self_pairs[a * q + b] += ti[a] * ti[b];
            }
        }
    }
    let mut pairs = vec![0.0; q * q];
    let mut pi = vec![0.0; q * q];
    for a in 0..q {
        for b in 0..q {
            let k = a * q + b;
            pairs[k] = (mass[a] * mass[b] - self_pairs[k]).max(0.0);
            ties[k] = ties[k].min(pairs[k]);
            pi[k] = if pairs[k] > 0.0 { ties[k] / pairs[k] } else { 0.0 };
        }
    }
    let clamped = |x: f64| x.clamp(PI_FLOOR, 1.0 - PI_FLOOR);
    Params {
        alpha: mass.iter().map(|m| m / p.n as f64).collect(),
        log_pi: pi.iter().map(|&x| clamped(x).ln()).collect(),
        log_1m_pi: pi.iter().map(|&x| (1.0 - clamped(x)).ln()).collect(),
        pi,
        ties,
        pairs,
    }
}

fn elbo(tau: &[f64], q: usize, params: &Params) -> f64 {
    let mut value = 0.0;
    for row in tau.chunks(q) {
        for (t, a) in row.iter().zip(&params.alpha) {
            value += xlogy(*t, *a) - xlogy(*t, *t);
        }
    }
    for k in 0..q * q {
        value += params.ties[k] * params.log_pi[k] + (params.pairs[k] - params.ties[k]) * params.log_1m_pi[k];
    }
    value
}

/// One Gauss–Seidel sweep over responsibility rows.
fn e_step(p: &Problem, tau: &mut [f64], q: usize, params: &Params) {
    let mut mass = vec![0.0; q];
    for row in tau.chunks(q) {
        mass.iter_mut().zip(row).for_each(|(m, t)| *m += t);
    }
    // Non-tie contribution per ordered block pair in both directions, and the
    // extra log-odds carried by an observed tie.
    let mut absent = vec![0.0; q * q];
    let mut gain = vec![0.0; q * q];
    for a in 0..q {
        for b in 0..q {
            absent[a * q + b] = params.log_1m_pi[a * q + b] + params.log_1m_pi[b * q + a];
            gain[a * q + b] = params.log_pi[a * q + b] - params.log_1m_pi[a * q + b];
        }
    }
    let log_alpha: Vec<f64> = params.alpha.iter().map(|a| a.ln()).collect();
    let mut out_mass = vec![0.0; q];
    let mut in_mass = vec![0.0; q];
    let mut score = vec![0.0; q];
    for i in 0..p.n {
        for (m, t) in mass.iter_mut().zip(&tau[i * q..(i + 1) * q]) {
            *m -= t;
        }
        out_mass.iter_mut().for_each(|x| *x = 0.0);
        in_mass.iter_mut().for_each(|x| *x = 0.0);
        for &j in &p.out[i] {
            out_mass.iter_mut().zip(&tau[j * q..(j + 1) * q]).for_each(|(o, t)| *o += t);
        }
        for &j in &p.inn[i] {
            in_mass.iter_mut().zip(&tau[j * q..(j + 1) * q]).for_each(|(o, t)| *o += t);
        }
        for a in 0..q {
            let mut s = log_alpha[a];
            for b in 0..q {
                s += mass[b] * absent[a * q + b] + out_mass[b] * gain[a * q + b] + in_mass[b] * gain[b * q + a];
            }
            score[a] = s;
        }
        let top = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let row = &mut tau[i * q..(i + 1) * q];
        let mut total = 0.0;
        for (t, s) in row.iter_mut().zip(&score) {
            *t = (s - top).exp();
            total += *t;
        }
        row.iter_mut().for_each(|t| *t /= total);
        for (m, t) in mass.iter_mut().zip(row.iter()) {
            *m += t;
        }
    }
}

/// Drops the columns not flagged in `keep` and renormalises rows.
fn drop_columns(tau: &[f64], q: usize, keep: &[bool]) -> (Vec<f64>, usize) {
    let kept = keep.iter().filter(|&&k| k).count();
    let mut out = Vec::with_capacity(tau.len() / q * kept);
    for row in tau.chunks(q) {
        let start = out.len();
        out.extend(row.iter().zip(keep).filter(|(_, &k)| k).map(|(t, _)| *t));
        let s: f64 = out[start..].iter().sum();
        if s > 0.0 {
            out[start..].iter_mut().for_each(|t| *t /= s);
        } else {
            out[start..].iter_mut().for_each(|t| *t = 1.0 / kept as f64);
        }
    }
    (out, kept)
}

fn prune(tau: &mut Vec<f64>, q: &mut usize) -> usize {
    let mut mass = vec![0.0; *q];
    for row in tau.chunks(*q) {
        mass.iter_mut().zip(row).for_each(|(m, t)| *m += t);
    }
    let keep: Vec<bool> = mass.iter().map(|&m| m >= PRUNE_MASS).collect();
    let removed = keep.iter().filter(|&&k| !k).count();
    if removed > 0 && removed < *q {
        log::warn!("pruning {removed} empty block(s) from a {}-block fit", *q);
        let (t, k) = drop_columns(tau, *q, &keep);
        *tau = t;
        *q = k;
        removed
    } else {
        0
    }
}

fn hard_labels(tau: &[f64], q: usize) -> Vec<usize> {
    tau.chunks(q)
        .map(|row| {
            let mut best = 0;
            for (k, &t) in row.iter().enumerate() {
                if t > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

fn run_em(p: &Problem, mut tau: Vec<f64>, mut q: usize, control: &SbmControl, restart: usize) -> SbmFit {
    let mut pruned = prune(&mut tau, &mut q);
    let mut params = m_step(p, &tau, q);
    let mut trace = vec![elbo(&tau, q, &params)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < control.max_iter {
        iterations += 1;
        e_step(p, &mut tau, q, &params);
        pruned += prune(&mut tau, &mut q);
        params = m_step(p, &tau, q);
        let value = elbo(&tau, q, &params);
        let previous = *trace.last().expect("trace starts non-empty");
        trace.push(value);
        if value - previous <= control.tol * value.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    // Classes that own no node under the hard assignment are dropped so the
    // reported partition has exactly `q` non-empty classes.
    let labels = hard_labels(&tau, q);
    let mut sizes = vec![0usize; q];
    labels.iter().for_each(|&l| sizes[l] += 1);
    if sizes.contains(&0) {
        let keep: Vec<bool> = sizes.iter().map(|&s| s > 0).collect();
        pruned += keep.iter().filter(|&&k| !k).count();
        let (t, k) = drop_columns(&tau, q, &keep);
        tau = t;
        q = k;
        params = m_step(p, &tau, q);
    }
    let value = elbo(&tau, q, &params);
    let labels = hard_labels(&tau, q);
    let mut sizes = vec![0usize; q];
    labels.iter().for_each(|&l| sizes[l] += 1);

    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut rank = vec![0; q];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let labels: Vec<usize> = labels.iter().map(|&l| rank[l]).collect();
    // Empty hard classes were dropped above, so labels are compact unless a
    // row tie left a class without members; fall back to compacting.
    let partition = Partition::new(labels.clone()).unwrap_or_else(|_| {
        Partition::from_keys(labels.iter().copied()).expect("non-empty graph")
    });
    let icl_value = icl(&p.y, &partition);
    SbmFit {
        q,
        tau: tau
            .chunks(q)
            .map(|row| order.iter().map(|&o| row[o]).collect())
            .collect(),
        alpha: order.iter().map(|&o| params.alpha[o]).collect(),
        pi: order
            .iter()
            .map(|&a| order.iter().map(|&b| params.pi[a * q + b]).collect())
            .collect(),
        labels: partition,
        icl: icl_value,
        elbo: value,
        elbo_trace: trace,
        iterations,
        converged,
        pruned,
        restart,
    }
}

fn restart_rng(seed: u64, q: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((q as u64) << 32) | restart as u64);
    rng
}

fn fit_in(p: &Problem, q: usize, control: &SbmControl) -> SbmFit {
    let restarts = if q == 1 { 1 } else { control.restarts };
    let fits: Vec<SbmFit> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(control.seed, q, r);
            let tau = if q == 1 {
                vec![1.0; p.n]
            } else if r == 0 && control.init == SbmInit::Spectral {
                init::one_hot(&p.embedding().labels(q, &mut rng), q)
            } else {
                init::random_tau(p.n, q, &mut rng)
            };
            run_em(p, tau, q, control, r)
        })
        .collect();
    fits.into_iter()
        .reduce(|best, f| if f.elbo > best.elbo { f } else { best })
        .expect("at least one restart")
}

/// Best of `control.restarts` variational EM runs with `q` communities,
/// ranked by the final lower bound.
pub fn fit_q(y: &BinaryAdjacency, q: usize, control: &SbmControl) -> Result<SbmFit, SbmError> {
    control.validate()?;
    let p = Problem::new(y)?;
    p.check_q(q)?;
    Ok(fit_in(&p, q, control))
}

/// A single EM run from caller-supplied responsibilities.
pub fn fit_from_tau(y: &BinaryAdjacency, tau: &[Vec<f64>], control: &SbmControl) -> Result<SbmFit, SbmError> {
    control.validate()?;
    let p = Problem::new(y)?;
    if tau.len() != p.n {
        return Err(SbmError::InvalidTau(format!("{} rows for {} nodes", tau.len(), p.n)));
    }
    let q = tau[0].len();
    p.check_q(q)?;
    for (i, row) in tau.iter().enumerate() {
        if row.len() != q {
            return Err(SbmError::InvalidTau(format!("row {i} has {} columns, expected {q}", row.len())));
        }
        if row.iter().any(|&t| !(t >= 0.0 && t.is_finite())) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(SbmError::InvalidTau(format!("row {i} is not on the simplex")));
        }
    }
    Ok(run_em(&p, tau.concat(), q, control, 0))
}

/// Classification ICL of a hard partition: completed-data log-likelihood at
/// the block densities and class shares re-estimated from the partition,
/// minus `(Q^2/2) ln(n(n-1))` for the block matrix and `((Q-1)/2) ln n` for
/// the shares.
pub fn icl(y: &BinaryAdjacency, labels: &Partition) -> f64 {
    let n = y.node_count();
    let q = labels.class_count();
    let l = labels.labels();
    let mut ties = vec![0.0; q * q];
    for (i, j) in y.pairs() {
        ties[l[i] * q + l[j]] += 1.0;
    }
    let sizes = labels.sizes();
    let mut value = 0.0;
    for a in 0..q {
        for b in 0..q {
            let pairs = (sizes[a] * sizes[b] - if a == b { sizes[a] } else { 0 }) as f64;
            if pairs > 0.0 {
                let e = ties[a * q + b];
                value += xlogy(e, e / pairs) + xlogy(pairs - e, (pairs - e) / pairs);
            }
        }
    }
    let nf = n as f64;
    value += sizes.iter().map(|&s| xlogy(s as f64, s as f64 / nf)).sum::<f64>();
    let ordered_pairs = ((n * n.saturating_sub(1)) as f64).max(1.0);
    let qf = q as f64;
    value - 0.5 * qf * qf * ordered_pairs.ln() - 0.5 * (qf - 1.0) * nf.ln()
}

/// Fits every `q` in `range` and returns the ICL-maximising fit (smallest `q`
/// on ties) together with the whole curve.
pub fn select_q(y: &BinaryAdjacency, range: RangeInclusive<usize>, control: &SbmControl) -> Result<QSelection, SbmError> {
    control.validate()?;
    if range.is_empty() {
        return Err(SbmError::EmptyRange);
    }
    let p = Problem::new(y)?;
    p.check_q(*range.start())?;
    p.check_q(*range.end())?;
    if *range.end() > 1 && control.init == SbmInit::Spectral {
        p.embedding();
    }
    let fits: Vec<(usize, SbmFit)> = range.into_par_iter().map(|q| (q, fit_in(&p, q, control))).collect();
    let curve = fits
        .iter()
        .map(|(rq, f)| IclPoint {
            requested_q: *rq,
            q: f.q,
            icl: f.icl,
            elbo: f.elbo,
        })
        .collect();
    let best = fits
        .into_iter()
        .map(|(_, f)| f)
        .reduce(|best, f| if f.icl > best.icl { f } else { best })
        .expect("non-empty range");
    Ok(QSelection { best, curve })
}


#[cfg(test)]
mod tests {
    use super::test_support::planted;
    use super::*;
    use crate::partition::adjusted_rand;
    use proptest::prelude::*;

    fn quick(restarts: usize, seed: u64) -> SbmControl {
        SbmControl {
            restarts,
            seed,
            ..SbmControl::default()
        }
    }

    fn check_simplex(fit: &SbmFit) {
        for row in &fit.tau {
            assert_eq!(row.len(), fit.q);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!((fit.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(fit.pi.iter().flatten().all(|p| (0.0..=1.0).contains(p)));
        assert_eq!(fit.labels.sizes().iter().sum::<usize>(), fit.tau.len());
    }

    fn check_monotone(trace: &[f64]) {
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-7 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn single_block_closed_forms() {
        let (y, _) = planted(&[12, 9], 0.6, 0.1, 4);
        let n = 21.0_f64;
        let fit = fit_q(&y, 1, &SbmControl::default()).unwrap();
        let density = y.edge_count() as f64 / (n * (n - 1.0));
        assert_eq!(fit.pi, vec![vec![density]]);
        assert_eq!(fit.alpha, vec![1.0]);
        let m = y.edge_count() as f64;
        let pairs = n * (n - 1.0);
        let ll = m * density.ln() + (pairs - m) * (1.0 - density).ln();
        assert!((fit.icl - (ll - 0.5 * pairs.ln())).abs() < 1e-9);
    }

    #[test]
    fn planted_two_blocks_recovered_over_seeds() {
        for seed in 0..20 {
            let (y, truth) = planted(&[30, 30], 0.9, 0.05, 100 + seed);
            let fit = fit_q(&y, 2, &quick(3, seed)).unwrap();
            let truth = Partition::new(truth).unwrap();
            assert_eq!(adjusted_rand(&fit.labels, &truth).unwrap(), 1.0, "seed {seed}");
            check_simplex(&fit);
            check_monotone(&fit.elbo_trace);
            let mut diag: Vec<f64> = vec![fit.pi[0][0], fit.pi[1][1]];
            diag.sort_by(f64::total_cmp);
            assert!(diag.iter().all(|d| (d - 0.9).abs() < 0.05));
            assert!((fit.pi[0][1] - 0.05).abs() < 0.05 && (fit.pi[1][0] - 0.05).abs() < 0.05);
            let one = fit_q(&y, 1, &SbmControl::default()).unwrap();
            assert!(fit.icl > one.icl);
        }
    }

    #[test]
    fn planted_three_blocks_select_three() {
        let (y, truth) = planted(&[25, 20, 15], 0.8, 0.05, 9);
        let sel = select_q(&y, 1..=6, &quick(4, 1)).unwrap();
        assert_eq!(sel.best.q, 3);
        assert_eq!(sel.curve.len(), 6);
        let truth = Partition::new(truth).unwrap();
        assert_eq!(adjusted_rand(&sel.best.labels, &truth).unwrap(), 1.0);
        assert_eq!(sel.best.labels.sizes(), &[25, 20, 15]);
    }

    #[test]
    fn edgeless_graph_selects_one_block() {
        let y = BinaryAdjacency::empty(12);
        let sel = select_q(&y, 1..=4, &quick(3, 0)).unwrap();
        assert_eq!(sel.best.q, 1);
        assert_eq!(sel.best.pi, vec![vec![0.0]]);
    }

    #[test]
    fn invalid_inputs() {
        let y = BinaryAdjacency::empty(3);
        assert_eq!(fit_q(&y, 0, &SbmControl::default()), Err(SbmError::InvalidQ { q: 0, n: 3 }));
        assert_eq!(fit_q(&y, 4, &SbmControl::default()), Err(SbmError::InvalidQ { q: 4, n: 3 }));
        assert!(matches!(fit_q(&y, 1, &quick(0, 0)), Err(SbmError::InvalidControl(_))));
        assert_eq!(fit_q(&BinaryAdjacency::empty(0), 1, &SbmControl::default()), Err(SbmError::EmptyGraph));
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 3..=2;
        assert_eq!(select_q(&y, empty, &SbmControl::default()), Err(SbmError::EmptyRange));
        assert!(fit_from_tau(&y, &[vec![0.5, 0.5], vec![1.0, 0.0], vec![0.3, 0.3]], &SbmControl::default()).is_err());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let (y, _) = planted(&[15, 15, 10], 0.5, 0.1, 2);
        let a = fit_q(&y, 3, &quick(4, 7)).unwrap();
        let b = fit_q(&y, 3, &quick(4, 7)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn permuted_start_gives_same_fit() {
        let (y, _) = planted(&[14, 11, 9], 0.5, 0.15, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let flat = init::random_tau(34, 3, &mut rng);
        let tau: Vec<Vec<f64>> = flat.chunks(3).map(|r| r.to_vec()).collect();
        let permuted: Vec<Vec<f64>> = tau.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
        let a = fit_from_tau(&y, &tau, &SbmControl::default()).unwrap();
        let b = fit_from_tau(&y, &permuted, &SbmControl::default()).unwrap();
        assert!((a.icl - b.icl).abs() < 1e-9);
        let sorted = |f: &SbmFit| {
            let mut v: Vec<f64> = f.pi.iter().flatten().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        };
        sorted(&a).iter().zip(sorted(&b)).for_each(|(x, y)| assert!((x - y).abs() < 1e-9));
        assert_eq!(adjusted_rand(&a.labels, &b.labels).unwrap(), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn elbo_monotone_and_simplex(n in 5usize..30, q in 1usize..5, p in 0.05f64..0.6, seed in 0u64..1000) {
            let q = q.min(n);
            let (y, _) = planted(&[n], p, p, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let flat = init::random_tau(n, q, &mut rng);
            let tau: Vec<Vec<f64>> = flat.chunks(q).map(|r| r.to_vec()).collect();
            let fit = fit_from_tau(&y, &tau, &SbmControl { max_iter: 60, ..SbmControl::default() }).unwrap();
            check_monotone(&fit.elbo_trace);
            check_simplex(&fit);
            let sizes = fit.labels.sizes();
            prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!((fit.icl - icl(&y, &fit.labels)).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_outputs() {
        let (y, _) = planted(&[3, 3], 1.0, 0.0, 1);
        let ids: Vec<String> = (0..6).map(|i| format!("n{i}")).collect();
        let edges = y
            .pairs()
            .map(|(i, j)| crate::graph::Edge { source: i, target: j, weight: 0.5 })
            .collect();
        let g = Graph::from_parts(ids, edges).unwrap();
        let fit = fit_q(&y, 2, &quick(2, 0)).unwrap();
        let mut buf = Vec::new();
        fit.write_membership_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("node_id,community\nn0,1\n"));
        let mut buf = Vec::new();
        fit.write_pi_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect()).collect();
        assert!(text.starts_with("community,1,2\n1,"));
        assert_eq!(rows.len(), 2);
        assert!((rows[0][0] - 1.0).abs() < 1e-9 && rows[0][1] < 1e-9);
    }
}

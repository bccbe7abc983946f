//! Exact likelihood for models whose units (ordered pairs or dyads) are
//! independent finite exponential families, and the Newton solver shared by
//! the dyad and pseudolikelihood estimators.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::terms::{change_into, ErgmSpec};
use super::ErgmError;
use crate::graph::BinaryAdjacency;
use crate::numeric::KahanSum;

/// Coefficients whose magnitude passes this bound while still being pushed
/// outward are treated as separated.
pub(crate) const SEPARATION_BOUND: f64 = 25.0;
/// Value at which a separated coefficient is held; its probability factor
/// `exp(-40)` is below double resolution relative to one.
pub(crate) const FROZEN_MAGNITUDE: f64 = 40.0;
const GRADIENT_TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 100;
const CHUNK: usize = 2048;

/// Units with one null state (statistic zero) and `states` non-null states.
pub(crate) struct Design {
    k: usize,
    states: usize,
    stats: Vec<f64>,
    /// 0 for the null state, `s + 1` for non-null state `s`.
    observed: Vec<u8>,
}

pub(crate) struct Evaluation {
    pub log_likelihood: f64,
    pub gradient: Vec<f64>,
    /// Sum of per-unit covariance matrices, row-major `k * k`.
    pub information: Vec<f64>,
}

impl Design {
    /// Each unordered pair `{i, j}` with its four joint states.
    pub(crate) fn dyads(y: &BinaryAdjacency, spec: &ErgmSpec) -> Self {
        let n = y.node_count();
        let k = spec.len();
        let units = n * (n - 1) / 2;
        let mut stats = Vec::with_capacity(units * 3 * k);
        let mut observed = Vec::with_capacity(units);
        let mut a = vec![0.0; k];
        let mut b = vec![0.0; k];
        for i in 0..n {
            for j in i + 1..n {
                spec.dyad_vector(i, j, &mut a);
                spec.dyad_vector(j, i, &mut b);
                stats.extend_from_slice(&a);
                stats.extend_from_slice(&b);
                let start = stats.len();
                stats.extend(a.iter().zip(&b).map(|(x, y)| x + y));
                if let Some(m) = spec.mutual_index() {
                    stats[start + m] = 1.0;
                }
                observed.push(match (y.get(i, j), y.get(j, i)) {
                    (false, false) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (true, true) => 3,
                });
            }
        }
        Self {
            k,
            states: 3,
            stats,
            observed,
        }
    }

    /// Each ordered pair as a Bernoulli unit with its change statistic.
    pub(crate) fn ordered_pairs(y: &BinaryAdjacency, spec: &ErgmSpec) -> Self {
        let n = y.node_count();
        let k = spec.len();
        let mut stats = Vec::with_capacity(n * (n - 1) * k);
        let mut observed = Vec::with_capacity(n * (n - 1));
        let mut d = vec![0.0; k];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                change_into(y, spec, i, j, &mut d);
                stats.extend_from_slice(&d);
                observed.push(u8::from(y.get(i, j)));
            }
        }
        Self {
            k,
            states: 1,
            stats,
            observed,
        }
    }

    /// Terms whose statistic is zero in every state of every unit.
    pub(crate) fn constant_terms(&self) -> Vec<usize> {
        (0..self.k)
            .filter(|&t| self.stats.iter().skip(t).step_by(self.k).all(|&v| v == 0.0))
            .collect()
    }

    /// Direction in which each term's likelihood increases without bound:
    /// `-1` when every unit's observed state minimises the term's statistic
    /// (and some unit could do otherwise), `+1` when it always maximises it.
    pub(crate) fn boundary_directions(&self) -> Vec<f64> {
        let k = self.k;
        let width = self.states * k;
        (0..k)
            .map(|t| {
                let (mut at_min, mut at_max, mut varies) = (true, true, false);
                for (u, &o) in self.observed.iter().enumerate() {
                    let unit = &self.stats[u * width..][..width];
                    let value = |s: usize| if s == 0 { 0.0 } else { unit[(s - 1) * k + t] };
                    let obs = value(o as usize);
                    let (mut lo, mut hi) = (0.0f64, 0.0f64);
                    for s in 1..=self.states {
                        lo = lo.min(value(s));
                        hi = hi.max(value(s));
                    }
                    varies |= hi > lo;
                    at_min &= obs == lo;
                    at_max &= obs == hi;
                    if !at_min && !at_max {
                        return 0.0;
                    }
                }
                match (varies, at_min, at_max) {
                    (true, true, _) => -1.0,
                    (true, _, true) => 1.0,
                    _ => 0.0,
                }
            })
            .collect()
    }

    /// Sum of the observed unit statistics.
    #[cfg(test)]
    pub(crate) fn observed_statistics(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.k];
        let width = self.states * self.k;
        for (u, &obs) in self.observed.iter().enumerate() {
            if obs > 0 {
                let s = &self.stats[u * width + (obs as usize - 1) * self.k..][..self.k];
                for (a, b) in g.iter_mut().zip(s) {
                    *a += b;
                }
            }
        }
        g
    }

    pub(crate) fn log_likelihood(&self, theta: &[f64]) -> f64 {
        self.reduce(theta, false).log_likelihood
    }

    pub(crate) fn evaluate(&self, theta: &[f64]) -> Evaluation {
        self.reduce(theta, true)
    }

    /// Per-chunk partial sums combined in chunk order, so the result does
    /// not depend on the worker count.
    fn reduce(&self, theta: &[f64], derivatives: bool) -> Evaluation {
        let k = self.k;
        let width = self.states * k;
        let partials: Vec<Evaluation> = self
            .observed
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, obs)| {
                let base = c * CHUNK;
                let mut ll = KahanSum::default();
                let mut grad = vec![0.0; if derivatives { k } else { 0 }];
                let mut info = vec![0.0; if derivatives { k * k } else { 0 }];
                let mut energy = vec![0.0; self.states + 1];
                let mut mean = vec![0.0; k];
                for (offset, &o) in obs.iter().enumerate() {
                    let unit = &self.stats[(base + offset) * width..][..width];
                    energy[0] = 0.0;
                    for s in 0..self.states {
                        energy[s + 1] = dot(theta, &unit[s * k..][..k]);
                    }
                    let max = energy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let z: f64 = energy.iter().map(|e| (e - max).exp()).sum();
                    let log_z = max + z.ln();
                    ll.add(energy[o as usize] - log_z);
                    if !derivatives {
                        continue;
                    }
                    mean.iter_mut().for_each(|m| *m = 0.0);
                    for s in 0..self.states {
                        let p = (energy[s + 1] - log_z).exp();
                        let row = &unit[s * k..][..k];
                        for a in 0..k {
                            mean[a] += p * row[a];
                            let pa = p * row[a];
                            if pa != 0.0 {
                                for b in 0..k {
                                    info[a * k + b] += pa * row[b];
                                }
                            }
                        }
                    }
                    if o > 0 {
                        let row = &unit[(o as usize - 1) * k..][..k];
                        for a in 0..k {
                            grad[a] += row[a];
                        }
                    }
                    for a in 0..k {
                        grad[a] -= mean[a];
                        if mean[a] != 0.0 {
                            for b in 0..k {
                                info[a * k + b] -= mean[a] * mean[b];
                            }
                        }
                    }
                }
                Evaluation {
                    log_likelihood: ll.value(),
                    gradient: grad,
                    information: info,
                }
            })
            .collect();

        let mut ll = KahanSum::default();
        let mut grad = vec![KahanSum::default(); if derivatives { k } else { 0 }];
        let mut info = vec![0.0; if derivatives { k * k } else { 0 }];
        for p in partials {
            ll.add(p.log_likelihood);
            for (g, v) in grad.iter_mut().zip(&p.gradient) {
                g.add(*v);
            }
            for (a, b) in info.iter_mut().zip(&p.information) {
                *a += b;
            }
        }
        Evaluation {
            log_likelihood: ll.value(),
            gradient: grad.iter().map(KahanSum::value).collect(),
            information: info,
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) struct NewtonOutcome {
    /// Separated coefficients are held at `±FROZEN_MAGNITUDE`.
    pub theta: Vec<f64>,
    pub separated: Vec<bool>,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Inverse information over free coefficients; separated rows are NaN.
    pub covariance: Vec<f64>,
}

/// Damped Newton ascent with separation freezing.
///
/// Converges when the free gradient's max-norm is below `1e-8`, or when the
/// predicted gain of a Newton step is below the resolution of the
/// log-likelihood and no step can increase it.
pub(crate) fn maximize(design: &Design, start: Vec<f64>) -> Result<NewtonOutcome, ErgmError> {
    let k = design.k;
    let mut theta = start;
    let mut separated = vec![false; k];
    for (t, dir) in design.boundary_directions().into_iter().enumerate() {
        if dir != 0.0 {
            separated[t] = true;
            theta[t] = FROZEN_MAGNITUDE * dir;
        }
    }
    for iteration in 0..MAX_ITERATIONS {
        let eval = design.evaluate(&theta);
        for t in 0..k {
            if !separated[t]
                && theta[t].abs() > SEPARATION_BOUND
                && eval.gradient[t] * theta[t].signum() >= 0.0
            {
                separated[t] = true;
                theta[t] = FROZEN_MAGNITUDE * theta[t].signum();
            }
        }
        let eval = if separated.iter().any(|&s| s) {
            design.evaluate(&theta)
        } else {
            eval
        };
        let free: Vec<usize> = (0..k).filter(|&t| !separated[t]).collect();
        let grad_norm = free
            .iter()
            .map(|&t| eval.gradient[t].abs())
            .fold(0.0, f64::max);
        if grad_norm < GRADIENT_TOLERANCE || free.is_empty() {
            return Ok(finish(design, theta, separated, iteration, eval));
        }
        let info = sub_matrix(&eval.information, k, &free);
        let g = DVector::from_iterator(free.len(), free.iter().map(|&t| eval.gradient[t]));
        let step = solve_spd(&info, &g).ok_or(ErgmError::SingularInformation)?;
        let predicted_gain = g.dot(&step);
        let ll = eval.log_likelihood;
        let resolution = 1e-12 * (1.0 + ll.abs());

        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..40 {
            let mut candidate = theta.clone();
            for (idx, &t) in free.iter().enumerate() {
                candidate[t] += scale * step[idx];
            }
            let cand_ll = design.log_likelihood(&candidate);
            if cand_ll.is_finite() && cand_ll > ll {
                theta = candidate;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            if predicted_gain.abs() < resolution.max(1e-10) {
                return Ok(finish(design, theta, separated, iteration, eval));
            }
            return Err(ErgmError::NotConverged {
                method: "newton",
                iterations: iteration + 1,
            });
        }
    }
    Err(ErgmError::NotConverged {
        method: "newton",
        iterations: MAX_ITERATIONS,
    })
}

fn finish(
    design: &Design,
    theta: Vec<f64>,
    separated: Vec<bool>,
    iterations: usize,
    eval: Evaluation,
) -> NewtonOutcome {
    let k = design.k;
    let free: Vec<usize> = (0..k).filter(|&t| !separated[t]).collect();
    let mut covariance = vec![f64::NAN; k * k];
    if !free.is_empty() {
        let info = sub_matrix(&eval.information, k, &free);
        if let Some(inv) = invert_spd(&info) {
            for (a, &ta) in free.iter().enumerate() {
                for (b, &tb) in free.iter().enumerate() {
                    covariance[ta * k + tb] = inv[(a, b)];
                }
            }
        }
    }
    NewtonOutcome {
        theta,
        separated,
        iterations,
        log_likelihood: eval.log_likelihood,
        covariance,
    }
}

pub(crate) fn sub_matrix(full: &[f64], k: usize, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| full[idx[a] * k + idx[b]])
}

/// Solves `A x = b` for symmetric positive (semi)definite `A`, adding a
/// growing ridge when the Cholesky factorisation fails.
pub(crate) fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = (0..a.nrows()).map(|i| a[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut m = a.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += ridge;
        }
        if let Some(ch) = m.cholesky() {
            let x = ch.solve(b);
            if x.iter().all(|v| v.is_finite()) {
                return Some(x);
            }
        }
        ridge = if ridge == 0.0 { scale * 1e-12 } else { ridge * 100.0 };
    }
    None
}

pub(crate) fn invert_spd(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    a.clone().cholesky().map(|c| c.inverse()).or_else(|| a.clone().try_inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergm::terms::{global_statistics, ErgmTerm};

    #[test]
    fn observed_statistics_match_global() {
        let y = BinaryAdjacency::from_pairs(4, [(0, 1), (1, 0), (2, 3), (1, 3)]);
        let spec = ErgmSpec::new(
            4,
            vec![
                ErgmTerm::Edges,
                ErgmTerm::Mutual,
                ErgmTerm::node_covariate("x", vec![1.0, 2.0, 3.0, 4.0], super::super::Role::Sum),
            ],
        )
        .unwrap();
        let g = global_statistics(&y, &spec).unwrap();
        assert_eq!(Design::dyads(&y, &spec).observed_statistics(), g);
        let dyad_free = ErgmSpec::new(4, vec![spec.terms()[0].clone(), spec.terms()[2].clone()]).unwrap();
        let g2 = global_statistics(&y, &dyad_free).unwrap();
        assert_eq!(Design::ordered_pairs(&y, &dyad_free).observed_statistics(), g2);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let y = BinaryAdjacency::from_pairs(5, [(0, 1), (1, 0), (2, 3), (1, 3), (4, 0)]);
        let spec = ErgmSpec::new(
            5,
            vec![
                ErgmTerm::Edges,
                ErgmTerm::Mutual,
                ErgmTerm::node_covariate("x", vec![0.1, 0.5, -0.3, 0.9, 0.0], super::super::Role::Sender),
            ],
        )
        .unwrap();
        let d = Design::dyads(&y, &spec);
        let theta = [-0.7, 0.4, 0.2];
        let e = d.evaluate(&theta);
        let h = 1e-6;
        for t in 0..3 {
            let mut p = theta;
            p[t] += h;
            let mut m = theta;
            m[t] -= h;
            let fd = (d.log_likelihood(&p) - d.log_likelihood(&m)) / (2.0 * h);
            assert!((fd - e.gradient[t]).abs() < 1e-6, "term {t}");
        }
    }
}

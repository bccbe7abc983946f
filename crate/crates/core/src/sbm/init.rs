use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::graph::BinaryAdjacency;

const KMEANS_RUNS: usize = 8;
const KMEANS_ITERATIONS: usize = 100;

/// Scaled leading left and right singular vectors of the centred adjacency,
/// one row per node, columns in decreasing singular-value order.
pub(crate) struct SpectralEmbedding {
    left: DMatrix<f64>,
    right: DMatrix<f64>,
}

impl SpectralEmbedding {
    pub(crate) fn new(y: &BinaryAdjacency) -> Self {
        let n = y.node_count();
        let pairs = (n * n.saturating_sub(1)).max(1) as f64;
        let density = y.edge_count() as f64 / pairs;
        let centred = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { y.value(i, j) - density });
        let svd = centred.svd(true, true);
        let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
        let left = DMatrix::from_fn(n, order.len(), |i, k| u[(i, order[k])] * svd.singular_values[order[k]]);
        let right = DMatrix::from_fn(n, order.len(), |i, k| v_t[(order[k], i)] * svd.singular_values[order[k]]);
        Self { left, right }
    }

    /// Node features from the leading `q` singular pairs.
    fn features(&self, q: usize) -> Vec<Vec<f64>> {
        let q = q.min(self.left.ncols());
        (0..self.left.nrows())
            .map(|i| {
                (0..q)
                    .map(|k| self.left[(i, k)])
                    .chain((0..q).map(|k| self.right[(i, k)]))
                    .collect()
            })
            .collect()
    }

    pub(crate) fn labels(&self, q: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        kmeans(&self.features(q), q, rng)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm from k-means++ seeds, best inertia over several runs.
/// Clusters may come back empty when points coincide.
pub(crate) fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.len();
    if k <= 1 || n == 0 {
        return vec![0; n];
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..KMEANS_RUNS {
        let (inertia, labels) = lloyd(points, k, rng);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    best.expect("at least one run").1
}

fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<usize>) {
    let n = points.len();
    let dim = points[0].len();
    let mut centres = vec![points[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centres[0])).collect();
    while centres.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        centres.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centres[centres.len() - 1]));
        }
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..KMEANS_ITERATIONS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centre) in centres.iter().enumerate() {
                let d = sq_dist(p, centre);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centres[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = points.iter().zip(&labels).map(|(p, &l)| sq_dist(p, &centres[l])).sum();
    (inertia, labels)
}

/// Responsibility rows drawn from a flat Dirichlet.
pub(crate) fn random_tau(n: usize, q: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut tau = vec![0.0; n * q];
    for row in tau.chunks_mut(q) {
        for t in row.iter_mut() {
            *t = -(1.0 - rng.gen::<f64>()).ln();
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|t| *t /= s);
    }
    tau
}

pub(crate) fn one_hot(labels: &[usize], q: usize) -> Vec<f64> {
    let mut tau = vec![0.0; labels.len() * q];
    for (i, &l) in labels.iter().enumerate() {
        tau[i * q + l] = 1.0;
    }
    tau
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn kmeans_separates_clear_clusters() {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(vec![i as f64 * 0.01, 0.0]);
            pts.push(vec![5.0 + i as f64 * 0.01, 5.0]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = kmeans(&pts, 2, &mut rng);
        for i in 0..10 {
            assert_eq!(l[2 * i], l[0]);
            assert_eq!(l[2 * i + 1], l[1]);
        }
        assert_ne!(l[0], l[1]);
    }

    #[test]
    fn coincident_points_leave_clusters_empty() {
        let pts = vec![vec![1.0, 1.0]; 6];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = kmeans(&pts, 3, &mut rng);
        assert!(l.iter().all(|&x| x == l[0]));
    }

    #[test]
    fn random_rows_on_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tau = random_tau(7, 4, &mut rng);
        for row in tau.chunks(4) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&t| t > 0.0));
        }
    }
}

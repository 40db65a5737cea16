use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::sq_dist;
use super::{DataMatrix, Partition};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub n_init: usize,
    pub max_iter: usize,
    /// Convergence threshold on the largest centroid displacement.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            n_init: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    /// K × n_features.
    pub centroids: Vec<Vec<f64>>,
    /// Total within-cluster squared distance on the training data.
    pub inertia: f64,
    pub n_iter: usize,
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Nearest centroid per row; ties go to the lower index.
    pub fn predict(&self, x: &DataMatrix) -> Result<Partition> {
        let d = self.centroids.first().map_or(0, Vec::len);
        if x.n_features() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.n_features(),
            });
        }
        Partition::new(assign(x, &self.centroids).0, self.k())
    }
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(row, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

// Rows per rayon task; keeps small fits single-threaded.
const PAR_CHUNK: usize = 512;

fn assign(x: &DataMatrix, centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    let n = x.n_samples();
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    labels
        .par_chunks_mut(PAR_CHUNK)
        .zip(dists.par_chunks_mut(PAR_CHUNK))
        .enumerate()
        .for_each(|(chunk, (ls, ds))| {
            for (o, (l, d)) in ls.iter_mut().zip(ds.iter_mut()).enumerate() {
                let (j, dist) = nearest(x.row(chunk * PAR_CHUNK + o), centroids);
                *l = j;
                *d = dist;
            }
        });
    (labels, dists)
}

/// k-means++ seeding by D² sampling.
fn kmeans_plus_plus<R: Rng>(x: &DataMatrix, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = x.n_samples();
    let mut centroids = vec![x.row(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = x.rows().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            // rounding can run past the end; fall back to the last positive weight
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&d| d > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = x.row(pick).to_vec();
        for (i, r) in x.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Means of the assigned rows. An empty cluster takes over the point that is
/// farthest from its current centroid.
fn update_centroids(x: &DataMatrix, labels: &mut [usize], dists: &mut [f64], prev: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (k, d) = (prev.len(), x.n_features());
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let far =
            (0..labels.len())
                .filter(|&i| counts[labels[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dists[b] >= dists[i] => Some(b),
                    _ => Some(i),
                });
        if let Some(i) = far {
            counts[labels[i]] -= 1;
            labels[i] = j;
            dists[i] = 0.0;
            counts[j] = 1;
        }
    }
    let mut sums = vec![vec![0.0; d]; k];
    for (i, row) in x.rows().enumerate() {
        for (s, v) in sums[labels[i]].iter_mut().zip(row) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(&counts)
        .zip(prev)
        .map(|((mut s, &c), p)| {
            if c == 0 {
                return p.clone();
            }
            s.iter_mut().for_each(|v| *v /= c as f64);
            s
        })
        .collect()
}

fn lloyd(x: &DataMatrix, init: Vec<Vec<f64>>, cfg: &KMeansConfig) -> (KMeansModel, Vec<usize>) {
    let k = init.len();
    let mut centroids = init;
    let (mut labels, mut dists) = assign(x, &centroids);
    let mut n_iter = 0;
    while n_iter < cfg.max_iter {
        n_iter += 1;
        let next = update_centroids(x, &mut labels, &mut dists, &centroids);
        let shift = next
            .iter()
            .zip(&centroids)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        let (new_labels, new_dists) = assign(x, &centroids);
        let changed = new_labels != labels;
        labels = new_labels;
        dists = new_dists;
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        let any_empty = counts.contains(&0) && x.n_samples() >= k;
        if !any_empty && (!changed || shift < cfg.tol) {
            break;
        }
    }
    // Coincident points can leave a cluster empty under lowest-index tie
    // breaking; hand it the farthest point and centre it there.
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&l| counts[l] += 1);
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let far =
            (0..labels.len())
                .filter(|&i| counts[labels[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dists[b] >= dists[i] => Some(b),
                    _ => Some(i),
                });
        if let Some(i) = far {
            counts[labels[i]] -= 1;
            labels[i] = j;
            dists[i] = 0.0;
            counts[j] = 1;
            centroids[j] = x.row(i).to_vec();
        }
    }
    let inertia = dists.iter().sum();
    (
        KMeansModel {
            centroids,
            inertia,
            n_iter,
        },
        labels,
    )
}

/// Lloyd's algorithm from k-means++ seeds, best inertia over `n_init` restarts.
pub fn kmeans_fit(x: &DataMatrix, k: usize, seed: u64, n_init: usize) -> Result<(KMeansModel, Partition)> {
    let cfg = KMeansConfig {
        n_init,
        ..KMeansConfig::default()
    };
    kmeans_fit_with(x, k, seed, &cfg)
}

pub fn kmeans_fit_with(x: &DataMatrix, k: usize, seed: u64, cfg: &KMeansConfig) -> Result<(KMeansModel, Partition)> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > x.n_samples() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds {} samples",
            x.n_samples()
        )));
    }
    let runs: Vec<(KMeansModel, Vec<usize>)> = (0..cfg.n_init.max(1) as u64)
        .into_par_iter()
        .map(|restart| {
            let mut rng = stream_rng(seed, restart);
            let init = kmeans_plus_plus(x, k, &mut rng);
            lloyd(x, init, cfg)
        })
        .collect();
    let (model, labels) = runs
        .into_iter()
        .reduce(|best, run| if run.0.inertia < best.0.inertia { run } else { best })
        .expect("at least one restart");
    let partition = Partition::new(labels, k)?;
    Ok((model, partition))
}

//! Internal cluster-validity indices and the adjusted Rand index.
//!
//! Labels are plain `usize` slices; empty label values are ignored, so the
//! effective cluster count is the number of distinct labels present.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::DataMatrix;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Silhouette is computed on at most this many seeded-sampled points.
pub const SILHOUETTE_SAMPLE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub k: usize,
    pub silhouette: f64,
    pub davies_bouldin: f64,
    pub calinski_harabasz: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bic: Option<f64>,
    /// True when the silhouette was estimated on a subsample.
    pub subsampled: bool,
}

fn check_lengths(x: &DataMatrix, labels: &[usize]) -> Result<()> {
    if x.n_samples() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: x.n_samples(),
            got: labels.len(),
        });
    }
    Ok(())
}

fn counts(labels: &[usize]) -> Vec<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut c = vec![0; k];
    labels.iter().for_each(|&l| c[l] += 1);
    c
}

fn require_two(counts: &[usize]) -> Result<usize> {
    let present = counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 non-empty clusters, got {present}"
        )));
    }
    Ok(present)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn centroids(x: &DataMatrix, labels: &[usize], counts: &[usize]) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; x.n_features()]; counts.len()];
    for (row, &l) in x.rows().zip(labels) {
        for (s, v) in c[l].iter_mut().zip(row) {
            *s += v;
        }
    }
    for (cj, &n) in c.iter_mut().zip(counts) {
        if n > 0 {
            cj.iter_mut().for_each(|v| *v /= n as f64);
        }
    }
    c
}

/// Mean of (b − a) / max(a, b). Singletons score 0, as do points with a = b = 0.
pub fn silhouette_score(x: &DataMatrix, labels: &[usize]) -> Result<f64> {
    check_lengths(x, labels)?;
    let counts = counts(labels);
    require_two(&counts)?;
    let k = counts.len();
    let per_point: Vec<f64> = (0..x.n_samples())
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if counts[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            let xi = x.row(i);
            for (j, row) in x.rows().enumerate() {
                if j != i {
                    sums[labels[j]] += dist(xi, row);
                }
            }
            let a = sums[own] / (counts[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && counts[c] > 0)
                .map(|c| sums[c] / counts[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m > 0.0 {
                (b - a) / m
            } else {
                0.0
            }
        })
        .collect();
    Ok(per_point.iter().sum::<f64>() / per_point.len() as f64)
}

/// Silhouette on at most `limit` points drawn without replacement; the flag
/// reports whether sampling happened.
pub fn silhouette_sampled(x: &DataMatrix, labels: &[usize], limit: usize, seed: u64) -> Result<(f64, bool)> {
    check_lengths(x, labels)?;
    if x.n_samples() <= limit {
        return Ok((silhouette_score(x, labels)?, false));
    }
    let mut rng = stream_rng(seed, 0x5111_0E77);
    let mut idx = sample(&mut rng, x.n_samples(), limit).into_vec();
    idx.sort_unstable();
    let sub = x.select_rows(&idx);
    let sub_labels: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
    Ok((silhouette_score(&sub, &sub_labels)?, true))
}

/// Mean over clusters of max_{j≠i} (S_i + S_j) / M_ij.
pub fn davies_bouldin(x: &DataMatrix, labels: &[usize]) -> Result<f64> {
    check_lengths(x, labels)?;
    let counts = counts(labels);
    let present = require_two(&counts)?;
    let cents = centroids(x, labels, &counts);
    let mut scatter = vec![0.0; counts.len()];
    for (row, &l) in x.rows().zip(labels) {
        scatter[l] += dist(row, &cents[l]);
    }
    for (s, &n) in scatter.iter_mut().zip(&counts) {
        if n > 0 {
            *s /= n as f64;
        }
    }
    let live: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
    let mut total = 0.0;
    for &i in &live {
        let mut worst = 0.0f64;
        for &j in &live {
            if i == j {
                continue;
            }
            let m = dist(&cents[i], &cents[j]);
            if m == 0.0 {
                return Err(Error::ZeroCentroidSeparation);
            }
            worst = worst.max((scatter[i] + scatter[j]) / m);
        }
        total += worst;
    }
    Ok(total / present as f64)
}

/// (B / (K − 1)) / (W / (n − K)).
pub fn calinski_harabasz(x: &DataMatrix, labels: &[usize]) -> Result<f64> {
    check_lengths(x, labels)?;
    let counts = counts(labels);
    let k = require_two(&counts)?;
    let n = x.n_samples();
    if n <= k {
        return Err(Error::InvalidArgument(format!("need n > K, got n = {n}, K = {k}")));
    }
    let cents = centroids(x, labels, &counts);
    let overall = x.column_means();
    let between: f64 = cents
        .iter()
        .zip(&counts)
        .map(|(c, &m)| m as f64 * dist(c, &overall).powi(2))
        .sum();
    let within: f64 = x.rows().zip(labels).map(|(r, &l)| dist(r, &cents[l]).powi(2)).sum();
    if within == 0.0 {
        return Err(Error::ZeroWithinDispersion);
    }
    Ok((between / (k - 1) as f64) / (within / (n - k) as f64))
}

fn choose2(v: u64) -> f64 {
    v as f64 * (v as f64 - 1.0) / 2.0
}

/// Adjusted Rand index from the pair-counting contingency table.
pub fn adjusted_rand(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![0u64; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        table[x * kb + y] += 1;
    }
    let index: f64 = table.iter().map(|&v| choose2(v)).sum();
    let rows: f64 = (0..ka).map(|i| choose2(table[i * kb..(i + 1) * kb].iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| choose2((0..ka).map(|i| table[i * kb + j]).sum())).sum();
    let expected = rows * cols / choose2(a.len() as u64);
    let max = 0.5 * (rows + cols);
    if max == expected {
        // both labelings trivial (all one cluster or all singletons)
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Silhouette (sampled past [`SILHOUETTE_SAMPLE_LIMIT`]), Davies–Bouldin and
/// Calinski–Harabasz on one partition.
pub fn validity_report(x: &DataMatrix, labels: &[usize], seed: u64) -> Result<ValidityReport> {
    let (silhouette, subsampled) = silhouette_sampled(x, labels, SILHOUETTE_SAMPLE_LIMIT, seed)?;
    Ok(ValidityReport {
        k: counts(labels).iter().filter(|&&c| c > 0).count(),
        silhouette,
        davies_bouldin: davies_bouldin(x, labels)?,
        calinski_harabasz: calinski_harabasz(x, labels)?,
        bic: None,
        subsampled,
    })
}

//! Dimensionality reduction and vector clustering on descriptor matrices.

mod gmm;
mod kmeans;
mod matrix;
mod pca;

pub use gmm::{
    gmm_assign, gmm_fit, gmm_fit_with, n_parameters, select_k_bic, select_k_bic_with, BicSelection, GmmConfig, GmmModel,
};
pub use kmeans::{kmeans_fit, kmeans_fit_with, KMeansConfig, KMeansModel};
pub use matrix::{DataMatrix, Partition};
pub use pca::{pca_fit, pca_transform, PcaModel};

use crate::error::{Error, Result};
use crate::validity::{silhouette_sampled, SILHOUETTE_SAMPLE_LIMIT};

/// Default candidate range for automatic K selection.
pub const K_MIN: usize = 2;
pub const K_MAX: usize = 9;

/// Result of a silhouette sweep over k-means fits.
#[derive(Debug, Clone)]
pub struct SilhouetteSelection {
    pub k: usize,
    /// (K, silhouette) for every candidate.
    pub scores: Vec<(usize, f64)>,
    pub model: KMeansModel,
    pub partition: Partition,
    /// True when silhouettes were estimated on a subsample.
    pub subsampled: bool,
}

/// Fit k-means for every K in `k_min..=k_max`, keep the largest silhouette
/// (ties: smaller K).
pub fn select_k_silhouette(
    x: &DataMatrix,
    k_min: usize,
    k_max: usize,
    seed: u64,
    cfg: &KMeansConfig,
) -> Result<SilhouetteSelection> {
    if k_min < 2 || k_min > k_max {
        return Err(Error::InvalidArgument(format!("bad K range {k_min}..={k_max}")));
    }
    let k_max = k_max.min(x.n_samples().saturating_sub(1));
    if k_max < k_min {
        return Err(Error::TooFewParticles {
            got: x.n_samples(),
            need: k_min + 1,
        });
    }
    let mut best: Option<SilhouetteSelection> = None;
    let mut scores = Vec::new();
    for k in k_min..=k_max {
        let (model, partition) = kmeans_fit_with(x, k, seed, cfg)?;
        let (s, subsampled) = silhouette_sampled(x, partition.labels(), SILHOUETTE_SAMPLE_LIMIT, seed)?;
        scores.push((k, s));
        if best.as_ref().is_none_or(|b| s > b.scores[b.k - k_min].1) {
            best = Some(SilhouetteSelection {
                k,
                scores: Vec::new(),
                model,
                partition,
                subsampled,
            });
        }
        if let Some(b) = best.as_mut() {
            b.scores = scores.clone();
        }
    }
    Ok(best.expect("non-empty range"))
}

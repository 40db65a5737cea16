use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{extract_all, fit_clusters, ingest, ClustererChoice, DescriptorChoice, KChoice, PipelineConfig};
use crate::clustering::DataMatrix;
use crate::error::{Error, Result};

/// Cluster count used when the configuration leaves K on auto.
pub const BENCH_DEFAULT_K: usize = 4;

/// Timing summary of one descriptor/clusterer pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub descriptor: DescriptorChoice,
    pub clusterer: ClustererChoice,
    pub k: usize,
    pub n_particles: usize,
    pub repeats: usize,
    pub extraction_mean_s: f64,
    pub extraction_sd_s: f64,
    pub clustering_mean_s: f64,
    pub clustering_sd_s: f64,
    /// Mean extraction plus clustering time per particle.
    pub ms_per_particle: f64,
}

impl BenchRow {
    pub fn csv_header() -> &'static str {
        "descriptor,clusterer,k,n_particles,repeats,extraction_mean_s,extraction_sd_s,clustering_mean_s,clustering_sd_s,ms_per_particle"
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.descriptor,
            self.clusterer,
            self.k,
            self.n_particles,
            self.repeats,
            self.extraction_mean_s,
            self.extraction_sd_s,
            self.clustering_mean_s,
            self.clustering_sd_s,
            self.ms_per_particle
        )
    }
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Time extraction and clustering `repeats` times for each descriptor on one
/// shared particle set. Functional descriptors are clustered with gpmix, the
/// others with the configured clusterer (k-means if it was gpmix).
pub fn benchmark(cfg: &PipelineConfig, descriptors: &[DescriptorChoice], repeats: usize) -> Result<Vec<BenchRow>> {
    if repeats == 0 || descriptors.is_empty() {
        return Err(Error::Config(
            "benchmark needs at least one repeat and one descriptor".into(),
        ));
    }
    let k = match cfg.k {
        KChoice::Fixed(k) => k,
        KChoice::Auto => BENCH_DEFAULT_K,
    };
    let set = ingest(cfg)?;
    descriptors
        .iter()
        .map(|&descriptor| {
            let clusterer = match (descriptor, cfg.clusterer) {
                (DescriptorChoice::Functional, _) => ClustererChoice::Gpmix,
                (_, ClustererChoice::Gpmix) => ClustererChoice::Kmeans,
                (_, c) => c,
            };
            let run_cfg = PipelineConfig {
                descriptor,
                clusterer,
                k: KChoice::Fixed(k),
                pca: if descriptor == DescriptorChoice::Functional {
                    None
                } else {
                    cfg.pca
                },
                ..cfg.clone()
            };
            run_cfg.validate()?;
            let mut ext = Vec::with_capacity(repeats);
            let mut clu = Vec::with_capacity(repeats);
            let mut n = 0;
            for _ in 0..repeats {
                let t = Instant::now();
                let extraction = extract_all(&set, descriptor);
                ext.push(t.elapsed().as_secs_f64());
                n = extraction.particles.len();
                if n < run_cfg.min_particles() {
                    return Err(Error::TooFewParticles {
                        got: n,
                        need: run_cfg.min_particles(),
                    });
                }
                let rows: Vec<&[f64]> = extraction.particles.iter().map(|e| e.features.as_slice()).collect();
                let features = DataMatrix::from_rows(&rows)?;
                let t = Instant::now();
                fit_clusters(&features, &run_cfg)?;
                clu.push(t.elapsed().as_secs_f64());
            }
            let (extraction_mean_s, extraction_sd_s) = mean_sd(&ext);
            let (clustering_mean_s, clustering_sd_s) = mean_sd(&clu);
            Ok(BenchRow {
                descriptor,
                clusterer,
                k,
                n_particles: n,
                repeats,
                extraction_mean_s,
                extraction_sd_s,
                clustering_mean_s,
                clustering_sd_s,
                ms_per_particle: 1000.0 * (extraction_mean_s + clustering_mean_s) / n as f64,
            })
        })
        .collect()
}

//! End-to-end runs: ingest, descriptor extraction, clustering and reporting.

mod bench;
mod config;
mod figures;
mod model;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bench::{benchmark, BenchRow, BENCH_DEFAULT_K};
pub use config::{ClustererChoice, DescriptorChoice, KChoice, PipelineConfig, SyntheticSource};
pub use figures::{emit_figures, SCATTER_LIMIT};
pub use model::{FittedModel, ModelDocument, MODEL_SCHEMA_VERSION};
pub use report::{write_outputs, ParticleRecord, RunReport, SkippedInput, Timings};

use crate::clustering::{
    gmm_assign, gmm_fit, kmeans_fit, pca_fit, pca_transform, select_k_bic, select_k_silhouette, DataMatrix,
    KMeansConfig, Partition, PcaModel, K_MAX, K_MIN,
};
use crate::descriptors::{
    align_profile_stable, cdf_descriptor, fd_descriptor, normalize_profile, radial_profile, shape_metrics,
    zm_descriptor, RadialProfile, ShapeMetrics, ALIGN_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::funclust::{gpmix_pipeline, FUNCTIONAL_SAMPLES};
use crate::mask::{
    binarize, centroid_of, largest_component, list_images, load_gray_image, otsu_threshold, trace_contour, BinaryMask,
    GrayImage, Point,
};
use crate::synth::{generate_dataset, particle_file_name};
use crate::validity::{adjusted_rand, validity_report, ValidityReport};

/// Raw particle before preprocessing.
#[derive(Debug, Clone)]
pub enum ParticleInput {
    Image(GrayImage),
    Mask(BinaryMask),
}

/// Loaded particles in input order.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    pub sources: Vec<String>,
    pub items: Vec<ParticleInput>,
    /// Generation labels for synthetic input.
    pub truth: Option<Vec<usize>>,
    pub skipped: Vec<SkippedInput>,
}

impl ParticleSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Read every image in the input directory, or render the synthetic dataset.
pub fn ingest(cfg: &PipelineConfig) -> Result<ParticleSet> {
    if let Some(dir) = &cfg.input {
        let paths = list_images(dir)?;
        if paths.is_empty() {
            return Err(Error::NoInputImages(dir.clone()));
        }
        let loaded: Vec<(PathBuf, Result<GrayImage>)> = paths
            .into_par_iter()
            .map(|p| {
                let img = load_gray_image(&p);
                (p, img)
            })
            .collect();
        let mut set = ParticleSet {
            sources: Vec::new(),
            items: Vec::new(),
            truth: None,
            skipped: Vec::new(),
        };
        for (path, img) in loaded {
            let name = path
                .file_name()
                .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
            match img {
                Ok(img) => {
                    set.sources.push(name);
                    set.items.push(ParticleInput::Image(img));
                }
                Err(e) => {
                    log::warn!("skipping {name}: {e}");
                    set.skipped.push(SkippedInput {
                        source: name,
                        reason: e.to_string(),
                    });
                }
            }
        }
        if set.items.is_empty() {
            return Err(Error::NoInputImages(dir.clone()));
        }
        return Ok(set);
    }
    let spec = cfg
        .synthetic
        .as_ref()
        .ok_or_else(|| Error::Config("no input given".into()))?
        .resolve()?;
    let data = generate_dataset(&spec)?;
    let truth = data.labels();
    Ok(ParticleSet {
        sources: (0..data.len()).map(particle_file_name).collect(),
        items: data.masks.into_iter().map(ParticleInput::Mask).collect(),
        truth: Some(truth),
        skipped: Vec::new(),
    })
}

/// Descriptor, morphometrics and outline of one particle.
#[derive(Debug, Clone)]
pub struct Extracted {
    pub metrics: ShapeMetrics,
    pub features: Vec<f64>,
    pub contour: Vec<Point>,
}

/// Largest dark component of a grayscale image under its Otsu threshold.
pub fn segment(img: &GrayImage) -> Result<BinaryMask> {
    let t = otsu_threshold(img)?;
    Ok(largest_component(&binarize(img, t)?))
}

/// The 200-sample normalized profile, aligned with [`align_profile_stable`].
pub fn functional_profile(mask: &BinaryMask) -> Result<RadialProfile> {
    let p = radial_profile(mask, centroid_of(mask), FUNCTIONAL_SAMPLES)?;
    Ok(align_profile_stable(&normalize_profile(&p), ALIGN_TOLERANCE))
}

pub fn extract_particle(item: &ParticleInput, descriptor: DescriptorChoice) -> Result<Extracted> {
    let segmented;
    let mask = match item {
        ParticleInput::Image(img) => {
            segmented = segment(img)?;
            &segmented
        }
        ParticleInput::Mask(m) => m,
    };
    let contour = trace_contour(mask)?;
    let metrics = shape_metrics(mask, &contour);
    let features = match descriptor {
        DescriptorChoice::Cdf100 => cdf_descriptor(mask, centroid_of(mask))?.into_values(),
        DescriptorChoice::Fd10 => fd_descriptor(&contour)?.into_values(),
        DescriptorChoice::Zm12 => zm_descriptor(mask)?.into_values(),
        DescriptorChoice::Functional => functional_profile(mask)?.into_samples(),
    };
    Ok(Extracted {
        metrics,
        features,
        contour: contour.points().to_vec(),
    })
}

/// Extracted particles that survived, in input order.
#[derive(Debug, Clone)]
pub struct Extraction {
    /// Index into the [`ParticleSet`] of each kept particle.
    pub kept: Vec<usize>,
    pub particles: Vec<Extracted>,
    pub skipped: Vec<SkippedInput>,
}

/// Extract every particle in parallel; failures are skipped with a warning.
pub fn extract_all(set: &ParticleSet, descriptor: DescriptorChoice) -> Extraction {
    let results: Vec<Result<Extracted>> = set
        .items
        .par_iter()
        .map(|item| extract_particle(item, descriptor))
        .collect();
    let mut out = Extraction {
        kept: Vec::new(),
        particles: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) => {
                out.kept.push(i);
                out.particles.push(e);
            }
            Err(e) => {
                log::warn!("skipping {}: {e}", set.sources[i]);
                out.skipped.push(SkippedInput {
                    source: set.sources[i].clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    out
}

/// How K was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    /// `silhouette` (maximized), `bic` or `functional_bic` (minimized).
    pub criterion: String,
    /// (K, score) per candidate.
    pub scores: Vec<(usize, f64)>,
}

// EM restarts for a fixed component count.
const GMM_RESTARTS: usize = 5;

/// Result of the clustering stage.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub partition: Partition,
    pub selection: Option<KSelection>,
    pub validity: ValidityReport,
    pub model: ModelDocument,
    /// Matrix the clusters live in (after PCA, or the curve grid values).
    pub space: DataMatrix,
    /// Seconds spent on validity indices outside model selection.
    pub validity_s: f64,
}

/// Clustering without the validity stage.
pub(crate) struct Fitted {
    pub partition: Partition,
    pub selection: Option<KSelection>,
    pub model: ModelDocument,
    pub space: DataMatrix,
    pub bic: Option<f64>,
    /// gpmix scores its own partition.
    pub validity: Option<ValidityReport>,
}

pub(crate) fn fit_clusters(features: &DataMatrix, cfg: &PipelineConfig) -> Result<Fitted> {
    if cfg.clusterer == ClustererChoice::Gpmix {
        let profiles: Vec<RadialProfile> = features
            .rows()
            .map(|r| RadialProfile::from_samples(r.to_vec(), true, true))
            .collect();
        let k = match cfg.k {
            KChoice::Fixed(k) => Some(k),
            KChoice::Auto => None,
        };
        let res = gpmix_pipeline(&profiles, k, &cfg.effective_funclust())?;
        return Ok(Fitted {
            selection: res.k_selection.map(|s| KSelection {
                criterion: "functional_bic".into(),
                scores: s.bic,
            }),
            validity: Some(res.validity),
            model: ModelDocument::new(cfg.descriptor, None, FittedModel::Gpmix(res.classifier)),
            space: res.curve_values,
            partition: res.partition,
            bic: None,
        });
    }

    let (space, pca): (DataMatrix, Option<PcaModel>) = match cfg.pca {
        Some(p) => {
            let m = pca_fit(features, p)?;
            (pca_transform(&m, features)?, Some(m))
        }
        None => (features.clone(), None),
    };
    let (partition, selection, fitted, bic) = match (cfg.clusterer, cfg.k) {
        (ClustererChoice::Kmeans, KChoice::Auto) => {
            let sel = select_k_silhouette(&space, K_MIN, K_MAX, cfg.seed, &KMeansConfig::default())?;
            (
                sel.partition,
                Some(KSelection {
                    criterion: "silhouette".into(),
                    scores: sel.scores,
                }),
                FittedModel::Kmeans(sel.model),
                None,
            )
        }
        (ClustererChoice::Kmeans, KChoice::Fixed(k)) => {
            let (m, p) = kmeans_fit(&space, k, cfg.seed, KMeansConfig::default().n_init)?;
            (p, None, FittedModel::Kmeans(m), None)
        }
        (ClustererChoice::Gmm, k) => {
            let (model, selection) = match k {
                KChoice::Auto => {
                    let sel = select_k_bic(&space, K_MIN, K_MAX, cfg.seed)?;
                    (
                        sel.model,
                        Some(KSelection {
                            criterion: "bic".into(),
                            scores: sel.scores,
                        }),
                    )
                }
                KChoice::Fixed(k) => (gmm_fit(&space, k, cfg.seed, GMM_RESTARTS)?, None),
            };
            let bic = model.bic(space.n_samples());
            (
                gmm_assign(&model, &space)?,
                selection,
                FittedModel::Gmm(model),
                Some(bic),
            )
        }
        (ClustererChoice::Gpmix, _) => unreachable!("handled above"),
    };
    Ok(Fitted {
        partition,
        selection,
        model: ModelDocument::new(cfg.descriptor, pca, fitted),
        space,
        bic,
        validity: None,
    })
}

/// Cluster the feature rows per the configuration and score the partition.
pub fn cluster(features: &DataMatrix, cfg: &PipelineConfig) -> Result<ClusterOutcome> {
    let f = fit_clusters(features, cfg)?;
    let t = Instant::now();
    let validity = match f.validity {
        Some(v) => v,
        None => {
            let mut v = validity_report(&f.space, f.partition.labels(), cfg.seed)?;
            v.bic = f.bic;
            v
        }
    };
    Ok(ClusterOutcome {
        partition: f.partition,
        selection: f.selection,
        validity,
        model: f.model,
        space: f.space,
        validity_s: t.elapsed().as_secs_f64(),
    })
}

/// Report plus the in-memory artifacts needed for figures.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub model: ModelDocument,
    pub space: DataMatrix,
    pub contours: Vec<Vec<Point>>,
}

/// Ingest, extract, cluster and assemble the report.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let t0 = Instant::now();
    let set = ingest(cfg)?;
    let ingest_s = t0.elapsed().as_secs_f64();
    run_on_particles(cfg, &set, ingest_s)
}

/// Run everything after ingestion on an already loaded particle set.
pub fn run_on_particles(cfg: &PipelineConfig, set: &ParticleSet, ingest_s: f64) -> Result<RunOutput> {
    cfg.validate()?;
    let t1 = Instant::now();
    let extraction = extract_all(set, cfg.descriptor);
    let extraction_s = t1.elapsed().as_secs_f64();
    let n = extraction.particles.len();
    if n < cfg.min_particles() {
        return Err(Error::TooFewParticles {
            got: n,
            need: cfg.min_particles(),
        });
    }
    let features = DataMatrix::from_rows(
        &extraction
            .particles
            .iter()
            .map(|e| e.features.clone())
            .collect::<Vec<_>>(),
    )?;

    let t2 = Instant::now();
    let outcome = cluster(&features, cfg)?;
    let clustering_s = t2.elapsed().as_secs_f64() - outcome.validity_s;

    let labels = outcome.partition.labels();
    let truth: Option<Vec<usize>> = set
        .truth
        .as_ref()
        .map(|t| extraction.kept.iter().map(|&i| t[i]).collect());
    let ari_vs_truth = truth.as_ref().map(|t| adjusted_rand(labels, t)).transpose()?;
    let counts = outcome.partition.counts();
    let shares = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let particles = extraction
        .kept
        .iter()
        .zip(&extraction.particles)
        .enumerate()
        .map(|(row, (&i, e))| ParticleRecord {
            particle_id: i,
            source: set.sources[i].clone(),
            area: e.metrics.area,
            perimeter: e.metrics.perimeter,
            circularity: e.metrics.circularity,
            aspect_ratio: e.metrics.aspect_ratio,
            descriptor: e.features.clone(),
            label: labels[row],
            truth: truth.as_ref().map(|t| t[row]),
        })
        .collect();
    let mut skipped = set.skipped.clone();
    skipped.extend(extraction.skipped);
    let report = RunReport {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        n_particles: n,
        k: outcome.partition.k(),
        selection: outcome.selection,
        validity: outcome.validity,
        shares,
        ari_vs_truth,
        skipped,
        particles,
        timings: Timings {
            ingest_s,
            extraction_s,
            clustering_s,
            validity_s: outcome.validity_s,
            ms_per_particle: 1000.0 * (extraction_s + clustering_s) / n as f64,
        },
    };
    Ok(RunOutput {
        report,
        model: outcome.model,
        space: outcome.space,
        contours: extraction.particles.into_iter().map(|e| e.contour).collect(),
    })
}

/// Size rayon's global pool; `None` keeps one worker per logical core.
/// Only the first call in a process takes effect.
pub fn configure_threads(threads: Option<usize>) -> Result<()> {
    let Some(n) = threads else {
        return Ok(());
    };
    if n == 0 {
        return Err(Error::Config("threads must be at least 1".into()));
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::warn!("thread pool already initialised: {e}");
    }
    Ok(())
}

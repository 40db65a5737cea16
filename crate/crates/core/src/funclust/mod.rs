//! Functional clustering of radial profiles.
//!
//! Each 200-sample profile is smoothed into a cubic B-spline, projected onto
//! random Ornstein–Uhlenbeck paths, and clustered per projection by a
//! univariate Gaussian mixture. The base clusterings are fused through a
//! co-association matrix. Large collections are first reduced to k-means
//! prototypes; a nearest-centroid classifier then labels every curve.

mod bspline;
mod consensus;
mod projection;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bspline::{
    angle_grid, basis_row, clamped_knots, smooth_bspline, BsplineSmoother, FunctionalCurve, SPLINE_DEGREE,
};
pub use consensus::{
    base_clusterings, consensus, select_k_functional, ConsensusResult, FunctionalKSelection, COASSOCIATION_BUDGET,
};
pub use projection::{grid_inner_product, grid_sq_distance, ou_basis, project, project_values, ProjectionBasis};

use crate::clustering::{kmeans_fit_with, DataMatrix, KMeansConfig, Partition};
use crate::descriptors::RadialProfile;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::validity::{validity_report, ValidityReport};

/// Samples per radial profile on the functional path.
pub const FUNCTIONAL_SAMPLES: usize = 200;

// Sampling stream, distinct from restart and projection streams.
const SAMPLE_STREAM: u64 = 0x4859_4252;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunclustConfig {
    pub m_projections: usize,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    /// Fraction of curves drawn at random before prototype selection.
    pub r_frac: f64,
    /// Fraction of curves kept as k-means prototypes.
    pub k_frac: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub n_basis: usize,
    /// Collections up to this size are clustered directly, without sampling.
    pub exemplar_threshold: usize,
}

impl Default for FunclustConfig {
    fn default() -> Self {
        Self {
            m_projections: 12,
            ou_theta: 1.0,
            ou_sigma: 1.0,
            r_frac: 0.30,
            k_frac: 0.05,
            k_min: 2,
            k_max: 9,
            seed: 0,
            n_basis: 20,
            exemplar_threshold: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// An input curve used as is.
    Random,
    /// A k-means centroid refit as a spline.
    Prototype,
}

/// Curves on which consensus clustering runs.
#[derive(Debug, Clone)]
pub struct ExemplarSet {
    pub curves: Vec<FunctionalCurve>,
    /// Grid values, one row per exemplar.
    pub values: DataMatrix,
    pub provenance: Vec<Provenance>,
}

impl ExemplarSet {
    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }
}

fn grid_matrix(curves: &[FunctionalCurve], smoother: &BsplineSmoother) -> Result<DataMatrix> {
    let rows: Vec<Vec<f64>> = curves
        .par_iter()
        .map(|c| smoother.grid_values(c))
        .collect::<Result<_>>()?;
    DataMatrix::new(rows.len(), smoother.grid_len(), rows.into_iter().flatten().collect())
}

/// Draw round(r_frac·n) curves without replacement, run k-means with
/// K = round(k_frac·n) on their grid values and refit each centroid.
pub fn hybrid_sample(
    curves: &[FunctionalCurve],
    smoother: &BsplineSmoother,
    r_frac: f64,
    k_frac: f64,
    seed: u64,
) -> Result<ExemplarSet> {
    let n = curves.len();
    if n < 20 {
        return Err(Error::TooFewParticles { got: n, need: 20 });
    }
    if !(0.0..=1.0).contains(&r_frac) || !(0.0..=1.0).contains(&k_frac) {
        return Err(Error::InvalidArgument(format!(
            "sampling fractions must lie in [0, 1], got {r_frac} and {k_frac}"
        )));
    }
    let n_r = (r_frac * n as f64).round() as usize;
    let n_k = (k_frac * n as f64).round() as usize;
    if n_k > n_r || n_k == 0 {
        return Err(Error::InvalidFractions { n_r, n_k });
    }
    let mut rng = stream_rng(seed, SAMPLE_STREAM);
    let mut picked = sample(&mut rng, n, n_r).into_vec();
    picked.sort_unstable();
    let chosen: Vec<FunctionalCurve> = picked.iter().map(|&i| curves[i].clone()).collect();
    let values = grid_matrix(&chosen, smoother)?;
    let (model, _) = kmeans_fit_with(&values, n_k, seed, &KMeansConfig::default())?;
    let curves: Vec<FunctionalCurve> = model
        .centroids
        .iter()
        .map(|c| smoother.fit_values(c))
        .collect::<Result<_>>()?;
    let values = grid_matrix(&curves, smoother)?;
    Ok(ExemplarSet {
        provenance: vec![Provenance::Prototype; curves.len()],
        curves,
        values,
    })
}

/// Per-cluster mean curves; queries go to the nearest mean in L².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestCentroid {
    means: Vec<Vec<f64>>,
}

impl NearestCentroid {
    pub fn fit(values: &DataMatrix, labels: &Partition) -> Result<Self> {
        if values.n_samples() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: values.n_samples(),
                got: labels.len(),
            });
        }
        let counts = labels.counts();
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidArgument(format!("cluster {empty} has no exemplars")));
        }
        let mut means = vec![vec![0.0; values.n_features()]; labels.k()];
        for (row, &l) in values.rows().zip(labels.labels()) {
            for (m, v) in means[l].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= c as f64);
        }
        Ok(Self { means })
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    /// Label of the nearest mean; ties go to the lowest label.
    pub fn classify(&self, values: &[f64]) -> Result<usize> {
        let d = self.means.first().map_or(0, Vec::len);
        if values.len() != d {
            return Err(Error::GridMismatch {
                expected: d,
                got: values.len(),
            });
        }
        let mut best = (0, f64::INFINITY);
        for (j, m) in self.means.iter().enumerate() {
            let dist = grid_sq_distance(values, m);
            if dist < best.1 {
                best = (j, dist);
            }
        }
        Ok(best.0)
    }

    pub fn classify_all(&self, values: &DataMatrix) -> Result<Partition> {
        let labels = values
            .rows()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|r| self.classify(r))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(labels, self.means.len())
    }
}

/// Everything the functional pipeline produced.
#[derive(Debug, Clone)]
pub struct FunctionalResult {
    pub partition: Partition,
    pub validity: ValidityReport,
    pub k_selection: Option<FunctionalKSelection>,
    pub n_exemplars: usize,
    /// Side length of the co-association matrix; never exceeds `n_exemplars`.
    pub coassociation_n: usize,
    /// Grid values of every smoothed curve, one row per profile.
    pub curve_values: DataMatrix,
    pub classifier: NearestCentroid,
}

fn check_profile(p: &RadialProfile) -> Result<()> {
    if p.len() != FUNCTIONAL_SAMPLES {
        return Err(Error::GridMismatch {
            expected: FUNCTIONAL_SAMPLES,
            got: p.len(),
        });
    }
    if !p.is_normalized() || !p.is_aligned() {
        return Err(Error::ProfileNotNormalized);
    }
    Ok(())
}

/// Smooth, (optionally) reduce to exemplars, project, cluster by consensus
/// and extend labels to every profile. `k = None` selects K by summed BIC.
pub fn gpmix_pipeline(profiles: &[RadialProfile], k: Option<usize>, cfg: &FunclustConfig) -> Result<FunctionalResult> {
    profiles.iter().try_for_each(check_profile)?;
    let n = profiles.len();
    let smoother = BsplineSmoother::new(cfg.n_basis, FUNCTIONAL_SAMPLES)?;
    let curves: Vec<FunctionalCurve> = profiles.par_iter().map(|p| smoother.fit(p)).collect::<Result<_>>()?;
    let curve_values = grid_matrix(&curves, &smoother)?;

    let exemplars = if n > cfg.exemplar_threshold {
        hybrid_sample(&curves, &smoother, cfg.r_frac, cfg.k_frac, cfg.seed)?
    } else {
        ExemplarSet {
            provenance: vec![Provenance::Random; n],
            curves,
            values: curve_values.clone(),
        }
    };
    log::info!("functional clustering on {} of {n} curves", exemplars.len());

    let basis = ou_basis(
        cfg.m_projections,
        FUNCTIONAL_SAMPLES,
        cfg.ou_theta,
        cfg.ou_sigma,
        cfg.seed,
    )?;
    let coeff_rows: Vec<Vec<f64>> = exemplars
        .values
        .rows()
        .map(|r| project_values(r, &basis))
        .collect::<Result<_>>()?;
    let coeffs = DataMatrix::from_rows(&coeff_rows)?;

    let (k, k_selection) = match k {
        Some(k) => (k, None),
        None => {
            let sel = select_k_functional(&coeffs, cfg.k_min, cfg.k_max, cfg.seed)?;
            (sel.k, Some(sel))
        }
    };
    let base = base_clusterings(&coeffs, k, cfg.seed)?;
    if base.is_empty() {
        return Err(Error::DegenerateComponent);
    }
    let fused = consensus(&base, k)?;
    let classifier = NearestCentroid::fit(&exemplars.values, &fused.partition)?;
    let partition = classifier.classify_all(&curve_values)?;
    let validity = validity_report(&curve_values, partition.labels(), cfg.seed)?;
    Ok(FunctionalResult {
        partition,
        validity,
        k_selection,
        n_exemplars: exemplars.len(),
        coassociation_n: fused.coassociation_n,
        curve_values,
        classifier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curves(n: usize) -> (Vec<FunctionalCurve>, BsplineSmoother) {
        let s = BsplineSmoother::new(20, FUNCTIONAL_SAMPLES).unwrap();
        let grid = angle_grid(FUNCTIONAL_SAMPLES);
        let c = (0..n)
            .map(|i| {
                let a = 0.01 * i as f64;
                let v: Vec<f64> = grid.iter().map(|t| 1.0 + a * (2.0 * t).cos()).collect();
                s.fit_values(&v).unwrap()
            })
            .collect();
        (c, s)
    }

    #[test]
    fn default_fractions_give_five_percent() {
        let (c, s) = curves(1000);
        let e = hybrid_sample(&c, &s, 0.30, 0.05, 1).unwrap();
        assert_eq!(e.len(), 50);
        assert!(e.provenance.iter().all(|&p| p == Provenance::Prototype));
    }

    #[test]
    fn full_sampling_returns_the_originals() {
        let (c, s) = curves(20);
        let e = hybrid_sample(&c, &s, 1.0, 1.0, 3).unwrap();
        assert_eq!(e.len(), 20);
        for ex in &e.curves {
            let hit = c.iter().any(|o| {
                o.coefficients()
                    .iter()
                    .zip(ex.coefficients())
                    .all(|(a, b)| (a - b).abs() < 1e-9)
            });
            assert!(hit);
        }
    }

    #[test]
    fn invalid_fractions() {
        let (c, s) = curves(100);
        assert!(matches!(
            hybrid_sample(&c, &s, 0.05, 0.30, 0),
            Err(Error::InvalidFractions { n_r: 5, n_k: 30 })
        ));
        assert!(hybrid_sample(&c[..10], &s, 0.3, 0.05, 0).is_err());
    }

    #[test]
    fn classifier_ties_and_shift() {
        let values = DataMatrix::from_rows(&[vec![0.0; 4], vec![2.0; 4], vec![4.0; 4]]).unwrap();
        let labels = Partition::new(vec![0, 1, 1], 2).unwrap();
        let nc = NearestCentroid::fit(&values, &labels).unwrap();
        assert_eq!(nc.means()[1], vec![3.0; 4]);
        assert_eq!(nc.classify(&[3.0; 4]).unwrap(), 1);
        assert_eq!(nc.classify(&[1.5; 4]).unwrap(), 0);
        assert_eq!(nc.classify(&[1.4; 4]).unwrap(), 0);
        assert_eq!(nc.classify(&[1.6; 4]).unwrap(), 1);
        assert!(nc.classify(&[0.0; 3]).is_err());
    }

    #[test]
    fn rejects_raw_profiles() {
        let p = RadialProfile::from_samples(vec![1.0; FUNCTIONAL_SAMPLES], false, false);
        assert!(matches!(
            gpmix_pipeline(&[p], None, &FunclustConfig::default()),
            Err(Error::ProfileNotNormalized)
        ));
    }
}

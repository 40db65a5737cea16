//! Translation-, rotation- and scale-invariant shape descriptors.
//!
//! Three families are produced from a segmented particle:
//!
//! * [`cdf_descriptor`]: the centroid distance function sampled at 100
//!   angles, mean-normalized and cyclically aligned at its longest radius.
//! * [`fd_descriptor`]: magnitudes of the complex Fourier coefficients of the
//!   arclength-resampled boundary, harmonics -5..=5 without the DC term.
//! * [`zm_descriptor`]: Zernike moment magnitudes up to order 5.
//!
//! [`shape_metrics`] adds circularity and Feret aspect ratio, which are used
//! as external sanity checks on the clusters rather than as features.

mod fourier;
mod metrics;
mod profile;
mod zernike;

use serde::{Deserialize, Serialize};

pub use fourier::{
    canonical_start, contour_resample, fd_descriptor, fourier_descriptor, fourier_spectrum, reconstruct_contour,
    ComplexSpectrum, FD_HARMONICS, FD_RESAMPLE_POINTS,
};
pub use metrics::{feret_diameters, pixel_corners, shape_metrics, ShapeMetrics};
pub use profile::{
    align_profile, align_profile_stable, cdf_descriptor, cdf_fourier_magnitudes, normalize_profile, radial_profile,
    RadialProfile, ALIGN_TOLERANCE, CDF_SAMPLES,
};
pub use zernike::{basis_inner_product, zernike_indices, zernike_moments, zernike_radial, zm_descriptor, ZM_MAX_ORDER};

use crate::error::{Error, Result};

/// Which descriptor family a vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    Cdf100,
    Fd10,
    Zm12,
}

impl DescriptorKind {
    /// Number of values in a vector of this kind.
    pub fn dim(self) -> usize {
        match self {
            DescriptorKind::Cdf100 => 100,
            DescriptorKind::Fd10 => 10,
            DescriptorKind::Zm12 => 12,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::Cdf100 => "cdf100",
            DescriptorKind::Fd10 => "fd10",
            DescriptorKind::Zm12 => "zm12",
        }
    }

    /// CSV headers: `cdf_000..cdf_099`, `fd_m5..fd_p5`, `zm_0_0..zm_5_5`.
    pub fn column_names(self) -> Vec<String> {
        match self {
            DescriptorKind::Cdf100 => (0..100).map(|i| format!("cdf_{i:03}")).collect(),
            DescriptorKind::Fd10 => (1..=5)
                .rev()
                .map(|i| format!("fd_m{i}"))
                .chain((1..=5).map(|i| format!("fd_p{i}")))
                .collect(),
            DescriptorKind::Zm12 => zernike_indices(ZM_MAX_ORDER)
                .into_iter()
                .map(|(n, m)| format!("zm_{n}_{m}"))
                .collect(),
        }
    }
}

/// Fixed-length, finite feature vector of one [`DescriptorKind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    kind: DescriptorKind,
    values: Vec<f64>,
}

impl DescriptorVector {
    pub fn new(kind: DescriptorKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: kind.dim(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{} descriptor has non-finite values",
                kind.name()
            )));
        }
        Ok(Self { kind, values })
    }

    pub fn kind(&self) -> DescriptorKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Largest absolute coordinate difference.
    pub fn linf(&self, other: &DescriptorVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

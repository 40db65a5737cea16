use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{DescriptorKind, DescriptorVector};
use crate::error::{Error, Result};
use crate::mask::{BinaryMask, Centroid};

pub const CDF_SAMPLES: usize = 100;

const MARCH_STEP: f64 = 0.25;
const REFINE_TOL: f64 = 0.01;

/// Centroid distance function D(θ_k) at θ_k = 2πk/n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    samples: Vec<f64>,
    normalized: bool,
    aligned: bool,
}

impl RadialProfile {
    /// Wrap raw samples; flags describe what has already been applied.
    pub fn from_samples(samples: Vec<f64>, normalized: bool, aligned: bool) -> Self {
        Self {
            samples,
            normalized,
            aligned,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_aligned(&self) -> bool {
        self.aligned
    }
}

const EDGE_EPS: f64 = 1e-9;

/// Pixel indices whose closed unit square contains coordinate `v`.
#[inline]
fn cover(v: f64) -> (i64, i64) {
    ((v - 0.5 - EDGE_EPS).ceil() as i64, (v + 0.5 + EDGE_EPS).floor() as i64)
}

/// Membership in the union of closed foreground squares, so points on a
/// shared pixel edge count as inside whichever side is foreground.
#[inline]
fn inside(mask: &BinaryMask, x: f64, y: f64) -> bool {
    let (x0, x1) = cover(x);
    let (y0, y1) = cover(y);
    (y0..=y1).any(|py| (x0..=x1).any(|px| mask.get(px, py)))
}

/// Unit direction of ray k of n; built by exact quarter-turns when n is a
/// multiple of 4 so rotated masks see exactly rotated rays.
fn ray_direction(k: usize, n: usize) -> (f64, f64) {
    if !n.is_multiple_of(4) {
        let t = TAU * k as f64 / n as f64;
        return (t.cos(), t.sin());
    }
    let q = n / 4;
    let t = TAU * (k % q) as f64 / n as f64;
    let (c, s) = (t.cos(), t.sin());
    match (k / q) % 4 {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// Largest radius along each of `n` rays whose endpoint is still foreground.
///
/// Rays are marched in quarter-pixel steps out to the bounding extent, then
/// the last inside/outside bracket is bisected down to 0.01 px.
pub fn radial_profile(mask: &BinaryMask, c: Centroid, n: usize) -> Result<RadialProfile> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 rays, got {n}")));
    }
    if !inside(mask, c.x, c.y) {
        return Err(Error::CentroidExterior);
    }
    // no foreground pixel square reaches beyond its centre distance + √2/2
    let reach = mask
        .foreground()
        .map(|(x, y)| (x as f64 - c.x).hypot(y as f64 - c.y))
        .fold(0.0, f64::max)
        + 1.0;
    let steps = (reach / MARCH_STEP).ceil() as usize;

    let samples = (0..n)
        .map(|k| {
            let (dx, dy) = ray_direction(k, n);
            let at = |r: f64| inside(mask, c.x + r * dx, c.y + r * dy);
            let last_in = (1..=steps)
                .rev()
                .map(|i| i as f64 * MARCH_STEP)
                .find(|&r| at(r))
                .unwrap_or(0.0);
            let (mut lo, mut hi) = (last_in, last_in + MARCH_STEP);
            while hi - lo > REFINE_TOL {
                let mid = 0.5 * (lo + hi);
                if at(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        })
        .collect();
    Ok(RadialProfile::from_samples(samples, false, false))
}

/// Divide by the sample mean.
pub fn normalize_profile(p: &RadialProfile) -> RadialProfile {
    let mean = p.samples.iter().sum::<f64>() / p.samples.len() as f64;
    RadialProfile {
        samples: p.samples.iter().map(|d| d / mean).collect(),
        normalized: true,
        aligned: p.aligned,
    }
}

/// Rotate cyclically so the first sample is the maximum (earliest on ties).
pub fn align_profile(p: &RadialProfile) -> RadialProfile {
    let start = p
        .samples
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |best, (i, &v)| if v > best.1 { (i, v) } else { best },
        )
        .0;
    let mut samples = p.samples.clone();
    samples.rotate_left(start);
    RadialProfile {
        samples,
        normalized: p.normalized,
        aligned: true,
    }
}

/// Near-tie width used when aligning rasterized profiles, in units of the
/// normalized mean radius; a few times the ray-marching precision.
pub const ALIGN_TOLERANCE: f64 = 2e-3;

/// Cyclic shift for rasterized profiles whose maxima may be near-tied.
///
/// Candidates are the samples within `tol` of the maximum. Two candidates are
/// compared by their continuations: the first position where they differ by
/// more than `tol` decides, the larger value winning. Continuations equal
/// within `tol` keep the lower index. Mirror-symmetric shapes with two
/// near-equal extremes therefore align the same way whichever of the two is
/// marginally longer after rasterization.
pub fn align_profile_stable(p: &RadialProfile, tol: f64) -> RadialProfile {
    let s = &p.samples;
    let n = s.len();
    let top = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<usize> = None;
    for i in (0..n).filter(|&i| s[i] >= top - tol) {
        best = match best {
            None => Some(i),
            Some(b) => {
                let decided = (0..n)
                    .map(|j| (s[(i + j) % n], s[(b + j) % n]))
                    .find(|(x, y)| (x - y).abs() > tol);
                match decided {
                    Some((x, y)) if x > y => Some(i),
                    _ => Some(b),
                }
            }
        };
    }
    let mut samples = s.clone();
    samples.rotate_left(best.unwrap_or(0));
    RadialProfile {
        samples,
        normalized: p.normalized,
        aligned: true,
    }
}

/// 100 mean-normalized centroid distances, aligned with
/// [`align_profile_stable`].
pub fn cdf_descriptor(mask: &BinaryMask, c: Centroid) -> Result<DescriptorVector> {
    let profile = align_profile_stable(
        &normalize_profile(&radial_profile(mask, c, CDF_SAMPLES)?),
        ALIGN_TOLERANCE,
    );
    DescriptorVector::new(DescriptorKind::Cdf100, profile.into_samples())
}

/// |c_1| .. |c_k| of the profile's discrete Fourier series
/// c_j = (1/N) Σ D_k e^{-ijθ_k}.
pub fn cdf_fourier_magnitudes(p: &RadialProfile, k: usize) -> Result<Vec<f64>> {
    if !p.normalized {
        return Err(Error::ProfileNotNormalized);
    }
    let n = p.samples.len();
    if 2 * k >= n {
        return Err(Error::HarmonicOutOfRange {
            requested: k,
            limit: n.div_ceil(2) - 1,
        });
    }
    Ok((1..=k)
        .map(|j| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &d) in p.samples.iter().enumerate() {
                let phase = TAU * ((j * t) % n) as f64 / n as f64;
                re += d * phase.cos();
                im -= d * phase.sin();
            }
            re.hypot(im) / n as f64
        })
        .collect())
}

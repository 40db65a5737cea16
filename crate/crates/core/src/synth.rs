//! Labeled synthetic particles for ground-truth validation.
//!
//! Four morphology classes are drawn from analytic shapes and rasterized at
//! pixel centres: near-spherical particles, spheres carrying small fused
//! satellites, lobed agglomerates of overlapping disks, and capsule-shaped
//! rods. Every random choice comes from the spec's seed, so a spec always
//! renders to the same mask.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::descriptors::{align_profile, normalize_profile, RadialProfile};
use crate::error::{Error, Result};
use crate::mask::{largest_component, BinaryMask};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticleClass {
    Sphere,
    Satellited,
    Lobed,
    Rod,
}

impl ParticleClass {
    pub const ALL: [ParticleClass; 4] = [Self::Sphere, Self::Satellited, Self::Lobed, Self::Rod];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sphere => "sphere",
            Self::Satellited => "satellited",
            Self::Lobed => "lobed",
            Self::Rod => "rod",
        }
    }
}

impl fmt::Display for ParticleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One synthetic particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub class: ParticleClass,
    pub image_size: usize,
    /// Pixels; sets the overall particle size for every class.
    pub base_radius: f64,
    /// Relative amplitude of the harmonic outline perturbation.
    pub noise_amp: f64,
    pub seed: u64,
    /// Length/width of a rod; drawn from [3, 6] when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rod_ratio: Option<f64>,
}

impl SyntheticSpec {
    pub fn new(class: ParticleClass, base_radius: f64, noise_amp: f64, seed: u64) -> Self {
        Self {
            class,
            image_size: 128,
            base_radius,
            noise_amp,
            seed,
            rod_ratio: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let max_r = self.image_size as f64 / 2.0 - 2.0;
        if !(self.base_radius > 0.0 && self.base_radius <= max_r) {
            return Err(Error::InvalidArgument(format!(
                "base radius {} outside (0, {max_r}]",
                self.base_radius
            )));
        }
        if !(0.0..=0.5).contains(&self.noise_amp) {
            return Err(Error::InvalidArgument(format!(
                "noise amplitude {} outside [0, 0.5]",
                self.noise_amp
            )));
        }
        if let Some(q) = self.rod_ratio {
            if !(q >= 1.0 && q.is_finite()) {
                return Err(Error::InvalidArgument(format!("rod ratio {q} must be at least 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Disk {
    x: f64,
    y: f64,
    r: f64,
}

impl Disk {
    fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.x).powi(2) + (y - self.y).powi(2) <= self.r * self.r
    }
}

/// Outline r(θ) = R(1 + Σ a_j cos(jθ + φ_j)) around the origin.
#[derive(Debug, Clone)]
struct Star {
    radius: f64,
    harmonics: Vec<(f64, f64, f64)>,
}

impl Star {
    fn radius_at(&self, theta: f64) -> f64 {
        let wobble: f64 = self
            .harmonics
            .iter()
            .map(|&(j, a, phi)| a * (j * theta + phi).cos())
            .sum();
        self.radius * (1.0 + wobble)
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let r2 = x * x + y * y;
        let spread: f64 = self.harmonics.iter().map(|h| h.1.abs()).sum();
        if r2 > (self.radius * (1.0 + spread)).powi(2) {
            return false;
        }
        if r2 < (self.radius * (1.0 - spread)).max(0.0).powi(2) {
            return true;
        }
        r2 <= self.radius_at(y.atan2(x)).powi(2)
    }
}

/// Analytic particle in its own frame.
#[derive(Debug, Clone, Default)]
struct Shape {
    star: Option<Star>,
    disks: Vec<Disk>,
    /// Segment from (−h, 0) to (h, 0) thickened by the radius.
    capsule: Option<(f64, f64)>,
    /// Frame origin used as the rotation centre.
    centre: (f64, f64),
    orientation: f64,
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        self.star.as_ref().is_some_and(|s| s.contains(x, y))
            || self.disks.iter().any(|d| d.contains(x, y))
            || self.capsule.is_some_and(|(h, r)| {
                let dx = (x.abs() - h).max(0.0);
                dx * dx + y * y <= r * r
            })
    }
}

/// Angular gap between neighbouring satellites, radians.
const SATELLITE_SPACING: f64 = 0.7;

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn perturbed_sphere(rng: &mut ChaCha8Rng, radius: f64, noise: f64) -> Star {
    let harmonics = (2..=4)
        .map(|j| (j as f64, noise * uniform(rng, -1.0, 1.0), uniform(rng, 0.0, TAU)))
        .collect();
    Star { radius, harmonics }
}

fn build_shape(spec: &SyntheticSpec) -> Shape {
    let mut rng = stream_rng(spec.seed, 0);
    let r = spec.base_radius;
    let orientation = uniform(&mut rng, 0.0, TAU);
    let mut shape = Shape {
        orientation,
        ..Shape::default()
    };
    match spec.class {
        ParticleClass::Sphere => {
            shape.star = Some(perturbed_sphere(&mut rng, r, spec.noise_amp));
        }
        ParticleClass::Satellited => {
            let star = perturbed_sphere(&mut rng, r, spec.noise_amp);
            let count = rng.random_range(1..=3);
            let start = uniform(&mut rng, 0.0, TAU);
            for i in 0..count {
                // satellites sit side by side on one flank of the sphere
                let theta = start + SATELLITE_SPACING * i as f64 + uniform(&mut rng, -0.1, 0.1);
                let rho = r * uniform(&mut rng, 0.15, 0.25);
                // nearly tangent; the small overlap keeps the raster connected
                let dist = star.radius_at(theta) + 0.9 * rho;
                shape.disks.push(Disk {
                    x: dist * theta.cos(),
                    y: dist * theta.sin(),
                    r: rho,
                });
            }
            shape.star = Some(star);
        }
        ParticleClass::Lobed => {
            let count = rng.random_range(2..=3);
            let mut heading = 0.0;
            let mut prev = Disk {
                x: 0.0,
                y: 0.0,
                r: r * uniform(&mut rng, 0.55, 0.75),
            };
            shape.disks.push(prev);
            for _ in 1..count {
                let d = r * uniform(&mut rng, 0.7, 1.1);
                heading += uniform(&mut rng, -PI / 3.0, PI / 3.0);
                let next = Disk {
                    x: prev.x + d * heading.cos(),
                    y: prev.y + d * heading.sin(),
                    r: r * uniform(&mut rng, 0.55, 0.75),
                };
                shape.disks.push(next);
                prev = next;
            }
            let (x0, x1) = shape
                .disks
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| {
                    (a.min(d.x - d.r), b.max(d.x + d.r))
                });
            let (y0, y1) = shape
                .disks
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| {
                    (a.min(d.y - d.r), b.max(d.y + d.r))
                });
            shape.centre = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        }
        ParticleClass::Rod => {
            let q = spec.rod_ratio.unwrap_or_else(|| uniform(&mut rng, 3.0, 6.0));
            let length = 3.2 * r;
            let width = length / q;
            shape.capsule = Some((length / 2.0 - width / 2.0, width / 2.0));
        }
    }
    shape
}

/// Rasterize the spec's particle, additionally rotated by `rotation`
/// radians and scaled by `scale` (the canvas grows with the scale).
pub fn render_particle(spec: &SyntheticSpec, rotation: f64, scale: f64) -> Result<BinaryMask> {
    spec.validate()?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale {scale} must be positive")));
    }
    let shape = build_shape(spec);
    let side = (spec.image_size as f64 * scale).ceil() as usize;
    let half = side as f64 / 2.0;
    let (s, c) = (-(shape.orientation + rotation)).sin_cos();
    let mask = BinaryMask::from_fn(side, side, |x, y| {
        let (u, v) = ((x as f64 + 0.5 - half) / scale, (y as f64 + 0.5 - half) / scale);
        let (lx, ly) = (c * u - s * v, s * u + c * v);
        shape.contains(lx + shape.centre.0, ly + shape.centre.1)
    })?;
    Ok(largest_component(&mask))
}

pub fn generate_particle(spec: &SyntheticSpec) -> Result<BinaryMask> {
    render_particle(spec, 0.0, 1.0)
}

/// Particle counts and master seed for a labeled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub sphere: usize,
    pub satellited: usize,
    pub lobed: usize,
    pub rod: usize,
    pub seed: u64,
    #[serde(default = "default_image_size")]
    pub image_size: usize,
}

fn default_image_size() -> usize {
    128
}

impl DatasetSpec {
    pub fn balanced(per_class: usize, seed: u64) -> Self {
        Self {
            sphere: per_class,
            satellited: per_class,
            lobed: per_class,
            rod: per_class,
            seed,
            image_size: default_image_size(),
        }
    }

    pub fn count(&self, class: ParticleClass) -> usize {
        match class {
            ParticleClass::Sphere => self.sphere,
            ParticleClass::Satellited => self.satellited,
            ParticleClass::Lobed => self.lobed,
            ParticleClass::Rod => self.rod,
        }
    }

    pub fn total(&self) -> usize {
        ParticleClass::ALL.iter().map(|&c| self.count(c)).sum()
    }
}

/// Size and noise ranges used when drawing dataset particles.
pub const RADIUS_RANGE: (f64, f64) = (22.0, 30.0);
pub const NOISE_RANGE: (f64, f64) = (0.0, 0.03);

// Stream ids for the master generator.
const PARAM_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;

/// Particle specs for a dataset in shuffled order; the class of each spec is
/// its ground-truth label.
pub fn dataset_specs(ds: &DatasetSpec) -> Result<Vec<SyntheticSpec>> {
    if ParticleClass::ALL.iter().any(|&c| ds.count(c) == 0) {
        return Err(Error::InvalidArgument("every class needs at least one particle".into()));
    }
    let mut rng = stream_rng(ds.seed, PARAM_STREAM);
    let scale = ds.image_size as f64 / 128.0;
    let mut specs = Vec::with_capacity(ds.total());
    for class in ParticleClass::ALL {
        for _ in 0..ds.count(class) {
            let spec = SyntheticSpec {
                class,
                image_size: ds.image_size,
                base_radius: scale * uniform(&mut rng, RADIUS_RANGE.0, RADIUS_RANGE.1),
                noise_amp: uniform(&mut rng, NOISE_RANGE.0, NOISE_RANGE.1),
                seed: rng.random(),
                rod_ratio: None,
            };
            spec.validate()?;
            specs.push(spec);
        }
    }
    specs.shuffle(&mut stream_rng(ds.seed, SHUFFLE_STREAM));
    Ok(specs)
}

/// Rendered masks with their class labels.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub specs: Vec<SyntheticSpec>,
    pub masks: Vec<BinaryMask>,
}

impl SyntheticDataset {
    pub fn labels(&self) -> Vec<usize> {
        self.specs.iter().map(|s| s.class.index()).collect()
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }
}

pub fn generate_dataset(ds: &DatasetSpec) -> Result<SyntheticDataset> {
    use rayon::prelude::*;
    let specs = dataset_specs(ds)?;
    let masks = specs.par_iter().map(generate_particle).collect::<Result<_>>()?;
    Ok(SyntheticDataset { specs, masks })
}

/// File name of the `i`-th exported particle.
pub fn particle_file_name(i: usize) -> String {
    format!("particle_{i:06}.pgm")
}

/// Write every mask as a binary PGM (particle dark on light) and a
/// `labels.csv` with file name, class index and class name.
pub fn export_dataset(data: &SyntheticDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut csv = String::from("file,label,class\n");
    for (i, (spec, mask)) in data.specs.iter().zip(&data.masks).enumerate() {
        let name = particle_file_name(i);
        fs::write(dir.join(&name), mask.to_pgm())?;
        csv.push_str(&format!("{name},{},{}\n", spec.class.index(), spec.class));
    }
    fs::write(dir.join("labels.csv"), csv)?;
    Ok(())
}

// Larger harmonics move the arg-max off the two-lobe crest by a few samples
// either side, which splits that family in two after alignment.
const FAMILY_WOBBLE: f64 = 0.01;

/// Two families of 200-sample radial profiles: nearly flat ones and deep
/// two-lobe ones (1 + a·cos 2θ with a ~ N(0.325, 0.03²)), both carrying
/// harmonics 3..=6 of amplitude up to 0.01. Returned normalized and
/// aligned, interleaved, with labels 0 (flat) and 1 (two-lobe).
pub fn profile_families(per_family: usize, seed: u64) -> (Vec<RadialProfile>, Vec<usize>) {
    let n = 200;
    let mut rng = stream_rng(seed, PARAM_STREAM);
    let mut profiles = Vec::with_capacity(2 * per_family);
    let mut labels = Vec::with_capacity(2 * per_family);
    for i in 0..2 * per_family {
        let family = i % 2;
        let depth = if family == 1 {
            let z: f64 = StandardNormal.sample(&mut rng);
            0.325 + 0.03 * z
        } else {
            0.0
        };
        let wobble: Vec<(f64, f64, f64)> = (3..=6)
            .map(|j| {
                (
                    j as f64,
                    FAMILY_WOBBLE * uniform(&mut rng, -1.0, 1.0),
                    uniform(&mut rng, 0.0, TAU),
                )
            })
            .collect();
        let phase = uniform(&mut rng, 0.0, TAU);
        let samples: Vec<f64> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                let jitter: f64 = StandardNormal.sample(&mut rng);
                1.0 + depth * (2.0 * (t + phase)).cos()
                    + wobble.iter().map(|&(j, a, p)| a * (j * t + p).cos()).sum::<f64>()
                    + 0.005 * jitter
            })
            .collect();
        let p = RadialProfile::from_samples(samples, false, false);
        profiles.push(align_profile(&normalize_profile(&p)));
        labels.push(family);
    }
    (profiles, labels)
}

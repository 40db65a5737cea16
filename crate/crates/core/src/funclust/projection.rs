use std::f64::consts::TAU;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::FunctionalCurve;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

// Keeps OU streams apart from the clustering restarts drawn from the same seed.
const OU_STREAM_TAG: u64 = 0x4F55 << 32;

/// Random projection functions sampled on a shared uniform angle grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBasis {
    pub seed: u64,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    /// m × grid values.
    values: Vec<Vec<f64>>,
}

impl ProjectionBasis {
    /// Wrap precomputed functions; all must share one grid length.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.first().map_or(0, Vec::len);
        if let Some(bad) = values.iter().find(|v| v.len() != n) {
            return Err(Error::GridMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite projection function".into()));
        }
        Ok(Self {
            seed: 0,
            ou_theta: f64::NAN,
            ou_sigma: f64::NAN,
            values,
        })
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn grid_len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn function(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    pub fn functions(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// `m` Ornstein–Uhlenbeck paths on the `grid_n`-point angle grid, each
/// started from the stationary law and advanced with the exact transition.
pub fn ou_basis(m: usize, grid_n: usize, theta: f64, sigma: f64, seed: u64) -> Result<ProjectionBasis> {
    if !(theta > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "OU parameters must be positive, got theta = {theta}, sigma = {sigma}"
        )));
    }
    if grid_n < 2 {
        return Err(Error::InvalidArgument("OU grid needs at least 2 points".into()));
    }
    let dt = TAU / grid_n as f64;
    let decay = (-theta * dt).exp();
    let step_sd = sigma * ((1.0 - (-2.0 * theta * dt).exp()) / (2.0 * theta)).sqrt();
    let stationary_sd = sigma / (2.0 * theta).sqrt();
    let values = (0..m as u64)
        .map(|j| {
            let mut rng = stream_rng(seed, OU_STREAM_TAG + j);
            let z: f64 = StandardNormal.sample(&mut rng);
            let mut x = stationary_sd * z;
            let mut path = Vec::with_capacity(grid_n);
            path.push(x);
            for _ in 1..grid_n {
                let xi: f64 = StandardNormal.sample(&mut rng);
                x = x * decay + step_sd * xi;
                path.push(x);
            }
            path
        })
        .collect();
    Ok(ProjectionBasis {
        seed,
        ou_theta: theta,
        ou_sigma: sigma,
        values,
    })
}

/// ∫ f g dθ over [0, 2π) by the trapezoid rule on a uniform periodic grid.
pub fn grid_inner_product(f: &[f64], g: &[f64]) -> f64 {
    let dt = TAU / f.len() as f64;
    dt * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
}

/// Squared L² distance under the same quadrature.
pub fn grid_sq_distance(f: &[f64], g: &[f64]) -> f64 {
    let dt = TAU / f.len() as f64;
    dt * f.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// Projection coefficients of grid-sampled curve values.
pub fn project_values(values: &[f64], b: &ProjectionBasis) -> Result<Vec<f64>> {
    if values.len() != b.grid_len() {
        return Err(Error::GridMismatch {
            expected: b.grid_len(),
            got: values.len(),
        });
    }
    Ok(b.functions().iter().map(|f| grid_inner_product(values, f)).collect())
}

pub fn project(c: &FunctionalCurve, b: &ProjectionBasis) -> Result<Vec<f64>> {
    project_values(&c.sample(b.grid_len()), b)
}

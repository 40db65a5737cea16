use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::descriptors::RadialProfile;
use crate::error::{Error, Result};

pub const SPLINE_DEGREE: usize = 3;

/// θ_i = 2πi/n, i = 0..n.
pub fn angle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// Clamped knot vector on [0, 2π] with uniformly spaced interior knots.
pub fn clamped_knots(n_basis: usize, degree: usize) -> Vec<f64> {
    let n_interior = n_basis - degree - 1;
    let mut knots = vec![0.0; degree + 1];
    knots.extend((1..=n_interior).map(|j| TAU * j as f64 / (n_interior + 1) as f64));
    knots.extend(std::iter::repeat_n(TAU, degree + 1));
    knots
}

/// Values of all `knots.len() − degree − 1` basis functions at `x`
/// (Cox–de Boor). Points at the right end belong to the last span.
pub fn basis_row(knots: &[f64], degree: usize, x: f64) -> Vec<f64> {
    let n_basis = knots.len() - degree - 1;
    let x = x.clamp(knots[degree], knots[n_basis]);
    let mut span = degree;
    while span + 1 < n_basis && knots[span + 1] <= x {
        span += 1;
    }
    let mut n = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    n[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let tmp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        n[j] = saved;
    }
    let mut row = vec![0.0; n_basis];
    row[span - degree..=span].copy_from_slice(&n);
    row
}

/// Cubic open B-spline on [0, 2π].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalCurve {
    coefficients: Vec<f64>,
    knots: Vec<f64>,
    degree: usize,
}

impl FunctionalCurve {
    pub fn new(coefficients: Vec<f64>, knots: Vec<f64>, degree: usize) -> Result<Self> {
        if knots.len() != coefficients.len() + degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} knots cannot carry {} degree-{degree} coefficients",
                knots.len(),
                coefficients.len()
            )));
        }
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("knot vector must be non-decreasing".into()));
        }
        Ok(Self {
            coefficients,
            knots,
            degree,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        basis_row(&self.knots, self.degree, theta)
            .iter()
            .zip(&self.coefficients)
            .map(|(b, c)| b * c)
            .sum()
    }

    /// Values on [`angle_grid`]`(n)`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        angle_grid(n).into_iter().map(|t| self.evaluate(t)).collect()
    }
}

/// Least-squares B-spline fitter for profiles on a fixed angle grid. The
/// projector is factored once and reused for every curve.
#[derive(Debug, Clone)]
pub struct BsplineSmoother {
    knots: Vec<f64>,
    grid_n: usize,
    design: DMatrix<f64>,
    projector: DMatrix<f64>,
}

impl BsplineSmoother {
    pub fn new(n_basis: usize, grid_n: usize) -> Result<Self> {
        if n_basis < SPLINE_DEGREE + 1 || grid_n < n_basis {
            return Err(Error::InvalidArgument(format!(
                "cannot fit {n_basis} cubic basis functions to {grid_n} samples"
            )));
        }
        let knots = clamped_knots(n_basis, SPLINE_DEGREE);
        let grid = angle_grid(grid_n);
        let design = DMatrix::from_fn(grid_n, n_basis, |i, j| basis_row(&knots, SPLINE_DEGREE, grid[i])[j]);
        let projector = design
            .clone()
            .svd(true, true)
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(Self {
            knots,
            grid_n,
            design,
            projector,
        })
    }

    pub fn grid_len(&self) -> usize {
        self.grid_n
    }

    pub fn fit_values(&self, values: &[f64]) -> Result<FunctionalCurve> {
        if values.len() != self.grid_n {
            return Err(Error::GridMismatch {
                expected: self.grid_n,
                got: values.len(),
            });
        }
        let coefficients = (&self.projector * nalgebra::DVector::from_column_slice(values))
            .iter()
            .copied()
            .collect();
        FunctionalCurve::new(coefficients, self.knots.clone(), SPLINE_DEGREE)
    }

    pub fn fit(&self, p: &RadialProfile) -> Result<FunctionalCurve> {
        self.fit_values(p.samples())
    }

    /// Curve values on this smoother's grid (faster than point evaluation).
    pub fn grid_values(&self, c: &FunctionalCurve) -> Result<Vec<f64>> {
        if c.knots() != self.knots.as_slice() {
            return Err(Error::InvalidArgument("curve uses a different knot vector".into()));
        }
        Ok((&self.design * nalgebra::DVector::from_column_slice(c.coefficients()))
            .iter()
            .copied()
            .collect())
    }
}

/// One-off least-squares fit of a profile on the uniform grid of its own length.
pub fn smooth_bspline(p: &RadialProfile, n_basis: usize) -> Result<FunctionalCurve> {
    BsplineSmoother::new(n_basis, p.len())?.fit(p)
}

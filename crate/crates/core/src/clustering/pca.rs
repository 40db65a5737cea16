use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::DataMatrix;
use crate::error::{Error, Result};

// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

/// Principal axes of mean-centred data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// n_components × n_features, orthonormal rows.
    pub components: Vec<Vec<f64>>,
    /// Per-component variance (n - 1 denominator).
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }
}

/// Top right-singular vectors of the centred data. Each component is signed
/// so that its largest-magnitude entry is positive.
pub fn pca_fit(x: &DataMatrix, n_components: usize) -> Result<PcaModel> {
    let (n, d) = (x.n_samples(), x.n_features());
    if n_components == 0 || n < 2 || n_components > (n - 1).min(d) {
        return Err(Error::InvalidArgument(format!(
            "{n_components} components requested for {n}×{d} data"
        )));
    }
    let mean = x.column_means();
    let centred = DMatrix::from_fn(n, d, |i, j| x.row(i)[j] - mean[j]);
    let svd = centred.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let s_max = sv[order[0]];
    let rank = order.iter().filter(|&&i| sv[i] > RANK_TOL * s_max).count();
    if n_components > rank {
        return Err(Error::RankDeficient {
            requested: n_components,
            rank,
        });
    }

    let total: f64 = sv.iter().map(|s| s * s).sum();
    let mut components = Vec::with_capacity(n_components);
    let mut explained_variance = Vec::with_capacity(n_components);
    let mut explained_variance_ratio = Vec::with_capacity(n_components);
    for &i in order.iter().take(n_components) {
        let mut row: Vec<f64> = v_t.row(i).iter().copied().collect();
        let pivot = row
            .iter()
            .enumerate()
            .fold(
                (0, 0.0f64),
                |best, (j, v)| if v.abs() > best.1 { (j, v.abs()) } else { best },
            )
            .0;
        if row[pivot] < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(row);
        explained_variance.push(sv[i] * sv[i] / (n - 1) as f64);
        explained_variance_ratio.push(sv[i] * sv[i] / total);
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        explained_variance_ratio,
    })
}

/// (X − mean)·componentsᵀ.
pub fn pca_transform(m: &PcaModel, x: &DataMatrix) -> Result<DataMatrix> {
    if x.n_features() != m.n_features() {
        return Err(Error::DimensionMismatch {
            expected: m.n_features(),
            got: x.n_features(),
        });
    }
    let mut out = Vec::with_capacity(x.n_samples() * m.n_components());
    for row in x.rows() {
        for comp in &m.components {
            out.push(row.iter().zip(&m.mean).zip(comp).map(|((v, mu), c)| (v - mu) * c).sum());
        }
    }
    DataMatrix::new(x.n_samples(), m.n_components(), out)
}

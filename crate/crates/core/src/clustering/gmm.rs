use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_fit_with, KMeansConfig};
use super::{DataMatrix, Partition};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    pub n_init: usize,
    pub max_iter: usize,
    /// Stop when the log-likelihood gain per sample drops below this.
    pub tol: f64,
    /// Added to every covariance diagonal.
    pub reg_covar: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            n_init: 5,
            max_iter: 200,
            tol: 1e-6,
            reg_covar: 1e-6,
        }
    }
}

/// Full-covariance Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Row-major d × d per component.
    pub covariances: Vec<Vec<f64>>,
    /// Total log-likelihood of the training data under the fitted parameters.
    pub log_likelihood: f64,
    pub n_iter: usize,
    pub converged: bool,
    /// Log-likelihood after every E-step, in order.
    #[serde(default)]
    pub log_likelihood_trace: Vec<f64>,
}

struct Prepared {
    log_weight: f64,
    mean: Vec<f64>,
    chol: Vec<f64>,
    log_norm: f64,
}

fn prepare(weights: &[f64], means: &[Vec<f64>], covs: &[Vec<f64>]) -> Result<Vec<Prepared>> {
    let d = means.first().map_or(0, Vec::len);
    weights
        .iter()
        .zip(means)
        .zip(covs)
        .map(|((&w, mean), cov)| {
            let chol = Cholesky::new(DMatrix::from_row_slice(d, d, cov)).ok_or(Error::DegenerateComponent)?;
            let l = chol.l();
            let log_det: f64 = (0..d).map(|i| 2.0 * l[(i, i)].ln()).sum();
            if !log_det.is_finite() {
                return Err(Error::DegenerateComponent);
            }
            let mut flat = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..=i {
                    flat[i * d + j] = l[(i, j)];
                }
            }
            Ok(Prepared {
                log_weight: w.ln(),
                mean: mean.clone(),
                chol: flat,
                log_norm: -0.5 * (d as f64 * (2.0 * PI).ln() + log_det),
            })
        })
        .collect()
}

impl Prepared {
    /// log w + log N(row | mean, cov), via forward substitution on L.
    fn log_joint(&self, row: &[f64], scratch: &mut [f64]) -> f64 {
        let d = row.len();
        let mut maha = 0.0;
        for i in 0..d {
            let mut v = row[i] - self.mean[i];
            for (c, s) in self.chol[i * d..i * d + i].iter().zip(&scratch[..i]) {
                v -= c * s;
            }
            v /= self.chol[i * d + i];
            scratch[i] = v;
            maha += v * v;
        }
        self.log_weight + self.log_norm - 0.5 * maha
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Per-row log(w_k N_k(x)) as an n × k row-major buffer.
fn log_joint_matrix(x: &DataMatrix, comps: &[Prepared]) -> Vec<f64> {
    let (k, d) = (comps.len(), x.n_features());
    let mut out = vec![0.0; x.n_samples() * k];
    out.par_chunks_mut(k * 256).enumerate().for_each(|(chunk, block)| {
        let mut scratch = vec![0.0; d];
        for (o, slot) in block.chunks_mut(k).enumerate() {
            let row = x.row(chunk * 256 + o);
            for (s, c) in slot.iter_mut().zip(comps) {
                *s = c.log_joint(row, &mut scratch);
            }
        }
    });
    out
}

/// Log-responsibilities in place; returns the total log-likelihood.
fn e_step(x: &DataMatrix, comps: &[Prepared]) -> (Vec<f64>, f64) {
    let k = comps.len();
    let mut lj = log_joint_matrix(x, comps);
    let mut ll = 0.0;
    for slot in lj.chunks_mut(k) {
        let norm = log_sum_exp(slot);
        ll += norm;
        slot.iter_mut().for_each(|v| *v = (*v - norm).exp());
    }
    (lj, ll)
}

type Params = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>);

fn m_step(x: &DataMatrix, resp: &[f64], k: usize, reg: f64) -> Result<Params> {
    let (n, d) = (x.n_samples(), x.n_features());
    let mut nk = vec![0.0; k];
    let mut means = vec![vec![0.0; d]; k];
    for (i, row) in x.rows().enumerate() {
        for j in 0..k {
            let r = resp[i * k + j];
            nk[j] += r;
            for (m, v) in means[j].iter_mut().zip(row) {
                *m += r * v;
            }
        }
    }
    if nk.iter().any(|&c| c < 1e-10 * n as f64) {
        return Err(Error::DegenerateComponent);
    }
    for (m, &c) in means.iter_mut().zip(&nk) {
        m.iter_mut().for_each(|v| *v /= c);
    }
    let mut covs = vec![vec![0.0; d * d]; k];
    let mut diff = vec![0.0; d];
    for (i, row) in x.rows().enumerate() {
        for j in 0..k {
            let r = resp[i * k + j];
            if r == 0.0 {
                continue;
            }
            for a in 0..d {
                diff[a] = row[a] - means[j][a];
            }
            let cov = &mut covs[j];
            for a in 0..d {
                let ra = r * diff[a];
                for b in 0..=a {
                    cov[a * d + b] += ra * diff[b];
                }
            }
        }
    }
    for (cov, &c) in covs.iter_mut().zip(&nk) {
        for a in 0..d {
            for b in 0..=a {
                let v = cov[a * d + b] / c;
                cov[a * d + b] = v;
                cov[b * d + a] = v;
            }
            cov[a * d + a] += reg;
        }
    }
    let weights = nk.iter().map(|c| c / n as f64).collect();
    Ok((weights, means, covs))
}

fn has_k_distinct_rows(x: &DataMatrix, k: usize) -> bool {
    let mut seen = HashSet::new();
    for row in x.rows() {
        seen.insert(row.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        if seen.len() >= k {
            return true;
        }
    }
    false
}

fn em_single(x: &DataMatrix, k: usize, kmeans_seed: u64, cfg: &GmmConfig) -> Result<GmmModel> {
    let km_cfg = KMeansConfig {
        n_init: 1,
        ..KMeansConfig::default()
    };
    let (_, init) = kmeans_fit_with(x, k, kmeans_seed, &km_cfg)?;
    let mut resp = vec![0.0; x.n_samples() * k];
    for (i, &l) in init.labels().iter().enumerate() {
        resp[i * k + l] = 1.0;
    }
    let mut params = m_step(x, &resp, k, cfg.reg_covar)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let n = x.n_samples() as f64;
    for _ in 0..cfg.max_iter.max(1) {
        let comps = prepare(&params.0, &params.1, &params.2)?;
        let (r, ll) = e_step(x, &comps);
        if !ll.is_finite() {
            return Err(Error::DegenerateComponent);
        }
        let gain = trace.last().map(|prev| (ll - prev) / n);
        trace.push(ll);
        if matches!(gain, Some(g) if g < cfg.tol) {
            converged = true;
            break;
        }
        if trace.len() == cfg.max_iter {
            break;
        }
        params = m_step(x, &r, k, cfg.reg_covar)?;
    }
    let (weights, means, covariances) = params;
    Ok(GmmModel {
        weights,
        means,
        covariances,
        log_likelihood: *trace.last().expect("at least one E-step"),
        n_iter: trace.len(),
        converged,
        log_likelihood_trace: trace,
    })
}

/// EM from k-means starts; the restart with the highest final log-likelihood wins.
pub fn gmm_fit(x: &DataMatrix, k: usize, seed: u64, n_init: usize) -> Result<GmmModel> {
    let cfg = GmmConfig {
        n_init,
        ..GmmConfig::default()
    };
    gmm_fit_with(x, k, seed, &cfg)
}

pub fn gmm_fit_with(x: &DataMatrix, k: usize, seed: u64, cfg: &GmmConfig) -> Result<GmmModel> {
    let (n, d) = (x.n_samples(), x.n_features());
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds {n} samples")));
    }
    if n <= k * d {
        log::warn!("gmm: {n} samples for {k} components in {d} dimensions; fit may be unidentifiable");
    }
    if !has_k_distinct_rows(x, k) {
        return Err(Error::DegenerateComponent);
    }
    let runs: Vec<Result<GmmModel>> = (0..cfg.n_init.max(1) as u64)
        .into_par_iter()
        .map(|restart| em_single(x, k, stream_rng(seed, restart).random(), cfg))
        .collect();
    let mut best: Option<GmmModel> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(m) => {
                if best.as_ref().is_none_or(|b| m.log_likelihood > b.log_likelihood) {
                    best = Some(m);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::DegenerateComponent))
}

impl GmmModel {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn check(&self, x: &DataMatrix) -> Result<Vec<Prepared>> {
        if x.n_features() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.n_features(),
            });
        }
        prepare(&self.weights, &self.means, &self.covariances)
    }

    /// Total log-likelihood of `x`.
    pub fn score(&self, x: &DataMatrix) -> Result<f64> {
        let comps = self.check(x)?;
        let lj = log_joint_matrix(x, &comps);
        Ok(lj.chunks(self.k()).map(log_sum_exp).sum())
    }

    /// Posterior responsibilities, n × k row-major.
    pub fn responsibilities(&self, x: &DataMatrix) -> Result<Vec<f64>> {
        let comps = self.check(x)?;
        Ok(e_step(x, &comps).0)
    }

    /// Free parameters: mixing weights, means and full covariances.
    pub fn n_parameters(&self) -> usize {
        n_parameters(self.k(), self.n_features())
    }

    /// −2 logL + p ln n on the training likelihood.
    pub fn bic(&self, n_samples: usize) -> f64 {
        -2.0 * self.log_likelihood + self.n_parameters() as f64 * (n_samples as f64).ln()
    }
}

pub fn n_parameters(k: usize, d: usize) -> usize {
    k - 1 + k * d + k * d * (d + 1) / 2
}

/// Hard labels by maximum posterior; ties go to the lower index.
pub fn gmm_assign(m: &GmmModel, x: &DataMatrix) -> Result<Partition> {
    let comps = m.check(x)?;
    let lj = log_joint_matrix(x, &comps);
    let labels = lj
        .chunks(m.k())
        .map(|slot| {
            slot.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |b, (j, &v)| if v > b.1 { (j, v) } else { b })
                .0
        })
        .collect();
    Partition::new(labels, m.k())
}

/// Result of a BIC sweep over component counts.
#[derive(Debug, Clone)]
pub struct BicSelection {
    pub k: usize,
    /// (K, BIC) for every candidate.
    pub scores: Vec<(usize, f64)>,
    pub model: GmmModel,
}

/// Fit every K in `k_min..=k_max`, keep the smallest BIC (ties: smaller K).
pub fn select_k_bic(x: &DataMatrix, k_min: usize, k_max: usize, seed: u64) -> Result<BicSelection> {
    select_k_bic_with(x, k_min, k_max, seed, &GmmConfig::default())
}

pub fn select_k_bic_with(
    x: &DataMatrix,
    k_min: usize,
    k_max: usize,
    seed: u64,
    cfg: &GmmConfig,
) -> Result<BicSelection> {
    if k_min < 1 || k_min > k_max {
        return Err(Error::InvalidArgument(format!("bad K range {k_min}..={k_max}")));
    }
    let mut best: Option<(usize, f64, GmmModel)> = None;
    let mut scores = Vec::new();
    for k in k_min..=k_max {
        let model = gmm_fit_with(x, k, seed, cfg)?;
        let bic = model.bic(x.n_samples());
        scores.push((k, bic));
        if best.as_ref().is_none_or(|b| bic < b.1) {
            best = Some((k, bic, model));
        }
    }
    let (k, _, model) = best.expect("non-empty range");
    Ok(BicSelection { k, scores, model })
}

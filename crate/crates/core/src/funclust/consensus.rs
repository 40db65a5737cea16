use kodama::{linkage, Method};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{gmm_assign, gmm_fit_with, DataMatrix, GmmConfig, Partition};
use crate::error::{Error, Result};

/// Largest item count for which a co-association matrix is materialized.
pub const COASSOCIATION_BUDGET: usize = 10_000;

fn is_constant(col: &[f64]) -> bool {
    col.windows(2).all(|w| w[0] == w[1])
}

/// One univariate k-component mixture per coefficient column, hard-assigned.
/// Columns whose fit degenerates are skipped with a warning.
pub fn base_clusterings(coeffs: &DataMatrix, k: usize, seed: u64) -> Result<Vec<Partition>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("base clusterings need k >= 2, got {k}")));
    }
    let cfg = GmmConfig::default();
    let fits: Vec<Result<Option<Partition>>> = (0..coeffs.n_features())
        .into_par_iter()
        .map(|j| {
            let col = DataMatrix::from_column(&coeffs.column(j))?;
            match gmm_fit_with(&col, k, seed.wrapping_add(j as u64), &cfg) {
                Ok(m) => gmm_assign(&m, &col).map(Some),
                Err(Error::DegenerateComponent) => {
                    log::warn!("projection {j}: degenerate component, base clustering skipped");
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut out = Vec::new();
    for f in fits {
        out.extend(f?);
    }
    Ok(out)
}

/// Outcome of a BIC sweep over the summed per-column mixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalKSelection {
    pub k: usize,
    /// (K, summed BIC); degenerate candidates score +∞.
    pub bic: Vec<(usize, f64)>,
}

/// For each K, sum the univariate-mixture BICs of all non-constant columns;
/// return the minimizer (ties: smaller K).
pub fn select_k_functional(coeffs: &DataMatrix, k_min: usize, k_max: usize, seed: u64) -> Result<FunctionalKSelection> {
    if k_min < 2 || k_min > k_max {
        return Err(Error::InvalidArgument(format!("bad K range {k_min}..={k_max}")));
    }
    let n = coeffs.n_samples();
    let k_max = k_max.min(n.saturating_sub(1));
    if k_max < k_min {
        return Err(Error::TooFewParticles {
            got: n,
            need: k_min + 1,
        });
    }
    let columns: Vec<DataMatrix> = (0..coeffs.n_features())
        .map(|j| coeffs.column(j))
        .filter(|c| !is_constant(c))
        .map(|c| DataMatrix::from_column(&c))
        .collect::<Result<_>>()?;
    if columns.is_empty() {
        return Err(Error::DegenerateComponent);
    }
    let cfg = GmmConfig::default();
    let mut bic = Vec::new();
    for k in k_min..=k_max {
        let per_column: Vec<Result<f64>> = columns
            .par_iter()
            .enumerate()
            .map(
                |(j, col)| match gmm_fit_with(col, k, seed.wrapping_add(j as u64), &cfg) {
                    Ok(m) => Ok(m.bic(n)),
                    Err(Error::DegenerateComponent) => Ok(f64::INFINITY),
                    Err(e) => Err(e),
                },
            )
            .collect();
        let mut total = 0.0;
        for v in per_column {
            total += v?;
        }
        if total.is_infinite() {
            log::warn!("K = {k}: degenerate mixture in at least one projection");
        }
        bic.push((k, total));
    }
    let (k, best) = bic
        .iter()
        .copied()
        .fold((k_min, f64::INFINITY), |b, (k, v)| if v < b.1 { (k, v) } else { b });
    if best.is_infinite() {
        return Err(Error::DegenerateComponent);
    }
    Ok(FunctionalKSelection { k, bic })
}

/// Consensus partition and the base clusterings it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusResult {
    pub partition: Partition,
    pub base: Vec<Partition>,
    /// Side length of the co-association matrix that was allocated.
    pub coassociation_n: usize,
}

/// Co-association matrix of the base clusterings, average-linkage
/// agglomeration on 1 − co-association, cut at `k` clusters.
pub fn consensus(base: &[Partition], k: usize) -> Result<ConsensusResult> {
    let first = base
        .first()
        .ok_or_else(|| Error::InvalidArgument("consensus needs at least one base clustering".into()))?;
    let n = first.len();
    if let Some(bad) = base.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    if n > COASSOCIATION_BUDGET {
        return Err(Error::ExemplarSetTooLarge {
            n,
            budget: COASSOCIATION_BUDGET,
        });
    }
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot cut {n} items into {k} clusters"
        )));
    }
    let m = base.len() as f64;
    // condensed upper triangle, row-major
    let mut dis: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (i + 1..n).map(move |j| {
                let agree = base.iter().filter(|p| p.labels()[i] == p.labels()[j]).count();
                1.0 - agree as f64 / m
            })
        })
        .collect();
    let dendrogram = linkage(&mut dis, n, Method::Average);
    drop(dis);

    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (s, step) in dendrogram.steps().iter().take(n - k).enumerate() {
        let new = n + s;
        let a = find(&mut parent, step.cluster1);
        let b = find(&mut parent, step.cluster2);
        parent[a] = new;
        parent[b] = new;
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let partition = Partition::from_ids(&roots);
    Ok(ConsensusResult {
        partition,
        base: base.to_vec(),
        coassociation_n: n,
    })
}

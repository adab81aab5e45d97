//! DBSCAN with inclusive ε-neighborhoods (a point counts itself).
//!
//! Border points, both at fit time and for new samples, join the cluster of
//! their nearest core sample within ε.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{rows_to_vecs, sq_dist};
use crate::data::{ClusterAssignment, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbscanModel {
    pub eps: f64,
    pub min_pts: usize,
    pub n_features: usize,
    pub core_indices: Vec<usize>,
    pub core_points: Vec<Vec<f64>>,
    pub core_labels: Vec<usize>,
    pub train_labels: ClusterAssignment,
}

fn dist(a: &[f64], b: impl IntoIterator<Item = f64>) -> f64 {
    sq_dist(a, b).sqrt()
}

impl DbscanModel {
    pub fn fit(x: ArrayView2<f64>, eps: f64, min_pts: usize) -> Self {
        let n = x.nrows();
        let rows = rows_to_vecs(x);
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| dist(&rows[i], rows[j].iter().copied()) <= eps)
                    .collect()
            })
            .collect();
        let is_core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

        // Connected components over core points, numbered by lowest core index.
        let mut core_label: Vec<Option<usize>> = vec![None; n];
        let mut n_clusters = 0;
        for start in 0..n {
            if !is_core[start] || core_label[start].is_some() {
                continue;
            }
            let id = n_clusters;
            n_clusters += 1;
            core_label[start] = Some(id);
            let mut stack = vec![start];
            while let Some(p) = stack.pop() {
                for &q in &neighbors[p] {
                    if is_core[q] && core_label[q].is_none() {
                        core_label[q] = Some(id);
                        stack.push(q);
                    }
                }
            }
        }

        let core_indices: Vec<usize> = (0..n).filter(|&i| is_core[i]).collect();
        let mut model = DbscanModel {
            eps,
            min_pts,
            n_features: x.ncols(),
            core_points: core_indices.iter().map(|&i| rows[i].clone()).collect(),
            core_labels: core_indices
                .iter()
                .map(|&i| core_label[i].expect("core points are labeled"))
                .collect(),
            core_indices,
            train_labels: ClusterAssignment::from_parts(Vec::new(), n_clusters),
        };
        let labels = model.assign(x);
        model.train_labels = ClusterAssignment::from_parts(labels, n_clusters);
        model
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn is_all_noise(&self) -> bool {
        self.core_points.is_empty()
    }

    pub fn assign(&self, samples: ArrayView2<f64>) -> Vec<Label> {
        samples
            .rows()
            .into_iter()
            .map(|r| {
                let mut best: Option<(f64, usize)> = None;
                for (k, core) in self.core_points.iter().enumerate() {
                    let d = dist(core, r.iter().copied());
                    if d <= self.eps && best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, k));
                    }
                }
                best.map(|(_, k)| self.core_labels[k])
            })
            .collect()
    }
}

/// `count` ε candidates log-spaced between the 1st and 99th percentile of the
/// distance from each sample to its `k`-th nearest other sample.
pub fn dbscan_eps_grid(x: ArrayView2<f64>, k: usize, count: usize) -> Result<Vec<f64>> {
    let n = x.nrows();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor rank {k} must be in 1..{n}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("empty ε grid requested".into()));
    }
    let rows = rows_to_vecs(x);
    let mut kth: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| dist(&rows[i], rows[j].iter().copied()))
                .collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect();
    kth.sort_by(f64::total_cmp);
    let hi = crate::stats::quantile_sorted(&kth, 0.99);
    let mut lo = crate::stats::quantile_sorted(&kth, 0.01);
    if !(hi > 0.0) {
        return Err(Error::InvalidData(
            "all nearest-neighbor distances are zero; cannot build an ε grid".into(),
        ));
    }
    if !(lo > 0.0) {
        lo = kth.iter().copied().find(|&d| d > 0.0).unwrap_or(hi);
    }
    if count == 1 || lo == hi {
        return Ok(vec![lo; count.min(1)]);
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

//! Ward-linkage agglomerative clustering; new samples join the cluster of
//! their nearest training sample.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{argmin, rows_to_vecs, sq_dist};
use crate::data::{ClusterAssignment, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgglomerativeModel {
    pub train_data: Vec<Vec<f64>>,
    pub train_labels: ClusterAssignment,
}

/// Merges clusters by the Ward criterion until `k` remain. Returns a label
/// per row, clusters numbered by their lowest member index.
pub(crate) fn ward_labels(rows: &[Vec<f64>], k: usize) -> Vec<usize> {
    let n = rows.len();
    // Lance-Williams on squared Euclidean distances.
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = sq_dist(&rows[i], rows[j].iter().copied());
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let mut size = vec![1usize; n];
    let mut active: Vec<bool> = vec![true; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut remaining = n;
    while remaining > k {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if active[j] && d[i][j] < best.0 {
                    best = (d[i][j], i, j);
                }
            }
        }
        let (dij, i, j) = best;
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for m in 0..n {
            if !active[m] || m == i || m == j {
                continue;
            }
            let nm = size[m] as f64;
            let v = ((ni + nm) * d[i][m] + (nj + nm) * d[j][m] - nm * dij) / (ni + nj + nm);
            d[i][m] = v;
            d[m][i] = v;
        }
        size[i] += size[j];
        active[j] = false;
        parent[j] = i;
        remaining -= 1;
    }
    let root = |mut p: usize| {
        while parent[p] != p {
            p = parent[p];
        }
        p
    };
    let mut ids: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    (0..n)
        .map(|i| {
            let r = root(i);
            *ids[r].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

impl AgglomerativeModel {
    pub fn fit(x: ArrayView2<f64>, k: usize) -> Self {
        let rows = rows_to_vecs(x);
        let labels = ward_labels(&rows, k).into_iter().map(Some).collect();
        AgglomerativeModel {
            train_data: rows,
            train_labels: ClusterAssignment::from_parts(labels, k),
        }
    }

    pub fn n_features(&self) -> usize {
        self.train_data[0].len()
    }

    pub fn assign(&self, samples: ArrayView2<f64>) -> Vec<Label> {
        let labels = self.train_labels.labels();
        samples
            .rows()
            .into_iter()
            .map(|r| {
                let nn = argmin(self.train_data.iter().map(|t| sq_dist(t, r.iter().copied())));
                labels[nn]
            })
            .collect()
    }
}

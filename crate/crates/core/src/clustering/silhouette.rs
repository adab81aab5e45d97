//! Mean silhouette width over Euclidean distances.

use ndarray::ArrayView2;

use super::{rows_to_vecs, sq_dist};
use crate::data::{ClusterAssignment, DataMatrix};
use crate::error::{Error, Result};

/// Per-sample silhouette values; `None` for noise samples.
///
/// Samples in singleton clusters score 0, and a = b = 0 scores 0.
pub fn silhouette_samples(x: ArrayView2<f64>, labels: &ClusterAssignment) -> Result<Vec<Option<f64>>> {
    let k = labels.n_clusters();
    let sizes = labels.cluster_sizes();
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::InsufficientClusters);
    }
    if labels.len() != x.nrows() {
        return Err(Error::InvalidData(format!(
            "{} labels for {} samples",
            labels.len(),
            x.nrows()
        )));
    }
    let rows = rows_to_vecs(x);
    let lab = labels.labels();
    let mut sums = vec![0.0; k];
    Ok((0..rows.len())
        .map(|i| {
            let own = lab[i]?;
            if sizes[own] == 1 {
                return Some(0.0);
            }
            sums.iter_mut().for_each(|s| *s = 0.0);
            for (j, r) in rows.iter().enumerate() {
                if let (Some(c), true) = (lab[j], j != i) {
                    sums[c] += sq_dist(&rows[i], r.iter().copied()).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            Some(if denom > 0.0 { (b - a) / denom } else { 0.0 })
        })
        .collect())
}

/// Mean silhouette over non-noise samples.
pub fn silhouette_score(data: &DataMatrix, labels: &ClusterAssignment) -> Result<f64> {
    let s: Vec<f64> = silhouette_samples(data.view(), labels)?.into_iter().flatten().collect();
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

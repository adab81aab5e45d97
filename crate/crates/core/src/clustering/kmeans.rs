//! Lloyd's k-means with k-means++ seeding and best-of-n restarts.

use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmin, sq_dist};
use crate::data::{ClusterAssignment, Label};
use crate::error::{Error, Result};
use crate::rng::{RandomSeed, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centers: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances on the training data.
    pub inertia: f64,
    pub train_labels: ClusterAssignment,
}

/// Result of one Lloyd descent from fixed starting centers.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub centers: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// SSE after every assignment step, first entry uses the initial centers.
    pub sse_history: Vec<f64>,
}

impl LloydRun {
    pub fn sse(&self) -> f64 {
        *self.sse_history.last().expect("at least one assignment step")
    }
}

fn nearest(centers: &[Vec<f64>], row: impl IntoIterator<Item = f64> + Clone) -> (usize, f64) {
    let idx = argmin(centers.iter().map(|c| sq_dist(c, row.clone())));
    (idx, sq_dist(&centers[idx], row))
}

fn assign_all(x: ArrayView2<f64>, centers: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut sse = 0.0;
    let labels = x
        .rows()
        .into_iter()
        .map(|r| {
            let (c, d) = nearest(centers, r.iter().copied());
            sse += d;
            c
        })
        .collect();
    (labels, sse)
}

/// Runs Lloyd iterations from `init` until labels stop changing or
/// `max_iter` updates. Fails if a cluster loses all its members.
pub fn lloyd(x: ArrayView2<f64>, init: Vec<Vec<f64>>, max_iter: usize) -> Result<LloydRun> {
    let k = init.len();
    let f = x.ncols();
    let mut centers = init;
    let (mut labels, sse) = assign_all(x, &centers);
    let mut sse_history = vec![sse];
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; f]; k];
        let mut counts = vec![0usize; k];
        for (row, &c) in x.rows().into_iter().zip(&labels) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(row) {
                *s += v;
            }
        }
        if let Some(empty) = counts.iter().position(|&n| n == 0) {
            return Err(Error::DegenerateCluster { cluster: empty });
        }
        for ((center, sum), &n) in centers.iter_mut().zip(sums).zip(&counts) {
            for (c, s) in center.iter_mut().zip(sum) {
                *c = s / n as f64;
            }
        }
        let (next, sse) = assign_all(x, &centers);
        sse_history.push(sse);
        let changed = next != labels;
        labels = next;
        if !changed {
            break;
        }
    }
    let mut counts = vec![0usize; k];
    for &c in &labels {
        counts[c] += 1;
    }
    if let Some(empty) = counts.iter().position(|&n| n == 0) {
        return Err(Error::DegenerateCluster { cluster: empty });
    }
    Ok(LloydRun {
        centers,
        labels,
        sse_history,
    })
}

/// k-means++ seeding: each new center is drawn with probability
/// proportional to its squared distance from the nearest chosen center.
pub(crate) fn kmeans_plus_plus(
    x: ArrayView2<f64>,
    k: usize,
    rng: &mut StreamRng,
) -> Result<Vec<Vec<f64>>> {
    let n = x.nrows();
    let first = rng.random_range(0..n);
    let mut centers = vec![x.row(first).to_vec()];
    let mut d2: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|r| sq_dist(&centers[0], r.iter().copied()))
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateCluster {
                cluster: centers.len(),
            });
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = n - 1;
        for (i, &d) in d2.iter().enumerate() {
            acc += d;
            if acc > target && d > 0.0 {
                pick = i;
                break;
            }
        }
        // Guard against rounding landing on an already-chosen point.
        if d2[pick] == 0.0 {
            pick = d2.iter().rposition(|&d| d > 0.0).expect("total > 0");
        }
        let c = x.row(pick).to_vec();
        for (di, r) in d2.iter_mut().zip(x.rows()) {
            *di = di.min(sq_dist(&c, r.iter().copied()));
        }
        centers.push(c);
    }
    Ok(centers)
}

impl KMeansModel {
    pub fn fit(
        x: ArrayView2<f64>,
        k: usize,
        n_init: usize,
        max_iter: usize,
        seed: RandomSeed,
    ) -> Result<Self> {
        let mut best: Option<LloydRun> = None;
        let mut last_err = None;
        for restart in 0..n_init {
            let mut rng = seed.stream("kmeans-init", &[restart as u64]);
            let run = kmeans_plus_plus(x, k, &mut rng).and_then(|init| lloyd(x, init, max_iter));
            match run {
                Ok(run) => {
                    if best.as_ref().is_none_or(|b| run.sse() < b.sse()) {
                        best = Some(run);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        let run = match best {
            Some(run) => run,
            None => return Err(last_err.expect("n_init > 0")),
        };
        let labels = run.labels.iter().map(|&c| Some(c)).collect();
        Ok(KMeansModel {
            inertia: run.sse(),
            centers: run.centers,
            train_labels: ClusterAssignment::from_parts(labels, k),
        })
    }

    pub fn n_features(&self) -> usize {
        self.centers[0].len()
    }

    pub fn assign(&self, samples: ArrayView2<f64>) -> Vec<Label> {
        samples
            .rows()
            .into_iter()
            .map(|r| Some(nearest(&self.centers, r.iter().copied()).0))
            .collect()
    }
}

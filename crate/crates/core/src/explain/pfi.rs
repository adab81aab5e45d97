use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_repeats, GroupValues};
use crate::data::{DataMatrix, FeatureGrouping};
use crate::error::{Error, Result};
use crate::rng::RandomSeed;

/// Relative performance change per (feature group, repeat).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfiResult {
    pub repeats: usize,
    pub seed: RandomSeed,
    pub grouping: FeatureGrouping,
    pub baseline: f64,
    /// `importance[j][k] = (perf_permuted - baseline) / baseline`.
    pub importance: Vec<Vec<f64>>,
}

impl GroupValues for PfiResult {
    fn grouping(&self) -> &FeatureGrouping {
        &self.grouping
    }

    fn group_values(&self, j: usize) -> Vec<f64> {
        self.importance[j].clone()
    }
}

/// Fraction of positions where the labels agree.
pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> f64 {
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    hits as f64 / y_true.len() as f64
}

/// Supervised permutation feature importance.
///
/// The baseline score is computed once on the unpermuted data. For each
/// group and repeat a fresh row permutation is applied to the group's
/// columns and the relative change in `metric` is recorded.
pub fn permutation_feature_importance<P, S>(
    predict: P,
    data: &DataMatrix,
    y_true: &[usize],
    grouping: &FeatureGrouping,
    repeats: usize,
    metric: S,
    seed: RandomSeed,
) -> Result<PfiResult>
where
    P: Fn(ArrayView2<f64>) -> Vec<usize> + Sync,
    S: Fn(&[usize], &[usize]) -> f64 + Sync,
{
    ensure_repeats(repeats)?;
    grouping.check_features(data.n_features())?;
    let n = data.n_samples();
    if y_true.len() != n {
        return Err(Error::InvalidData(format!("{} labels for {n} samples", y_true.len())));
    }
    let x = data.values();
    let baseline = metric(y_true, &predict(x.view()));
    if baseline == 0.0 || !baseline.is_finite() {
        return Err(Error::ZeroBaselinePerformance);
    }
    let members = grouping.all_members();
    let flat: Vec<f64> = (0..members.len() * repeats)
        .into_par_iter()
        .map(|cell| {
            let (j, k) = (cell / repeats, cell % repeats);
            let mut rng = seed.stream("pfi", &[j as u64, k as u64]);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut permuted = x.clone();
            for &f in &members[j] {
                for (i, &p) in perm.iter().enumerate() {
                    permuted[[i, f]] = x[[p, f]];
                }
            }
            let score = metric(y_true, &predict(permuted.view()));
            (score - baseline) / baseline
        })
        .collect();
    Ok(PfiResult {
        repeats,
        seed,
        grouping: grouping.clone(),
        baseline,
        importance: flat.chunks(repeats).map(<[f64]>::to_vec).collect(),
    })
}

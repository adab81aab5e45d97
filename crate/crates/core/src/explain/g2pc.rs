use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_not_all_noise, ensure_repeats, GroupValues};
use crate::clustering::{Algorithm, FittedClusterer};
use crate::data::{DataMatrix, FeatureGrouping, Label};
use crate::error::{Error, Result};
use crate::rng::RandomSeed;

/// Global permutation percent change, one value per (group, repeat).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2pcResult {
    pub algorithm: Algorithm,
    pub n_samples: usize,
    pub n_groups: usize,
    pub repeats: usize,
    pub seed: RandomSeed,
    pub grouping: FeatureGrouping,
    /// Assignment of the unpermuted data.
    pub labels: Vec<Label>,
    /// `pct_change[j][k]`: fraction of samples that changed cluster in repeat
    /// `k` of group `j`.
    pub pct_change: Vec<Vec<f64>>,
}

impl GroupValues for G2pcResult {
    fn grouping(&self) -> &FeatureGrouping {
        &self.grouping
    }

    fn group_values(&self, j: usize) -> Vec<f64> {
        self.pct_change[j].clone()
    }
}

impl G2pcResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per (group, repeat).
    pub fn write_tensor_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["group", "group_label", "repeat", "value"])?;
        for (j, row) in self.pct_change.iter().enumerate() {
            let label = self.grouping.label(j);
            for (k, v) in row.iter().enumerate() {
                wtr.write_record([j.to_string(), label.clone(), k.to_string(), v.to_string()])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Permutes each feature group `repeats` times and measures how many samples
/// the model moves to a different cluster.
///
/// One permutation of the rows is applied to every column of the group, so
/// values within a group stay together. The reference labels are recomputed
/// with `model.assign` on `data`; noise counts as its own label.
pub fn g2pc(
    model: &FittedClusterer,
    data: &DataMatrix,
    grouping: &FeatureGrouping,
    repeats: usize,
    seed: RandomSeed,
) -> Result<G2pcResult> {
    ensure_repeats(repeats)?;
    ensure_not_all_noise(model)?;
    grouping.check_features(data.n_features())?;
    let x = data.values();
    let base = model.assign_rows(x.view())?;
    let n = data.n_samples();
    let members = grouping.all_members();
    let n_groups = members.len();

    let flat: Vec<f64> = (0..n_groups * repeats)
        .into_par_iter()
        .map(|cell| {
            let (j, k) = (cell / repeats, cell % repeats);
            let mut rng = seed.stream("g2pc", &[j as u64, k as u64]);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut permuted = x.clone();
            for &f in &members[j] {
                for (i, &p) in perm.iter().enumerate() {
                    permuted[[i, f]] = x[[p, f]];
                }
            }
            let labels = model.assign_rows(permuted.view())?;
            let changed = base.iter().zip(&labels).filter(|(a, b)| a != b).count();
            Ok(changed as f64 / n as f64)
        })
        .collect::<Result<_>>()?;

    Ok(G2pcResult {
        algorithm: model.algorithm(),
        n_samples: n,
        n_groups,
        repeats,
        seed,
        grouping: grouping.clone(),
        labels: base,
        pct_change: flat.chunks(repeats).map(<[f64]>::to_vec).collect(),
    })
}

use std::io::Write;

use ndarray::Array2;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_not_all_noise, ensure_repeats, GroupValues};
use crate::clustering::{Algorithm, FittedClusterer};
use crate::data::{DataMatrix, FeatureGrouping, Label};
use crate::error::{Error, Result};
use crate::rng::RandomSeed;

/// Local perturbation percent change for every (sample, group, repeat).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2pcResult {
    pub algorithm: Algorithm,
    pub n_groups: usize,
    pub repeats: usize,
    pub perturbations: usize,
    pub seed: RandomSeed,
    pub grouping: FeatureGrouping,
    /// Row indices of the explained samples, in output order.
    pub samples: Vec<usize>,
    /// Assignment of each explained sample before perturbation.
    pub labels: Vec<Label>,
    /// Row-major `[sample][group][repeat]` fractions of changed duplicates.
    pub pct_change: Vec<f64>,
}

impl L2pcResult {
    pub fn value(&self, sample_pos: usize, group: usize, repeat: usize) -> f64 {
        self.pct_change[(sample_pos * self.n_groups + group) * self.repeats + repeat]
    }

    /// Mean over repeats for each explained sample in group `j`.
    pub fn per_sample_means(&self, j: usize) -> Vec<f64> {
        (0..self.samples.len())
            .map(|s| {
                (0..self.repeats).map(|k| self.value(s, j, k)).sum::<f64>() / self.repeats as f64
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per (sample, group, repeat).
    pub fn write_tensor_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["sample", "group", "group_label", "repeat", "value"])?;
        for (s, &n) in self.samples.iter().enumerate() {
            for j in 0..self.n_groups {
                let label = self.grouping.label(j);
                for k in 0..self.repeats {
                    wtr.write_record([
                        n.to_string(),
                        j.to_string(),
                        label.clone(),
                        k.to_string(),
                        self.value(s, j, k).to_string(),
                    ])?;
                }
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

impl GroupValues for L2pcResult {
    fn grouping(&self) -> &FeatureGrouping {
        &self.grouping
    }

    fn group_values(&self, j: usize) -> Vec<f64> {
        (0..self.samples.len())
            .flat_map(|s| (0..self.repeats).map(move |k| (s, k)))
            .map(|(s, k)| self.value(s, j, k))
            .collect()
    }
}

/// Perturbs each sample's feature groups with values from `perturbations`
/// distinct donor rows and measures how often the sample changes cluster.
///
/// Donors are drawn without replacement from every row except the sample
/// itself, afresh for each repeat. A donor supplies the whole group.
pub fn l2pc(
    model: &FittedClusterer,
    data: &DataMatrix,
    grouping: &FeatureGrouping,
    repeats: usize,
    perturbations: usize,
    seed: RandomSeed,
    sample_subset: Option<&[usize]>,
) -> Result<L2pcResult> {
    ensure_repeats(repeats)?;
    ensure_not_all_noise(model)?;
    grouping.check_features(data.n_features())?;
    let n = data.n_samples();
    if perturbations == 0 {
        return Err(Error::InvalidParameter(
            "perturbation count M must be at least 1".into(),
        ));
    }
    if perturbations > n - 1 {
        return Err(Error::MTooLarge {
            m: perturbations,
            max: n - 1,
        });
    }
    let samples: Vec<usize> = match sample_subset {
        Some(s) => {
            if let Some(&bad) = s.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidParameter(format!("sample index {bad} out of range")));
            }
            s.to_vec()
        }
        None => (0..n).collect(),
    };
    let x = data.values();
    let base = model.assign_rows(x.view())?;
    let members = grouping.all_members();
    let n_groups = members.len();
    let f = data.n_features();
    let m = perturbations;

    let flat: Vec<f64> = (0..samples.len() * n_groups * repeats)
        .into_par_iter()
        .map(|cell| {
            let s = cell / (n_groups * repeats);
            let j = (cell / repeats) % n_groups;
            let k = cell % repeats;
            let target = samples[s];
            let mut rng = seed.stream("l2pc", &[target as u64, j as u64, k as u64]);
            let mut dup = Array2::<f64>::zeros((m, f));
            for mut row in dup.rows_mut() {
                row.assign(&x.row(target));
            }
            for (r, d) in index::sample(&mut rng, n - 1, m).into_iter().enumerate() {
                let donor = if d >= target { d + 1 } else { d };
                for &c in &members[j] {
                    dup[[r, c]] = x[[donor, c]];
                }
            }
            let labels = model.assign_rows(dup.view())?;
            let changed = labels.iter().filter(|&&l| l != base[target]).count();
            Ok(changed as f64 / m as f64)
        })
        .collect::<Result<_>>()?;

    Ok(L2pcResult {
        algorithm: model.algorithm(),
        n_groups,
        repeats,
        perturbations,
        seed,
        grouping: grouping.clone(),
        labels: samples.iter().map(|&i| base[i]).collect(),
        samples,
        pct_change: flat,
    })
}

/// Per-group mean over all explained samples and repeats.
pub fn l2pc_global(result: &L2pcResult) -> Vec<f64> {
    (0..result.n_groups)
        .map(|j| crate::stats::mean(&result.group_values(j)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{fit, ClusterParams};
    use crate::data::identity_grouping;

    fn toy() -> (FittedClusterer, DataMatrix) {
        let data = DataMatrix::from_column(&[0.0, 1.0, 10.0]).unwrap();
        let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(0)).unwrap();
        (model, data)
    }

    #[test]
    fn forced_donors_give_half() {
        let (model, data) = toy();
        let g = identity_grouping(1).unwrap();
        let r = l2pc(&model, &data, &g, 25, 2, RandomSeed(5), Some(&[0])).unwrap();
        assert_eq!(r.samples, vec![0]);
        assert!((0..25).all(|k| r.value(0, 0, k) == 0.5));
    }

    #[test]
    fn m_bounds() {
        let (model, data) = toy();
        let g = identity_grouping(1).unwrap();
        assert!(matches!(
            l2pc(&model, &data, &g, 1, 3, RandomSeed(0), None),
            Err(Error::MTooLarge { m: 3, max: 2 })
        ));
        assert!(l2pc(&model, &data, &g, 1, 0, RandomSeed(0), None).is_err());
        assert!(l2pc(&model, &data, &g, 1, 1, RandomSeed(0), Some(&[3])).is_err());
    }

    #[test]
    fn global_of_constant_tensor() {
        let (model, data) = toy();
        let g = identity_grouping(1).unwrap();
        let mut r = l2pc(&model, &data, &g, 4, 2, RandomSeed(0), None).unwrap();
        r.pct_change.iter_mut().for_each(|v| *v = 0.5);
        assert_eq!(l2pc_global(&r), vec![0.5]);
        r.pct_change.iter_mut().for_each(|v| *v = 0.0);
        assert_eq!(l2pc_global(&r), vec![0.0]);
    }
}

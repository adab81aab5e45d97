//! Ground-truth synthetic benchmarks: Gaussian blobs with per-cluster,
//! per-feature means and standard deviations.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{ClusterAssignment, DataMatrix};
use crate::error::{Error, Result};
use crate::rng::RandomSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetId {
    /// Two clusters; the mean gap shrinks from feature 1 to feature 5.
    One,
    /// Four clusters; features 1-3 tight, features 4-5 wide.
    Two,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub dataset_id: DatasetId,
    pub samples_per_cluster: usize,
    /// clusters x features
    pub means: Vec<Vec<f64>>,
    /// clusters x features
    pub stds: Vec<Vec<f64>>,
}

impl SyntheticSpec {
    pub fn dataset_one() -> Self {
        SyntheticSpec {
            dataset_id: DatasetId::One,
            samples_per_cluster: 50,
            means: vec![vec![11.0, 9.0, 7.0, 5.0, 3.0], vec![3.0; 5]],
            stds: vec![vec![1.0; 5]; 2],
        }
    }

    pub fn dataset_two() -> Self {
        let per_feature = [
            [3.0, 11.0, 19.0, 27.0],
            [3.0, 9.0, 15.0, 21.0],
            [3.0, 7.0, 11.0, 15.0],
            [3.0, 5.0, 7.0, 9.0],
            [3.0, 4.0, 5.0, 6.0],
        ];
        let means = (0..4)
            .map(|c| per_feature.iter().map(|f| f[c]).collect())
            .collect();
        SyntheticSpec {
            dataset_id: DatasetId::Two,
            samples_per_cluster: 50,
            means,
            stds: vec![vec![0.5, 0.5, 0.5, 2.0, 2.0]; 4],
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "one" | "1" => Some(Self::dataset_one()),
            "two" | "2" => Some(Self::dataset_two()),
            _ => None,
        }
    }

    pub fn with_samples_per_cluster(mut self, n: usize) -> Self {
        self.samples_per_cluster = n;
        self
    }

    pub fn n_clusters(&self) -> usize {
        self.means.len()
    }

    pub fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.n_features();
        if self.means.is_empty() || f == 0 {
            return Err(Error::InvalidParameter("spec needs at least one cluster and feature".into()));
        }
        if self.stds.len() != self.means.len()
            || self.means.iter().chain(&self.stds).any(|r| r.len() != f)
        {
            return Err(Error::InvalidParameter("means and stds must share one shape".into()));
        }
        if self.stds.iter().flatten().any(|s| !(*s >= 0.0) || !s.is_finite())
            || self.means.iter().flatten().any(|m| !m.is_finite())
        {
            return Err(Error::InvalidParameter("means must be finite and stds non-negative".into()));
        }
        if self.samples_per_cluster == 0 || self.samples_per_cluster * self.n_clusters() < 2 {
            return Err(Error::InvalidParameter("spec must produce at least two samples".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Draws one dataset. Rows come in cluster blocks with ground-truth labels.
pub fn generate(spec: &SyntheticSpec, seed: RandomSeed) -> Result<(DataMatrix, ClusterAssignment)> {
    spec.validate()?;
    let k = spec.n_clusters();
    let f = spec.n_features();
    let per = spec.samples_per_cluster;
    let mut rng = seed.stream("datagen", &[]);
    let mut values = Array2::zeros((k * per, f));
    let mut labels = Vec::with_capacity(k * per);
    for c in 0..k {
        for i in 0..per {
            for j in 0..f {
                let z: f64 = rng.sample(StandardNormal);
                values[[c * per + i, j]] = spec.means[c][j] + spec.stds[c][j] * z;
            }
            labels.push(Some(c));
        }
    }
    let names = (1..=f).map(|j| format!("feature{j}")).collect();
    let data = DataMatrix::new(values)?.with_feature_names(names)?;
    Ok((data, ClusterAssignment::new(labels, k)?))
}

/// `count` independent datasets, replicate `i` seeded from `seed` and `i`.
pub fn generate_batch(
    spec: &SyntheticSpec,
    count: usize,
    seed: RandomSeed,
) -> Result<Vec<(DataMatrix, ClusterAssignment)>> {
    if count == 0 {
        return Err(Error::InvalidParameter("batch count must be at least 1".into()));
    }
    (0..count)
        .map(|i| generate(spec, seed.derive("replicate", &[i as u64])))
        .collect()
}

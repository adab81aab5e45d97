//! Clustering backends that can place new samples into the clusters they found.
//!
//! Every backend produces a [`FittedClusterer`], a frozen model whose
//! [`assign`](FittedClusterer::assign) rule maps unseen rows onto existing
//! clusters:
//!
//! | backend        | assignment rule                                   |
//! |----------------|---------------------------------------------------|
//! | k-means        | nearest center                                    |
//! | GMM            | highest posterior                                 |
//! | DBSCAN         | nearest core sample within ε, otherwise noise     |
//! | agglomerative  | cluster of the nearest training sample            |
//! | fuzzy c-means  | highest membership against the frozen centers     |
//!
//! All argmin/argmax ties resolve to the lowest index.

mod agglomerative;
mod dbscan;
mod fuzzy;
mod gmm;
mod kmeans;
mod select;
mod silhouette;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::data::{ClusterAssignment, DataMatrix, Label};
use crate::error::{Error, Result};
use crate::rng::RandomSeed;

pub use agglomerative::AgglomerativeModel;
pub use dbscan::{dbscan_eps_grid, DbscanModel};
pub use fuzzy::FuzzyModel;
pub use gmm::GmmModel;
pub use kmeans::{lloyd, KMeansModel, LloydRun};
pub use select::{select_clusters, SilhouetteCandidate, SilhouetteReport};
pub use silhouette::{silhouette_samples, silhouette_score};

/// Default DBSCAN minimum neighborhood size (self included).
pub const DEFAULT_MIN_PTS: usize = 4;
/// Default fuzzifier for fuzzy c-means.
pub const DEFAULT_FUZZIFIER: f64 = 2.0;
/// Default fuzzy c-means stopping threshold on the membership change.
pub const DEFAULT_FCM_ERROR: f64 = 0.005;
/// Default fuzzy c-means iteration cap.
pub const DEFAULT_FCM_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    KMeans,
    Gmm,
    DbScan,
    Agglomerative,
    FuzzyCMeans,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::KMeans,
        Algorithm::Gmm,
        Algorithm::DbScan,
        Algorithm::Agglomerative,
        Algorithm::FuzzyCMeans,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::KMeans => "k-means",
            Algorithm::Gmm => "gmm",
            Algorithm::DbScan => "db-scan",
            Algorithm::Agglomerative => "agglomerative",
            Algorithm::FuzzyCMeans => "fuzzy-c-means",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }

    /// Whether the tunable parameter is a cluster count (all but DBSCAN).
    pub fn takes_cluster_count(self) -> bool {
        self != Algorithm::DbScan
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Algorithm choice plus its fitting parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum ClusterParams {
    KMeans {
        n_clusters: usize,
        n_init: usize,
        max_iter: usize,
    },
    Gmm {
        n_clusters: usize,
        reg_covar: f64,
        tol: f64,
        max_iter: usize,
    },
    DbScan {
        eps: f64,
        min_pts: usize,
    },
    Agglomerative {
        n_clusters: usize,
    },
    FuzzyCMeans {
        n_clusters: usize,
        fuzzifier: f64,
        error: f64,
        max_iter: usize,
    },
}

impl ClusterParams {
    pub fn kmeans(n_clusters: usize) -> Self {
        ClusterParams::KMeans {
            n_clusters,
            n_init: 10,
            max_iter: 300,
        }
    }

    pub fn gmm(n_clusters: usize) -> Self {
        ClusterParams::Gmm {
            n_clusters,
            reg_covar: 1e-6,
            tol: 1e-6,
            max_iter: 500,
        }
    }

    pub fn dbscan(eps: f64, min_pts: usize) -> Self {
        ClusterParams::DbScan { eps, min_pts }
    }

    pub fn agglomerative(n_clusters: usize) -> Self {
        ClusterParams::Agglomerative { n_clusters }
    }

    pub fn fuzzy_cmeans(n_clusters: usize) -> Self {
        ClusterParams::FuzzyCMeans {
            n_clusters,
            fuzzifier: DEFAULT_FUZZIFIER,
            error: DEFAULT_FCM_ERROR,
            max_iter: DEFAULT_FCM_MAX_ITER,
        }
    }

    /// Defaults for `algorithm`; `value` is a cluster count, or ε for DBSCAN.
    pub fn for_algorithm(algorithm: Algorithm, value: f64) -> Self {
        let count = value as usize;
        match algorithm {
            Algorithm::KMeans => Self::kmeans(count),
            Algorithm::Gmm => Self::gmm(count),
            Algorithm::DbScan => Self::dbscan(value, DEFAULT_MIN_PTS),
            Algorithm::Agglomerative => Self::agglomerative(count),
            Algorithm::FuzzyCMeans => Self::fuzzy_cmeans(count),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            ClusterParams::KMeans { .. } => Algorithm::KMeans,
            ClusterParams::Gmm { .. } => Algorithm::Gmm,
            ClusterParams::DbScan { .. } => Algorithm::DbScan,
            ClusterParams::Agglomerative { .. } => Algorithm::Agglomerative,
            ClusterParams::FuzzyCMeans { .. } => Algorithm::FuzzyCMeans,
        }
    }

    /// Copy with the tuned parameter (cluster count, or ε) replaced.
    pub fn with_tuned_value(&self, value: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ClusterParams::KMeans { n_clusters, .. }
            | ClusterParams::Gmm { n_clusters, .. }
            | ClusterParams::Agglomerative { n_clusters }
            | ClusterParams::FuzzyCMeans { n_clusters, .. } => *n_clusters = value as usize,
            ClusterParams::DbScan { eps, .. } => *eps = value,
        }
        out
    }

    fn validate(&self, n_samples: usize) -> Result<()> {
        let check_count = |c: usize| {
            if c == 0 || c > n_samples {
                Err(Error::InvalidParameter(format!(
                    "cluster count {c} must be in 1..={n_samples}"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            ClusterParams::KMeans {
                n_clusters,
                n_init,
                max_iter,
            } => {
                check_count(n_clusters)?;
                if n_init == 0 || max_iter == 0 {
                    return Err(Error::InvalidParameter("n_init and max_iter must be positive".into()));
                }
            }
            ClusterParams::Gmm {
                n_clusters,
                reg_covar,
                tol,
                max_iter,
            } => {
                check_count(n_clusters)?;
                if !(reg_covar > 0.0) || !(tol > 0.0) || max_iter == 0 {
                    return Err(Error::InvalidParameter(
                        "reg_covar, tol and max_iter must be positive".into(),
                    ));
                }
            }
            ClusterParams::DbScan { eps, min_pts } => {
                if !(eps > 0.0) || !eps.is_finite() {
                    return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
                }
                if min_pts == 0 {
                    return Err(Error::InvalidParameter("min_pts must be at least 1".into()));
                }
            }
            ClusterParams::Agglomerative { n_clusters } => check_count(n_clusters)?,
            ClusterParams::FuzzyCMeans {
                n_clusters,
                fuzzifier,
                error,
                max_iter,
            } => {
                check_count(n_clusters)?;
                if !(fuzzifier > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "fuzzifier must exceed 1, got {fuzzifier}"
                    )));
                }
                if !(error > 0.0) || max_iter == 0 {
                    return Err(Error::InvalidParameter("error and max_iter must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// A frozen clustering that can assign new samples to its clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum FittedClusterer {
    KMeans(KMeansModel),
    Gmm(GmmModel),
    DbScan(DbscanModel),
    Agglomerative(AgglomerativeModel),
    FuzzyCMeans(FuzzyModel),
}

/// Fits `params` to `data`. Deterministic for a given seed.
pub fn fit(params: &ClusterParams, data: &DataMatrix, seed: RandomSeed) -> Result<FittedClusterer> {
    params.validate(data.n_samples())?;
    let x = data.view();
    Ok(match *params {
        ClusterParams::KMeans {
            n_clusters,
            n_init,
            max_iter,
        } => FittedClusterer::KMeans(KMeansModel::fit(x, n_clusters, n_init, max_iter, seed)?),
        ClusterParams::Gmm {
            n_clusters,
            reg_covar,
            tol,
            max_iter,
        } => FittedClusterer::Gmm(GmmModel::fit(x, n_clusters, reg_covar, tol, max_iter, seed)?),
        ClusterParams::DbScan { eps, min_pts } => {
            FittedClusterer::DbScan(DbscanModel::fit(x, eps, min_pts))
        }
        ClusterParams::Agglomerative { n_clusters } => {
            FittedClusterer::Agglomerative(AgglomerativeModel::fit(x, n_clusters))
        }
        ClusterParams::FuzzyCMeans {
            n_clusters,
            fuzzifier,
            error,
            max_iter,
        } => FittedClusterer::FuzzyCMeans(FuzzyModel::fit(
            x, n_clusters, fuzzifier, error, max_iter, seed,
        )?),
    })
}

impl FittedClusterer {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            FittedClusterer::KMeans(_) => Algorithm::KMeans,
            FittedClusterer::Gmm(_) => Algorithm::Gmm,
            FittedClusterer::DbScan(_) => Algorithm::DbScan,
            FittedClusterer::Agglomerative(_) => Algorithm::Agglomerative,
            FittedClusterer::FuzzyCMeans(_) => Algorithm::FuzzyCMeans,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            FittedClusterer::KMeans(m) => m.n_features(),
            FittedClusterer::Gmm(m) => m.n_features(),
            FittedClusterer::DbScan(m) => m.n_features(),
            FittedClusterer::Agglomerative(m) => m.n_features(),
            FittedClusterer::FuzzyCMeans(m) => m.n_features(),
        }
    }

    pub fn train_labels(&self) -> &ClusterAssignment {
        match self {
            FittedClusterer::KMeans(m) => &m.train_labels,
            FittedClusterer::Gmm(m) => &m.train_labels,
            FittedClusterer::DbScan(m) => &m.train_labels,
            FittedClusterer::Agglomerative(m) => &m.train_labels,
            FittedClusterer::FuzzyCMeans(m) => &m.train_labels,
        }
    }

    pub fn n_clusters(&self) -> usize {
        self.train_labels().n_clusters()
    }

    /// True when an iterative fit stopped at its iteration cap. The model is
    /// still usable.
    pub fn non_converged(&self) -> bool {
        match self {
            FittedClusterer::Gmm(m) => !m.converged,
            FittedClusterer::FuzzyCMeans(m) => !m.converged,
            _ => false,
        }
    }

    /// Assigns each row of `samples` to an existing cluster (or noise).
    pub fn assign_rows(&self, samples: ArrayView2<f64>) -> Result<Vec<Label>> {
        if samples.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: samples.ncols(),
            });
        }
        Ok(match self {
            FittedClusterer::KMeans(m) => m.assign(samples),
            FittedClusterer::Gmm(m) => m.assign(samples),
            FittedClusterer::DbScan(m) => m.assign(samples),
            FittedClusterer::Agglomerative(m) => m.assign(samples),
            FittedClusterer::FuzzyCMeans(m) => m.assign(samples),
        })
    }

    pub fn assign(&self, samples: &DataMatrix) -> Result<ClusterAssignment> {
        let labels = self.assign_rows(samples.view())?;
        Ok(ClusterAssignment::from_parts(labels, self.n_clusters()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Per-sample cluster assignment with the spec'd tie rules; free-function form.
pub fn assign(model: &FittedClusterer, samples: &DataMatrix) -> Result<ClusterAssignment> {
    model.assign(samples)
}

pub(crate) fn sq_dist(a: &[f64], b: impl IntoIterator<Item = f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the smallest value; ties go to the lowest index.
pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v < best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

pub(crate) fn rows_to_vecs(x: ArrayView2<f64>) -> Vec<Vec<f64>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_argmax_ties_low() {
        assert_eq!(argmin([2.0, 1.0, 1.0]), 1);
        assert_eq!(argmax([0.5, 3.0, 3.0, 1.0]), 1);
    }

    #[test]
    fn tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::from_tag(a.tag()), Some(a));
        }
        assert_eq!(Algorithm::from_tag("spectral"), None);
    }

    #[test]
    fn params_validation() {
        let d = DataMatrix::from_column(&[0.0, 1.0, 2.0]).unwrap();
        let s = RandomSeed(0);
        assert!(fit(&ClusterParams::kmeans(4), &d, s).is_err());
        assert!(fit(&ClusterParams::dbscan(0.0, 4), &d, s).is_err());
        assert!(fit(&ClusterParams::dbscan(1.0, 0), &d, s).is_err());
        let mut fcm = ClusterParams::fuzzy_cmeans(2);
        if let ClusterParams::FuzzyCMeans { fuzzifier, .. } = &mut fcm {
            *fuzzifier = 1.0;
        }
        assert!(fit(&fcm, &d, s).is_err());
    }

    #[test]
    fn dimension_mismatch_on_assign() {
        let d = DataMatrix::from_column(&[0.0, 1.0, 9.0, 10.0]).unwrap();
        let m = fit(&ClusterParams::kmeans(2), &d, RandomSeed(1)).unwrap();
        let wide = DataMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert!(matches!(m.assign(&wide), Err(Error::DimensionMismatch { .. })));
    }
}

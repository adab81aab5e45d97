//! Silhouette-driven choice of the cluster count (or DBSCAN ε).

use serde::{Deserialize, Serialize};

use super::{fit, silhouette_score, ClusterParams};
use crate::data::DataMatrix;
use crate::rng::RandomSeed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteCandidate {
    /// Cluster count, or ε for DBSCAN.
    pub value: f64,
    /// Mean silhouette; `None` when the fit failed or produced fewer than two
    /// clusters (treated as -∞).
    pub score: Option<f64>,
    pub n_clusters: usize,
    pub n_noise: usize,
    pub all_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteReport {
    pub candidates: Vec<SilhouetteCandidate>,
    pub selected: Option<f64>,
    /// Every DBSCAN candidate labeled all samples as noise.
    pub all_noise: bool,
}

impl SilhouetteReport {
    pub fn selected_params(&self, template: &ClusterParams) -> Option<ClusterParams> {
        self.selected.map(|v| template.with_tuned_value(v))
    }
}

/// Fits `template` once per candidate value and keeps the best mean
/// silhouette. Ties go to the smallest value.
pub fn select_clusters(
    template: &ClusterParams,
    data: &DataMatrix,
    candidates: &[f64],
    seed: RandomSeed,
) -> SilhouetteReport {
    let mut out = Vec::with_capacity(candidates.len());
    for &value in candidates {
        let params = template.with_tuned_value(value);
        let cand = match fit(&params, data, seed) {
            Ok(model) => {
                let labels = model.train_labels();
                let score = silhouette_score(data, labels).ok();
                SilhouetteCandidate {
                    value,
                    score,
                    n_clusters: labels.cluster_sizes().iter().filter(|&&s| s > 0).count(),
                    n_noise: labels.n_noise(),
                    all_noise: labels.is_all_noise(),
                }
            }
            Err(_) => SilhouetteCandidate {
                value,
                score: None,
                n_clusters: 0,
                n_noise: 0,
                all_noise: false,
            },
        };
        out.push(cand);
    }
    let mut selected: Option<(f64, f64)> = None;
    for c in &out {
        if let Some(s) = c.score {
            let better = match selected {
                None => true,
                Some((bs, bv)) => s > bs || (s == bs && c.value < bv),
            };
            if better {
                selected = Some((s, c.value));
            }
        }
    }
    let all_noise = !out.is_empty() && out.iter().all(|c| c.all_noise);
    SilhouetteReport {
        candidates: out,
        selected: selected.map(|(_, v)| v),
        all_noise,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbscan_all_noise_flagged() {
        let d = DataMatrix::from_column(&[0.0, 10.0, 20.0, 30.0, 40.0]).unwrap();
        let r = select_clusters(&ClusterParams::dbscan(1.0, 4), &d, &[0.5, 1.0, 2.0], RandomSeed(0));
        assert!(r.all_noise);
        assert_eq!(r.selected, None);
    }

    #[test]
    fn picks_obvious_count() {
        let d = DataMatrix::from_column(&[0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 10.0, 10.1, 10.2]).unwrap();
        let r = select_clusters(&ClusterParams::kmeans(2), &d, &[2.0, 3.0, 4.0], RandomSeed(1));
        assert_eq!(r.selected, Some(3.0));
        assert!(!r.all_noise);
    }

    #[test]
    fn ties_prefer_smaller_value() {
        // Two identical groups: any ε in the plateau gives the same labels.
        let d = DataMatrix::from_column(&[0.0, 0.1, 0.2, 0.3, 9.0, 9.1, 9.2, 9.3]).unwrap();
        let r = select_clusters(&ClusterParams::dbscan(1.0, 2), &d, &[2.0, 1.0, 0.5], RandomSeed(0));
        assert_eq!(r.selected, Some(0.5));
    }
}

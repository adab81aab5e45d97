//! Fuzzy c-means.
//!
//! New samples are assigned by one membership update against the frozen
//! centers, which is the fixed point of refitting with immovable centers.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{argmax, kmeans::kmeans_plus_plus, sq_dist};
use crate::data::{ClusterAssignment, Label};
use crate::error::Result;
use crate::rng::RandomSeed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyModel {
    pub centers: Vec<Vec<f64>>,
    pub fuzzifier: f64,
    pub converged: bool,
    pub n_iter: usize,
    pub train_labels: ClusterAssignment,
}

/// Standard membership of one point: u_c = 1 / Σ_k (d_c / d_k)^(2/(m-1)).
/// A point on a center belongs fully to the first such center.
pub(crate) fn membership(centers: &[Vec<f64>], fuzzifier: f64, row: &[f64]) -> Vec<f64> {
    let d2: Vec<f64> = centers.iter().map(|c| sq_dist(c, row.iter().copied())).collect();
    let mut u = vec![0.0; centers.len()];
    if let Some(hit) = d2.iter().position(|&d| d == 0.0) {
        u[hit] = 1.0;
        return u;
    }
    let p = 1.0 / (fuzzifier - 1.0);
    for (c, uc) in u.iter_mut().enumerate() {
        let s: f64 = d2.iter().map(|dk| (d2[c] / dk).powf(p)).sum();
        *uc = 1.0 / s;
    }
    u
}

fn update_centers(rows: &[Vec<f64>], u: &[Vec<f64>], fuzzifier: f64, centers: &mut [Vec<f64>]) {
    for (c, center) in centers.iter_mut().enumerate() {
        let mut denom = 0.0;
        center.iter_mut().for_each(|v| *v = 0.0);
        for (row, ui) in rows.iter().zip(u) {
            let w = ui[c].powf(fuzzifier);
            denom += w;
            for (v, x) in center.iter_mut().zip(row) {
                *v += w * x;
            }
        }
        center.iter_mut().for_each(|v| *v /= denom);
    }
}

impl FuzzyModel {
    /// Alternates center and membership updates until the Frobenius norm of
    /// the membership change drops below `error`.
    pub fn fit(
        x: ArrayView2<f64>,
        k: usize,
        fuzzifier: f64,
        error: f64,
        max_iter: usize,
        seed: RandomSeed,
    ) -> Result<Self> {
        let rows = super::rows_to_vecs(x);
        let mut rng = seed.stream("fcm-init", &[]);
        let mut centers = kmeans_plus_plus(x, k, &mut rng)?;
        let mut u: Vec<Vec<f64>> = rows.iter().map(|r| membership(&centers, fuzzifier, r)).collect();
        let mut converged = false;
        let mut n_iter = 0;
        while n_iter < max_iter {
            n_iter += 1;
            update_centers(&rows, &u, fuzzifier, &mut centers);
            let next: Vec<Vec<f64>> = rows.iter().map(|r| membership(&centers, fuzzifier, r)).collect();
            let change: f64 = next
                .iter()
                .zip(&u)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)))
                .sum::<f64>()
                .sqrt();
            u = next;
            if change < error {
                converged = true;
                break;
            }
        }
        let mut model = FuzzyModel {
            centers,
            fuzzifier,
            converged,
            n_iter,
            train_labels: ClusterAssignment::from_parts(Vec::new(), k),
        };
        let labels = model.assign(x);
        model.train_labels = ClusterAssignment::from_parts(labels, k);
        Ok(model)
    }

    pub fn n_features(&self) -> usize {
        self.centers[0].len()
    }

    pub fn memberships(&self, samples: ArrayView2<f64>) -> Vec<Vec<f64>> {
        samples
            .rows()
            .into_iter()
            .map(|r| membership(&self.centers, self.fuzzifier, &r.to_vec()))
            .collect()
    }

    pub fn assign(&self, samples: ArrayView2<f64>) -> Vec<Label> {
        self.memberships(samples)
            .into_iter()
            .map(|u| Some(argmax(u)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn memberships_sum_to_one() {
        let centers = vec![vec![0.0, 0.0], vec![3.0, 1.0], vec![-2.0, 5.0]];
        for row in [[0.3, 0.4], [10.0, -3.0], [1.5, 0.5]] {
            let u = membership(&centers, 2.0, &row);
            assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_center_closed_form() {
        // m = 2: u_0 = d1^2 / (d0^2 + d1^2)
        let centers = vec![vec![0.0], vec![4.0]];
        let u = membership(&centers, 2.0, &[1.0]);
        assert!((u[0] - 9.0 / 10.0).abs() < 1e-12);
    }

    #[test]
    fn point_on_center_takes_that_cluster() {
        let m = FuzzyModel {
            centers: vec![vec![0.0], vec![4.0]],
            fuzzifier: 2.0,
            converged: true,
            n_iter: 1,
            train_labels: ClusterAssignment::from_parts(vec![], 2),
        };
        assert_eq!(m.assign(array![[4.0], [2.0], [0.1]].view()), vec![Some(1), Some(0), Some(0)]);
    }

    #[test]
    fn fit_separates_and_reassigns_training_data() {
        let x = array![[0.0], [0.2], [0.4], [8.0], [8.3], [8.1]];
        let m = FuzzyModel::fit(x.view(), 2, 2.0, 0.005, 1000, RandomSeed(4)).unwrap();
        assert!(m.converged);
        let l = m.train_labels.labels();
        assert_eq!(l[0], l[1]);
        assert_eq!(l[1], l[2]);
        assert_eq!(l[3], l[4]);
        assert_ne!(l[0], l[3]);
        assert_eq!(m.assign(x.view()), l);
    }
}

//! Full-covariance Gaussian mixture fitted by expectation-maximization.
//!
//! Initialized from the k-means solution. A ridge of `reg_covar` is added to
//! every covariance diagonal so the factors stay positive-definite.

use std::f64::consts::PI;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{argmax, kmeans::KMeansModel};
use crate::data::{ClusterAssignment, Label};
use crate::error::{Error, Result};
use crate::rng::RandomSeed;

/// Serialized form; the Cholesky factors are rebuilt on load.
#[derive(Serialize, Deserialize)]
struct GmmRepr {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Vec<Vec<Vec<f64>>>,
    reg_covar: f64,
    converged: bool,
    n_iter: usize,
    log_likelihood: f64,
    train_labels: ClusterAssignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GmmRepr", into = "GmmRepr")]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<Vec<Vec<f64>>>,
    pub reg_covar: f64,
    pub converged: bool,
    pub n_iter: usize,
    /// Mean per-sample log-likelihood at the final iteration.
    pub log_likelihood: f64,
    pub train_labels: ClusterAssignment,
    factors: Vec<Component>,
}

/// Precomputed lower Cholesky factor and normalizing constant.
#[derive(Debug, Clone, PartialEq)]
struct Component {
    chol: Vec<Vec<f64>>,
    log_norm: f64,
}

impl TryFrom<GmmRepr> for GmmModel {
    type Error = Error;

    fn try_from(r: GmmRepr) -> Result<Self> {
        let factors = build_factors(&r.weights, &r.covariances)?;
        Ok(GmmModel {
            weights: r.weights,
            means: r.means,
            covariances: r.covariances,
            reg_covar: r.reg_covar,
            converged: r.converged,
            n_iter: r.n_iter,
            log_likelihood: r.log_likelihood,
            train_labels: r.train_labels,
            factors,
        })
    }
}

impl From<GmmModel> for GmmRepr {
    fn from(m: GmmModel) -> Self {
        GmmRepr {
            weights: m.weights,
            means: m.means,
            covariances: m.covariances,
            reg_covar: m.reg_covar,
            converged: m.converged,
            n_iter: m.n_iter,
            log_likelihood: m.log_likelihood,
            train_labels: m.train_labels,
        }
    }
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

fn build_factors(weights: &[f64], covariances: &[Vec<Vec<f64>>]) -> Result<Vec<Component>> {
    covariances
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(c, (cov, &w))| {
            let chol = cholesky(cov).ok_or(Error::DegenerateCluster { cluster: c })?;
            let f = cov.len() as f64;
            let log_det: f64 = 2.0 * chol.iter().enumerate().map(|(i, r)| r[i].ln()).sum::<f64>();
            Ok(Component {
                chol,
                log_norm: w.ln() - 0.5 * (f * (2.0 * PI).ln() + log_det),
            })
        })
        .collect()
}

impl Component {
    /// log(w) + log N(x; mean, cov).
    fn weighted_log_density(&self, mean: &[f64], x: impl Iterator<Item = f64>) -> f64 {
        let diff: Vec<f64> = x.zip(mean).map(|(a, m)| a - m).collect();
        let mut z = vec![0.0; diff.len()];
        let mut maha = 0.0;
        for i in 0..diff.len() {
            let s: f64 = (0..i).map(|k| self.chol[i][k] * z[k]).sum();
            z[i] = (diff[i] - s) / self.chol[i][i];
            maha += z[i] * z[i];
        }
        self.log_norm - 0.5 * maha
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl GmmModel {
    pub fn fit(
        x: ArrayView2<f64>,
        k: usize,
        reg_covar: f64,
        tol: f64,
        max_iter: usize,
        seed: RandomSeed,
    ) -> Result<Self> {
        let n = x.nrows();
        let f = x.ncols();
        let init = KMeansModel::fit(x, k, 10, 300, seed.derive("gmm-init", &[]))?;

        // Hard responsibilities from k-means for the first M-step.
        let mut resp = vec![vec![0.0; k]; n];
        for (r, l) in resp.iter_mut().zip(init.train_labels.labels()) {
            r[l.expect("k-means never yields noise")] = 1.0;
        }

        let mut weights = vec![0.0; k];
        let mut means = vec![vec![0.0; f]; k];
        let mut covariances = vec![vec![vec![0.0; f]; f]; k];
        let mut log_likelihood = f64::NEG_INFINITY;
        let mut converged = false;
        let mut n_iter = 0;
        let mut factors;
        loop {
            m_step(x, &resp, reg_covar, &mut weights, &mut means, &mut covariances)?;
            factors = build_factors(&weights, &covariances)?;
            if n_iter == max_iter {
                break;
            }
            n_iter += 1;
            // E-step
            let mut total = 0.0;
            let mut logp = vec![0.0; k];
            for (row, r) in x.rows().into_iter().zip(resp.iter_mut()) {
                for (c, lp) in logp.iter_mut().enumerate() {
                    *lp = factors[c].weighted_log_density(&means[c], row.iter().copied());
                }
                let norm = log_sum_exp(&logp);
                total += norm;
                for (ri, lp) in r.iter_mut().zip(&logp) {
                    *ri = (lp - norm).exp();
                }
            }
            let ll = total / n as f64;
            let change = (ll - log_likelihood).abs();
            log_likelihood = ll;
            if change < tol {
                converged = true;
                m_step(x, &resp, reg_covar, &mut weights, &mut means, &mut covariances)?;
                factors = build_factors(&weights, &covariances)?;
                break;
            }
        }

        let mut model = GmmModel {
            weights,
            means,
            covariances,
            reg_covar,
            converged,
            n_iter,
            log_likelihood,
            train_labels: ClusterAssignment::from_parts(Vec::new(), k),
            factors,
        };
        let labels = model.assign(x);
        model.train_labels = ClusterAssignment::from_parts(labels, k);
        Ok(model)
    }

    pub fn n_features(&self) -> usize {
        self.means[0].len()
    }

    fn log_joint(&self, row: impl Iterator<Item = f64> + Clone) -> Vec<f64> {
        self.factors
            .iter()
            .zip(&self.means)
            .map(|(comp, mean)| comp.weighted_log_density(mean, row.clone()))
            .collect()
    }

    /// Posterior cluster probabilities for each row.
    pub fn posteriors(&self, samples: ArrayView2<f64>) -> Vec<Vec<f64>> {
        samples
            .rows()
            .into_iter()
            .map(|r| {
                let lj = self.log_joint(r.iter().copied());
                let top = lj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = lj.iter().map(|v| (v - top).exp()).collect();
                let total: f64 = w.iter().sum();
                w.iter().map(|v| v / total).collect()
            })
            .collect()
    }

    pub fn assign(&self, samples: ArrayView2<f64>) -> Vec<Label> {
        samples
            .rows()
            .into_iter()
            .map(|r| Some(argmax(self.log_joint(r.iter().copied()))))
            .collect()
    }
}

fn m_step(
    x: ArrayView2<f64>,
    resp: &[Vec<f64>],
    reg_covar: f64,
    weights: &mut [f64],
    means: &mut [Vec<f64>],
    covariances: &mut [Vec<Vec<f64>>],
) -> Result<()> {
    let n = x.nrows();
    let f = x.ncols();
    for c in 0..weights.len() {
        let nc: f64 = resp.iter().map(|r| r[c]).sum();
        if !(nc > 1e-10) {
            return Err(Error::DegenerateCluster { cluster: c });
        }
        weights[c] = nc / n as f64;
        let mean = &mut means[c];
        mean.iter_mut().for_each(|m| *m = 0.0);
        for (row, r) in x.rows().into_iter().zip(resp) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += r[c] * v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= nc);
        let cov = &mut covariances[c];
        for row in cov.iter_mut() {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut d = vec![0.0; f];
        for (row, r) in x.rows().into_iter().zip(resp) {
            let w = r[c];
            if w == 0.0 {
                continue;
            }
            for (di, (v, m)) in d.iter_mut().zip(row.iter().zip(mean.iter())) {
                *di = v - m;
            }
            for i in 0..f {
                for j in 0..=i {
                    cov[i][j] += w * d[i] * d[j];
                }
            }
        }
        for i in 0..f {
            for j in 0..=i {
                cov[i][j] /= nc;
                cov[j][i] = cov[i][j];
            }
            cov[i][i] += reg_covar;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{fit, ClusterParams, FittedClusterer};
    use crate::data::DataMatrix;
    use ndarray::array;

    fn two_unit_components() -> GmmModel {
        GmmModel::try_from(GmmRepr {
            weights: vec![0.5, 0.5],
            means: vec![vec![0.0], vec![10.0]],
            covariances: vec![vec![vec![1.0]], vec![vec![1.0]]],
            reg_covar: 0.0,
            converged: true,
            n_iter: 0,
            log_likelihood: 0.0,
            train_labels: ClusterAssignment::from_parts(vec![], 2),
        })
        .unwrap()
    }

    #[test]
    fn single_component_is_ml_gaussian() {
        let x = array![[1.0, 2.0], [3.0, 1.0], [0.0, 0.0], [4.0, 5.0], [2.0, 2.0]];
        let d = DataMatrix::new(x.clone()).unwrap();
        let FittedClusterer::Gmm(m) = fit(&ClusterParams::gmm(1), &d, RandomSeed(9)).unwrap() else {
            unreachable!()
        };
        let n = 5.0;
        let mean = [10.0 / n, 10.0 / n];
        for j in 0..2 {
            assert!((m.means[0][j] - mean[j]).abs() < 1e-12);
        }
        for i in 0..2 {
            for j in 0..2 {
                let cov: f64 = x
                    .rows()
                    .into_iter()
                    .map(|r| (r[i] - mean[i]) * (r[j] - mean[j]))
                    .sum::<f64>()
                    / n;
                let floor = if i == j { 1e-6 } else { 0.0 };
                assert!((m.covariances[0][i][j] - cov - floor).abs() < 1e-12);
            }
        }
        assert!((m.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn posterior_prefers_nearer_component() {
        let m = two_unit_components();
        let x = array![[2.0]];
        assert_eq!(m.assign(x.view()), vec![Some(0)]);
        let p = &m.posteriors(x.view())[0];
        // Ratio exp(-2) / exp(-32)
        assert!((p[0] / p[1] - (30.0f64).exp()).abs() / (30.0f64).exp() < 1e-9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Midpoint tie goes to the lower id.
        assert_eq!(m.assign(array![[5.0]].view()), vec![Some(0)]);
    }

    #[test]
    fn serde_round_trip_rebuilds_factors() {
        let m = two_unit_components();
        let text = serde_json::to_string(&m).unwrap();
        let back: GmmModel = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn non_pd_covariance_rejected() {
        let bad = GmmRepr {
            weights: vec![1.0],
            means: vec![vec![0.0, 0.0]],
            covariances: vec![vec![vec![1.0, 2.0], vec![2.0, 1.0]]],
            reg_covar: 0.0,
            converged: true,
            n_iter: 0,
            log_likelihood: 0.0,
            train_labels: ClusterAssignment::from_parts(vec![], 1),
        };
        assert!(GmmModel::try_from(bad).is_err());
    }
}

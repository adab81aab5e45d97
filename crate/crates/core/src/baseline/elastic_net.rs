//! Elastic-net penalized logistic regression fitted by accelerated proximal
//! gradient with backtracking.
//!
//! Minimizes
//!
//! ```text
//! mean_i [ log(1 + exp(z_i)) - y_i z_i ] + λ (α ‖w‖₁ + (1-α)/2 ‖w‖₂²),   z = b + X w
//! ```
//!
//! with the intercept `b` left unpenalized.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITER: usize = 5000;
pub const OBJECTIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub n_iter: usize,
    pub converged: bool,
    /// Set when λ = 0 and the fitted scores separate the classes perfectly:
    /// the unpenalized optimum is at infinity and the weights only stop
    /// growing because the loss gradient underflows or the iteration cap hits.
    pub separation_warning: bool,
}

impl ElasticNetModel {
    /// Linear scores b + x·w.
    pub fn decision_function(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| self.intercept + r.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>())
            .collect()
    }

    /// Value of the penalized objective on (x, y).
    pub fn objective(&self, x: ArrayView2<f64>, y: &[f64]) -> f64 {
        objective(x, y, &Array1::from(self.weights.clone()), self.intercept, self.lambda, self.alpha)
    }
}

fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Smooth part: mean logistic loss plus the ridge term.
fn smooth(x: ArrayView2<f64>, y: &[f64], w: &Array1<f64>, b: f64, ridge: f64) -> f64 {
    let z = x.dot(w);
    let n = y.len() as f64;
    let loss: f64 = z.iter().zip(y).map(|(&zi, &yi)| log1p_exp(zi + b) - yi * (zi + b)).sum();
    loss / n + 0.5 * ridge * w.dot(w)
}

fn smooth_grad(x: ArrayView2<f64>, y: &[f64], w: &Array1<f64>, b: f64, ridge: f64) -> (Array1<f64>, f64) {
    let n = y.len() as f64;
    let z = x.dot(w);
    let resid: Array1<f64> = z.iter().zip(y).map(|(&zi, &yi)| sigmoid(zi + b) - yi).collect();
    let gw = x.t().dot(&resid) / n + ridge * w;
    let gb = resid.sum() / n;
    (gw, gb)
}

pub(crate) fn objective(
    x: ArrayView2<f64>,
    y: &[f64],
    w: &Array1<f64>,
    b: f64,
    lambda: f64,
    alpha: f64,
) -> f64 {
    smooth(x, y, w, b, lambda * (1.0 - alpha)) + lambda * alpha * w.iter().map(|v| v.abs()).sum::<f64>()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Gradient of the smooth part at the model's solution; used for optimality checks.
pub fn smooth_gradient(model: &ElasticNetModel, x: ArrayView2<f64>, y: &[f64]) -> (Vec<f64>, f64) {
    let w = Array1::from(model.weights.clone());
    let (gw, gb) = smooth_grad(x, y, &w, model.intercept, model.lambda * (1.0 - model.alpha));
    (gw.to_vec(), gb)
}

pub(crate) fn validate_inputs(x: ArrayView2<f64>, y: &[usize], lambda: f64, alpha: f64) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidData(format!("{} labels for {} samples", y.len(), x.nrows())));
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::InvalidData("labels must be 0 or 1".into()));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::InvalidData("both classes must be present".into()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must be in [0, 1], got {alpha}")));
    }
    Ok(())
}

/// Fits from a zero start.
pub fn fit_elastic_net_logreg(
    x: ArrayView2<f64>,
    y: &[usize],
    lambda: f64,
    alpha: f64,
) -> Result<ElasticNetModel> {
    fit_from(x, y, lambda, alpha, None)
}

/// Fits starting from `warm` (weights, intercept) when given.
pub fn fit_from(
    x: ArrayView2<f64>,
    y: &[usize],
    lambda: f64,
    alpha: f64,
    warm: Option<(&[f64], f64)>,
) -> Result<ElasticNetModel> {
    validate_inputs(x, y, lambda, alpha)?;
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let f = x.ncols();
    let ridge = lambda * (1.0 - alpha);
    let l1 = lambda * alpha;

    let (mut w, mut b) = match warm {
        Some((w0, b0)) => (Array1::from(w0.to_vec()), b0),
        None => {
            let p = yf.iter().sum::<f64>() / yf.len() as f64;
            (Array1::zeros(f), (p / (1.0 - p)).ln())
        }
    };
    let mut obj = objective(x, &yf, &w, b, lambda, alpha);
    // FISTA extrapolation point
    let (mut vw, mut vb) = (w.clone(), b);
    let mut momentum = 1.0f64;
    let mut step = 1.0f64;
    let mut converged = false;
    let mut n_iter = 0;

    while n_iter < MAX_ITER {
        n_iter += 1;
        let (gw, gb) = smooth_grad(x, &yf, &vw, vb, ridge);
        let fv = smooth(x, &yf, &vw, vb, ridge);
        let (nw, nb) = loop {
            let nw: Array1<f64> = vw
                .iter()
                .zip(&gw)
                .map(|(v, g)| soft_threshold(v - step * g, step * l1))
                .collect();
            let nb = vb - step * gb;
            let dw = &nw - &vw;
            let db = nb - vb;
            let quad = fv + gw.dot(&dw) + gb * db + (dw.dot(&dw) + db * db) / (2.0 * step);
            if smooth(x, &yf, &nw, nb, ridge) <= quad + 1e-15 || step < 1e-12 {
                break (nw, nb);
            }
            step *= 0.5;
        };
        let new_obj = objective(x, &yf, &nw, nb, lambda, alpha);
        if new_obj > obj {
            // Restart momentum from the last accepted iterate.
            vw = w.clone();
            vb = b;
            momentum = 1.0;
            continue;
        }
        let next_m = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / next_m;
        vw = &nw + &((&nw - &w) * beta);
        vb = nb + beta * (nb - b);
        momentum = next_m;
        let change = obj - new_obj;
        w = nw;
        b = nb;
        obj = new_obj;
        if change < OBJECTIVE_TOL * obj.abs().max(1.0) && gradient_map_small(x, &yf, &w, b, ridge, l1) {
            converged = true;
            break;
        }
        step *= 1.25;
    }

    let z = x.dot(&w);
    let separated = z.iter().zip(y).all(|(zi, &yi)| (zi + b > 0.0) == (yi == 1));
    Ok(ElasticNetModel {
        weights: w.to_vec(),
        intercept: b,
        lambda,
        alpha,
        n_iter,
        converged,
        separation_warning: lambda == 0.0 && separated,
    })
}

/// Subgradient optimality residual below 1e-7.
fn gradient_map_small(x: ArrayView2<f64>, y: &[f64], w: &Array1<f64>, b: f64, ridge: f64, l1: f64) -> bool {
    let (gw, gb) = smooth_grad(x, y, w, b, ridge);
    kkt_residual(w.view(), gw.view(), gb, l1) < 1e-7
}

/// Largest violation of the first-order conditions.
pub(crate) fn kkt_residual(w: ArrayView1<f64>, gw: ArrayView1<f64>, gb: f64, l1: f64) -> f64 {
    w.iter()
        .zip(gw)
        .map(|(&wi, &gi)| {
            if wi != 0.0 {
                (gi + l1 * wi.signum()).abs()
            } else {
                (gi.abs() - l1).max(0.0)
            }
        })
        .fold(gb.abs(), f64::max)
}

/// Largest |grad| at w = 0: the smallest pure-L1 λ that zeroes every weight.
pub fn l1_kill_threshold(x: ArrayView2<f64>, y: &[usize]) -> f64 {
    let n = y.len() as f64;
    let ybar = y.iter().sum::<usize>() as f64 / n;
    x.columns()
        .into_iter()
        .map(|c| (c.iter().zip(y).map(|(xi, &yi)| xi * (yi as f64 - ybar)).sum::<f64>() / n).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn toy() -> (Array2<f64>, Vec<usize>) {
        let x = array![
            [0.5, 1.2, -0.3],
            [1.5, -0.2, 0.8],
            [-0.7, 0.3, 1.1],
            [2.0, 0.9, -1.4],
            [-1.2, -1.0, 0.2],
            [0.1, 0.4, 0.6],
            [-0.4, 1.8, -0.9],
            [1.1, -1.3, 0.5],
        ];
        (x, vec![1, 1, 0, 1, 0, 0, 1, 0])
    }

    #[test]
    fn huge_penalty_gives_log_odds_intercept() {
        let (x, y) = toy();
        let m = fit_elastic_net_logreg(x.view(), &y, 1e6, 0.5).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-6));
        assert!((m.intercept - 0.0).abs() < 1e-6); // 4 of 8 positive
        let y2 = vec![1, 1, 0, 1, 0, 1, 1, 0];
        let m2 = fit_elastic_net_logreg(x.view(), &y2, 1e6, 0.5).unwrap();
        assert!((m2.intercept - (5.0f64 / 3.0).ln()).abs() < 1e-6);
    }

    #[test]
    fn satisfies_first_order_conditions() {
        let (x, y) = toy();
        for &(lambda, alpha) in &[(0.01, 0.5), (0.05, 1.0), (0.2, 0.1), (0.001, 0.9)] {
            let m = fit_elastic_net_logreg(x.view(), &y, lambda, alpha).unwrap();
            assert!(m.converged, "λ={lambda} α={alpha}");
            let (gw, gb) = smooth_gradient(&m, x.view(), &y.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let r = kkt_residual(ArrayView1::from(&m.weights), ArrayView1::from(&gw), gb, lambda * alpha);
            assert!(r < 1e-5, "residual {r} at λ={lambda} α={alpha}");
        }
    }

    #[test]
    fn above_kill_threshold_all_zero() {
        let (x, y) = toy();
        let t = l1_kill_threshold(x.view(), &y);
        let m = fit_elastic_net_logreg(x.view(), &y, t * 1.01, 1.0).unwrap();
        assert!(m.weights.iter().all(|&w| w == 0.0), "{:?}", m.weights);
        let below = fit_elastic_net_logreg(x.view(), &y, t * 0.8, 1.0).unwrap();
        assert!(below.weights.iter().any(|&w| w != 0.0));
    }

    #[test]
    fn separable_unpenalized_warns() {
        let x = array![[-1.0], [-1.0], [1.0], [1.0]];
        let m = fit_elastic_net_logreg(x.view(), &[0, 0, 1, 1], 0.0, 0.5).unwrap();
        assert!(m.separation_warning);
        assert!(m.weights[0] > 5.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (x, y) = toy();
        assert!(fit_elastic_net_logreg(x.view(), &y, -1.0, 0.5).is_err());
        assert!(fit_elastic_net_logreg(x.view(), &y, 0.1, 1.5).is_err());
        assert!(fit_elastic_net_logreg(x.view(), &[0; 8], 0.1, 0.5).is_err());
    }
}

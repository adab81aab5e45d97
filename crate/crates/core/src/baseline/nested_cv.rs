use std::io::Write;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::elastic_net::{fit_from, ElasticNetModel};
use crate::data::{DataMatrix, FeatureGrouping, MIN_STD};
use crate::error::{Error, Result};
use crate::explain::GroupValues;
use crate::rng::RandomSeed;

/// Attempts per split before giving up on finding both classes on each side.
pub const MAX_SPLIT_RETRIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestedCvConfig {
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub test_fraction: f64,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl Default for NestedCvConfig {
    fn default() -> Self {
        NestedCvConfig {
            outer_folds: 10,
            inner_folds: 10,
            test_fraction: 0.2,
            alphas: vec![0.1, 0.5, 0.9],
            lambdas: log_space(1e-4, 1e1, 10),
        }
    }
}

impl NestedCvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_folds == 0 || self.inner_folds == 0 {
            return Err(Error::InvalidParameter("fold counts must be at least 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidParameter("test_fraction must lie in (0, 1)".into()));
        }
        if self.alphas.is_empty() || self.lambdas.is_empty() {
            return Err(Error::InvalidParameter("hyperparameter grid is empty".into()));
        }
        if self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidParameter("alphas must lie in [0, 1]".into()));
        }
        if self.lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter("lambdas must be finite and >= 0".into()));
        }
        Ok(())
    }
}

pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Area under the ROC curve via the Mann-Whitney statistic; tied scores count half.
pub fn roc_auc(y: &[usize], scores: &[f64]) -> f64 {
    let mut pos = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                pos += 1.0;
            } else if scores[i] == scores[j] {
                pos += 0.5;
            }
        }
    }
    if pairs == 0.0 {
        f64::NAN
    } else {
        pos / pairs
    }
}

/// Column means and standard deviations of the training rows.
/// Columns that are constant in the split get unit scale.
fn standardizer(x: ArrayView2<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    let means: Vec<f64> = x.mean_axis(Axis(0)).expect("non-empty").to_vec();
    let sds = x
        .columns()
        .into_iter()
        .zip(&means)
        .map(|(c, m)| {
            let var = c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let sd = var.sqrt();
            if sd < MIN_STD {
                1.0
            } else {
                sd
            }
        })
        .collect();
    (means, sds)
}

fn apply(x: ArrayView2<f64>, rows: &[usize], means: &[f64], sds: &[f64]) -> Array2<f64> {
    let mut out = x.select(Axis(0), rows);
    for mut r in out.rows_mut() {
        for ((v, m), s) in r.iter_mut().zip(means).zip(sds) {
            *v = (*v - m) / s;
        }
    }
    out
}

fn has_both(y: &[usize], rows: &[usize]) -> bool {
    rows.iter().any(|&i| y[i] == 0) && rows.iter().any(|&i| y[i] == 1)
}

/// Shuffles `pool` and splits off `fraction` of it, retrying until both
/// sides hold both classes.
fn split(
    y: &[usize],
    pool: &[usize],
    fraction: f64,
    seed: RandomSeed,
    tag: &str,
    idx: &[u64],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let held = ((pool.len() as f64 * fraction).round() as usize).clamp(1, pool.len() - 1);
    for attempt in 0..MAX_SPLIT_RETRIES {
        let mut key = idx.to_vec();
        key.push(attempt as u64);
        let mut rng = seed.stream(tag, &key);
        let mut order = pool.to_vec();
        order.shuffle(&mut rng);
        let (h, rest) = order.split_at(held);
        if has_both(y, h) && has_both(y, rest) {
            return Ok((rest.to_vec(), h.to_vec()));
        }
    }
    Err(Error::DegenerateFold {
        retries: MAX_SPLIT_RETRIES,
    })
}

/// Signed and absolute per-group effects of a frozen model on standardized
/// test rows: the mean over samples of `w_f * x_f`, averaged over the group's features.
pub fn group_effects(
    model: &ElasticNetModel,
    x_test: ArrayView2<f64>,
    grouping: &FeatureGrouping,
) -> (Vec<f64>, Vec<f64>) {
    let n = x_test.nrows() as f64;
    let per_feature: Vec<(f64, f64)> = x_test
        .columns()
        .into_iter()
        .zip(&model.weights)
        .map(|(c, w)| {
            let signed = c.iter().map(|v| w * v).sum::<f64>() / n;
            let abs = c.iter().map(|v| (w * v).abs()).sum::<f64>() / n;
            (signed, abs)
        })
        .collect();
    grouping
        .all_members()
        .iter()
        .map(|m| {
            let k = m.len() as f64;
            (
                m.iter().map(|&f| per_feature[f].0).sum::<f64>() / k,
                m.iter().map(|&f| per_feature[f].1).sum::<f64>() / k,
            )
        })
        .unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub lambda: f64,
    pub alpha: f64,
    pub test_auc: f64,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub group_effect: Vec<f64>,
    pub group_abs_effect: Vec<f64>,
    pub separation_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectReport {
    pub seed: RandomSeed,
    pub config: NestedCvConfig,
    pub grouping: FeatureGrouping,
    pub folds: Vec<FoldResult>,
    /// Per-group signed effect averaged over outer folds.
    pub grand_mean_effect: Vec<f64>,
    /// Per-group absolute effect averaged over outer folds.
    pub grand_mean_abs_effect: Vec<f64>,
    pub mean_auc: f64,
}

impl EffectReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per (fold, group).
    pub fn write_fold_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["fold", "group", "group_label", "effect", "abs_effect", "test_auc"])?;
        for (o, fold) in self.folds.iter().enumerate() {
            for j in 0..self.grouping.n_groups() {
                wtr.write_record([
                    o.to_string(),
                    j.to_string(),
                    self.grouping.label(j),
                    fold.group_effect[j].to_string(),
                    fold.group_abs_effect[j].to_string(),
                    fold.test_auc.to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

impl GroupValues for EffectReport {
    fn grouping(&self) -> &FeatureGrouping {
        &self.grouping
    }

    fn group_values(&self, j: usize) -> Vec<f64> {
        self.folds.iter().map(|f| f.group_effect[j]).collect()
    }
}

/// Maps two distinct label values to {0, 1}, the smaller becoming 0.
pub fn binarize(labels: &[usize]) -> Result<Vec<usize>> {
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(Error::InvalidData(format!(
            "classifier needs exactly two classes, found {}",
            distinct.len()
        )));
    }
    Ok(labels.iter().map(|&l| usize::from(l == distinct[1])).collect())
}

/// Fits every grid point on `train` and returns the validation AUCs, grid order alpha-major.
fn grid_aucs(
    x: ArrayView2<f64>,
    y: &[usize],
    train: &[usize],
    val: &[usize],
    cfg: &NestedCvConfig,
    lambdas_desc: &[f64],
) -> Result<Vec<f64>> {
    let (means, sds) = standardizer(x.select(Axis(0), train).view());
    let xt = apply(x, train, &means, &sds);
    let xv = apply(x, val, &means, &sds);
    let yt: Vec<usize> = train.iter().map(|&i| y[i]).collect();
    let yv: Vec<usize> = val.iter().map(|&i| y[i]).collect();
    let mut out = vec![0.0; cfg.alphas.len() * cfg.lambdas.len()];
    for (a, &alpha) in cfg.alphas.iter().enumerate() {
        let mut warm: Option<ElasticNetModel> = None;
        for &lambda in lambdas_desc {
            let m = fit_from(
                xt.view(),
                &yt,
                lambda,
                alpha,
                warm.as_ref().map(|m| (m.weights.as_slice(), m.intercept)),
            )?;
            let l = cfg.lambdas.iter().position(|&v| v == lambda).expect("grid value");
            out[a * cfg.lambdas.len() + l] = roc_auc(&yv, &m.decision_function(xv.view()));
            warm = Some(m);
        }
    }
    Ok(out)
}

/// Elastic-net logistic regression under repeated random nested
/// cross-validation, reporting per-group effects on the held-out rows.
///
/// `labels` must contain exactly two distinct values.
pub fn nested_cv_effects(
    data: &DataMatrix,
    labels: &[usize],
    grouping: &FeatureGrouping,
    config: &NestedCvConfig,
    seed: RandomSeed,
) -> Result<EffectReport> {
    config.validate()?;
    grouping.check_features(data.n_features())?;
    if labels.len() != data.n_samples() {
        return Err(Error::InvalidData(format!(
            "{} labels for {} samples",
            labels.len(),
            data.n_samples()
        )));
    }
    let y = binarize(labels)?;
    let x = data.view();
    let all: Vec<usize> = (0..y.len()).collect();
    let mut lambdas_desc = config.lambdas.clone();
    lambdas_desc.sort_by(|a, b| b.total_cmp(a));
    lambdas_desc.dedup();

    let mut folds = Vec::with_capacity(config.outer_folds);
    for o in 0..config.outer_folds {
        let (rest, test) = split(&y, &all, config.test_fraction, seed, "cv-outer", &[o as u64])?;
        let mut total = vec![0.0; config.alphas.len() * config.lambdas.len()];
        for i in 0..config.inner_folds {
            let (train, val) =
                split(&y, &rest, config.test_fraction, seed, "cv-inner", &[o as u64, i as u64])?;
            for (t, v) in total.iter_mut().zip(grid_aucs(x, &y, &train, &val, config, &lambdas_desc)?) {
                *t += v;
            }
        }
        // Best mean AUC; ties go to the larger lambda, then the larger alpha.
        let mut best = 0;
        for c in 1..total.len() {
            let key = |c: usize| {
                (config.lambdas[c % config.lambdas.len()], config.alphas[c / config.lambdas.len()])
            };
            let better = total[c] > total[best]
                || (total[c] == total[best] && key(c) > key(best));
            if better {
                best = c;
            }
        }
        let alpha = config.alphas[best / config.lambdas.len()];
        let lambda = config.lambdas[best % config.lambdas.len()];

        let (means, sds) = standardizer(x.select(Axis(0), &rest).view());
        let xr = apply(x, &rest, &means, &sds);
        let xs = apply(x, &test, &means, &sds);
        let yr: Vec<usize> = rest.iter().map(|&i| y[i]).collect();
        let ys: Vec<usize> = test.iter().map(|&i| y[i]).collect();
        let model = fit_from(xr.view(), &yr, lambda, alpha, None)?;
        let (group_effect, group_abs_effect) = group_effects(&model, xs.view(), grouping);
        folds.push(FoldResult {
            lambda,
            alpha,
            test_auc: roc_auc(&ys, &model.decision_function(xs.view())),
            weights: model.weights.clone(),
            intercept: model.intercept,
            group_effect,
            group_abs_effect,
            separation_warning: model.separation_warning,
        });
    }

    let n_groups = grouping.n_groups();
    let k = folds.len() as f64;
    let grand = |f: fn(&FoldResult) -> &Vec<f64>| -> Vec<f64> {
        (0..n_groups)
            .map(|j| folds.iter().map(|fo| f(fo)[j]).sum::<f64>() / k)
            .collect()
    };
    let grand_mean_effect = grand(|f| &f.group_effect);
    let grand_mean_abs_effect = grand(|f| &f.group_abs_effect);
    let mean_auc = folds.iter().map(|f| f.test_auc).sum::<f64>() / k;
    Ok(EffectReport {
        seed,
        config: config.clone(),
        grouping: grouping.clone(),
        folds,
        grand_mean_effect,
        grand_mean_abs_effect,
        mean_auc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::identity_grouping;
    use crate::datagen::{generate, SyntheticSpec};
    use ndarray::array;

    #[test]
    fn auc_cases() {
        assert_eq!(roc_auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.3, 0.4]), 1.0);
        assert_eq!(roc_auc(&[0, 0, 1, 1], &[0.4, 0.3, 0.2, 0.1]), 0.0);
        assert_eq!(roc_auc(&[0, 1], &[0.5, 0.5]), 0.5);
        // pairs: (0.35>0.1)(0.35<0.4)(0.8>0.1)(0.8>0.4)
        assert_eq!(roc_auc(&[0, 0, 1, 1], &[0.1, 0.4, 0.35, 0.8]), 0.75);
    }

    #[test]
    fn log_space_ends() {
        let g = log_space(1e-4, 10.0, 10);
        assert_eq!(g.len(), 10);
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!((g[9] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn effects_scale_with_weights() {
        let g = identity_grouping(2).unwrap();
        let x = array![[1.0, -2.0], [-1.0, 0.5], [0.5, 1.0]];
        let mut m = ElasticNetModel {
            weights: vec![0.5, -1.5],
            intercept: 0.2,
            lambda: 0.1,
            alpha: 0.5,
            n_iter: 0,
            converged: true,
            separation_warning: false,
        };
        let (s1, a1) = group_effects(&m, x.view(), &g);
        m.weights.iter_mut().for_each(|w| *w *= -3.0);
        let (s2, a2) = group_effects(&m, x.view(), &g);
        for j in 0..2 {
            assert!((s2[j] + 3.0 * s1[j]).abs() < 1e-12);
            assert!((a2[j] - 3.0 * a1[j]).abs() < 1e-12);
        }
        assert!((a1[0] - (0.5 + 0.5 + 0.25) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn binarize_requires_two_classes() {
        assert_eq!(binarize(&[3, 7, 3]).unwrap(), vec![0, 1, 0]);
        assert!(binarize(&[1, 1]).is_err());
        assert!(binarize(&[0, 1, 2]).is_err());
    }

    #[test]
    fn degenerate_split_reported() {
        // One positive among 20: an 80/20 split cannot put it on both sides.
        let mut y = vec![0; 20];
        y[0] = 1;
        let data = DataMatrix::from_column(&(0..20).map(|v| v as f64).collect::<Vec<_>>()).unwrap();
        let r = nested_cv_effects(
            &data,
            &y,
            &identity_grouping(1).unwrap(),
            &NestedCvConfig::default(),
            RandomSeed(0),
        );
        assert!(matches!(r, Err(Error::DegenerateFold { .. })));
    }

    #[test]
    fn separable_blobs_rank_first_feature() {
        let spec = SyntheticSpec::dataset_one().with_samples_per_cluster(30);
        let (data, truth) = generate(&spec, RandomSeed(4)).unwrap();
        let y: Vec<usize> = truth.labels().iter().map(|l| l.unwrap()).collect();
        let cfg = NestedCvConfig {
            outer_folds: 3,
            inner_folds: 3,
            ..NestedCvConfig::default()
        };
        let r = nested_cv_effects(&data, &y, &identity_grouping(5).unwrap(), &cfg, RandomSeed(1)).unwrap();
        assert!(r.mean_auc > 0.95);
        let top = (0..5)
            .max_by(|&a, &b| r.grand_mean_abs_effect[a].total_cmp(&r.grand_mean_abs_effect[b]))
            .unwrap();
        assert_eq!(top, 0);
    }
}

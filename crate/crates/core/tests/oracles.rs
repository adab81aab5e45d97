//! Explainers and the classifier baseline checked against independent
//! brute-force or closed-form references.

use cluster_explain::baseline::{fit_elastic_net_logreg, smooth_gradient};
use cluster_explain::prelude::*;
use cluster_explain::stats::{mean, std_dev};

/// Every permutation of `0..n`, Heap's algorithm.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// Expected fraction of positions whose class changes under a uniform permutation.
fn exhaustive_change_rate(classes: &[usize]) -> f64 {
    let perms = permutations(classes.len());
    let total: f64 = perms
        .iter()
        .map(|p| {
            let moved = (0..classes.len()).filter(|&i| classes[p[i]] != classes[i]).count();
            moved as f64 / classes.len() as f64
        })
        .sum();
    total / perms.len() as f64
}

fn within_3se(values: &[f64], expected: f64) -> (bool, f64, f64) {
    let m = mean(values);
    let se = std_dev(values) / (values.len() as f64).sqrt();
    ((m - expected).abs() <= 3.0 * se, m, se)
}

#[test]
fn heap_enumerates_all() {
    let p = permutations(4);
    assert_eq!(p.len(), 24);
    let mut sorted = p.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 24);
}

#[test]
fn g2pc_four_samples_matches_enumeration() {
    let data = DataMatrix::from_column(&[0.0, 0.0, 10.0, 10.0]).unwrap();
    let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(1)).unwrap();
    let classes: Vec<usize> = model.train_labels().labels().iter().map(|l| l.unwrap()).collect();
    let expected = exhaustive_change_rate(&classes);
    assert!((expected - 0.5).abs() < 1e-12);
    let r = g2pc(&model, &data, &FeatureGrouping::identity(1).unwrap(), 10_000, RandomSeed(2)).unwrap();
    let (ok, m, se) = within_3se(&r.pct_change[0], expected);
    assert!(ok, "empirical {m} ± {se} vs {expected}");
}

#[test]
fn l2pc_three_samples_is_exactly_half() {
    let data = DataMatrix::from_column(&[0.0, 1.0, 10.0]).unwrap();
    let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(0)).unwrap();
    let g = FeatureGrouping::identity(1).unwrap();
    let r = l2pc(&model, &data, &g, 10_000, 2, RandomSeed(3), Some(&[0])).unwrap();
    assert!(r.pct_change.iter().all(|&v| v == 0.5));
}

#[test]
fn g2pc_single_group_matches_derangement_rate() {
    // Two tight 2-D clusters of sizes 4 and 2; one group holding both features
    // makes a permutation move whole rows.
    let rows = vec![
        vec![0.0, 0.1],
        vec![0.2, -0.1],
        vec![-0.1, 0.0],
        vec![0.1, 0.2],
        vec![20.0, 20.1],
        vec![19.9, 20.0],
    ];
    let data = DataMatrix::from_rows(&rows).unwrap();
    let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(4)).unwrap();
    let classes: Vec<usize> = model.train_labels().labels().iter().map(|l| l.unwrap()).collect();
    let expected = exhaustive_change_rate(&classes);
    assert!((expected - 16.0 / 36.0).abs() < 1e-12);
    let r = g2pc(&model, &data, &FeatureGrouping::single(2).unwrap(), 10_000, RandomSeed(5)).unwrap();
    let (ok, m, se) = within_3se(&r.pct_change[0], expected);
    assert!(ok, "empirical {m} ± {se} vs {expected}");
}

#[test]
fn pfi_perfect_classifier_halves_accuracy() {
    let data = DataMatrix::from_column(&[0.0, 0.0, 1.0, 1.0]).unwrap();
    let y = [0usize, 0, 1, 1];
    let expected = permutations(4)
        .iter()
        .map(|p| {
            let acc = (0..4).filter(|&i| y[p[i]] == y[i]).count() as f64 / 4.0;
            acc - 1.0
        })
        .sum::<f64>()
        / 24.0;
    assert!((expected + 0.5).abs() < 1e-12);
    let predict = |x: ndarray::ArrayView2<f64>| x.column(0).iter().map(|&v| usize::from(v > 0.5)).collect();
    let r = permutation_feature_importance(
        predict,
        &data,
        &y,
        &FeatureGrouping::identity(1).unwrap(),
        10_000,
        accuracy,
        RandomSeed(6),
    )
    .unwrap();
    let (ok, m, se) = within_3se(&r.importance[0], expected);
    assert!(ok, "empirical {m} ± {se} vs {expected}");
}

#[test]
fn duplicating_samples_preserves_g2pc() {
    let column: Vec<f64> = (0..20).map(|i| if i < 10 { i as f64 * 0.3 } else { 2.0 + i as f64 * 0.3 }).collect();
    let data = DataMatrix::from_column(&column).unwrap();
    let doubled: Vec<f64> = column.iter().chain(&column).copied().collect();
    let data2 = DataMatrix::from_column(&doubled).unwrap();
    let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(7)).unwrap();
    let g = FeatureGrouping::identity(1).unwrap();
    let a = g2pc(&model, &data, &g, 5000, RandomSeed(8)).unwrap();
    let b = g2pc(&model, &data2, &g, 5000, RandomSeed(9)).unwrap();
    let (ma, mb) = (mean(&a.pct_change[0]), mean(&b.pct_change[0]));
    let se = (std_dev(&a.pct_change[0]).powi(2) / 5000.0 + std_dev(&b.pct_change[0]).powi(2) / 5000.0).sqrt();
    assert!((ma - mb).abs() <= 3.0 * se, "{ma} vs {mb} (se {se})");
}

fn two_gaussians(gaps: &[f64], per: usize, seed: u64) -> DataMatrix {
    let spec = SyntheticSpec {
        dataset_id: cluster_explain::datagen::DatasetId::Custom,
        samples_per_cluster: per,
        means: vec![vec![0.0; gaps.len()], gaps.to_vec()],
        stds: vec![vec![1.0; gaps.len()]; 2],
    };
    generate(&spec, RandomSeed(seed)).unwrap().0
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    (mean(v), std_dev(v) / (v.len() as f64).sqrt())
}

/// Mean G2PC of `group` for each gap setting, checked non-increasing within 3 SE.
fn assert_non_increasing(results: &[(f64, f64)], label: &str) {
    for w in results.windows(2) {
        let ((m0, s0), (m1, s1)) = (w[0], w[1]);
        let se = (s0 * s0 + s1 * s1).sqrt();
        assert!(m1 <= m0 + 3.0 * se, "{label}: {m1} > {m0} + 3·{se}");
    }
}

/// With one feature, a sample changes cluster exactly when it receives a value
/// from the other cluster, so the expected rate is 2·n0·n1/N² whatever the gap.
#[test]
fn one_dimensional_rate_depends_only_on_cluster_sizes() {
    for &gap in &[1.0, 2.0, 4.0, 8.0] {
        let data = two_gaussians(&[gap], 50, 10);
        let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(11)).unwrap();
        let sizes = model.train_labels().cluster_sizes();
        let n = data.n_samples() as f64;
        let expected = 2.0 * sizes[0] as f64 * sizes[1] as f64 / (n * n);
        let r = g2pc(&model, &data, &FeatureGrouping::identity(1).unwrap(), 4000, RandomSeed(12)).unwrap();
        let (ok, m, se) = within_3se(&r.pct_change[0], expected);
        assert!(ok, "gap {gap}: {m} ± {se} vs {expected}");
    }
}

#[test]
fn wider_anchor_gap_lowers_importance_of_other_feature() {
    let results: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&gap| {
            let data = two_gaussians(&[gap, 4.0], 50, 13);
            let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(14)).unwrap();
            let r = g2pc(&model, &data, &FeatureGrouping::identity(2).unwrap(), 2000, RandomSeed(15)).unwrap();
            mean_and_se(&r.pct_change[1])
        })
        .collect();
    assert_non_increasing(&results, "2-D");
    assert!(results[3].0 < results[0].0);
}

#[test]
fn worker_count_does_not_change_results() {
    let (data, _) = generate(&SyntheticSpec::dataset_one(), RandomSeed(16)).unwrap();
    let model = fit(&ClusterParams::gmm(2), &data, RandomSeed(17)).unwrap();
    let g = FeatureGrouping::identity(5).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let a = g2pc(&model, &data, &g, 20, RandomSeed(18)).unwrap();
                let b = l2pc(&model, &data, &g, 3, 10, RandomSeed(18), None).unwrap();
                (a.to_json().unwrap(), b.to_json().unwrap())
            })
    };
    assert_eq!(run(1), run(4));
}

/// Penalized 1-D logistic loss with x = ±1, y = [x > 0], intercept fixed at 0
/// by symmetry, pure ridge.
fn one_d_objective(w: f64, lambda: f64) -> f64 {
    let loss = |z: f64, y: f64| (1.0 + z.exp()).ln() - y * z;
    (loss(-w, 0.0) + loss(w, 1.0)) / 2.0 + lambda * 0.5 * w * w
}

#[test]
fn one_d_ridge_matches_bisection() {
    let lambda = 0.1;
    // derivative: -(1 - σ(w)) + λw, zero by bisection
    let deriv = |w: f64| -(1.0 - 1.0 / (1.0 + (-w).exp())) + lambda * w;
    let (mut lo, mut hi) = (0.0, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if deriv(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let golden = 0.5 * (lo + hi);
    let x = ndarray::array![[-1.0], [1.0], [-1.0], [1.0]];
    let m = fit_elastic_net_logreg(x.view(), &[0, 1, 0, 1], lambda, 0.0).unwrap();
    assert!((m.weights[0] - golden).abs() < 1e-5, "{} vs {golden}", m.weights[0]);
    assert!(m.intercept.abs() < 1e-6);
    assert!(one_d_objective(m.weights[0], lambda) <= one_d_objective(golden, lambda) + 1e-10);
}

#[test]
fn perturbing_a_weight_never_helps() {
    let (data, truth) = generate(&SyntheticSpec::dataset_one().with_samples_per_cluster(20), RandomSeed(19)).unwrap();
    let x = cluster_explain::data::zscore(&data).unwrap();
    // Noisy labels so the problem is not separable.
    let y: Vec<usize> = truth
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| if i % 7 == 0 { 1 - l.unwrap() } else { l.unwrap() })
        .collect();
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    for &(lambda, alpha) in &[(0.01, 0.5), (0.1, 0.9), (0.001, 0.1)] {
        let m = fit_elastic_net_logreg(x.view(), &y, lambda, alpha).unwrap();
        let base = m.objective(x.view(), &yf);
        for f in 0..m.weights.len() {
            for delta in [-1e-3, 1e-3] {
                let mut p = m.clone();
                p.weights[f] += delta;
                assert!(p.objective(x.view(), &yf) >= base - 1e-8, "λ={lambda} α={alpha} f={f}");
            }
        }
        let (gw, gb) = smooth_gradient(&m, x.view(), &yf);
        assert!(gb.abs() < 1e-5);
        for (w, g) in m.weights.iter().zip(gw) {
            let r = if *w != 0.0 { (g + lambda * alpha * w.signum()).abs() } else { (g.abs() - lambda * alpha).max(0.0) };
            assert!(r < 1e-5);
        }
    }
}

#[test]
fn identical_feature_has_negligible_effect() {
    let mut spec = SyntheticSpec::dataset_one().with_samples_per_cluster(40);
    spec.means[0][4] = 3.0; // feature 5 identical in both clusters
    let (data, truth) = generate(&spec, RandomSeed(20)).unwrap();
    let y: Vec<usize> = truth.labels().iter().map(|l| l.unwrap()).collect();
    let r = nested_cv_effects(&data, &y, &FeatureGrouping::identity(5).unwrap(), &NestedCvConfig::default(), RandomSeed(21))
        .unwrap();
    let per_fold: Vec<f64> = r.folds.iter().map(|f| f.group_effect[4]).collect();
    let sd = std_dev(&per_fold);
    assert!(r.grand_mean_effect[4].abs() <= 3.0 * sd || r.grand_mean_effect[4] == 0.0, "{:?}", per_fold);
}

#[test]
fn single_group_effect_is_feature_average() {
    let (data, truth) = generate(&SyntheticSpec::dataset_one().with_samples_per_cluster(30), RandomSeed(22)).unwrap();
    let y: Vec<usize> = truth.labels().iter().map(|l| l.unwrap()).collect();
    let cfg = NestedCvConfig {
        outer_folds: 3,
        inner_folds: 2,
        ..NestedCvConfig::default()
    };
    let per = nested_cv_effects(&data, &y, &FeatureGrouping::identity(5).unwrap(), &cfg, RandomSeed(23)).unwrap();
    let one = nested_cv_effects(&data, &y, &FeatureGrouping::single(5).unwrap(), &cfg, RandomSeed(23)).unwrap();
    let avg = per.grand_mean_effect.iter().sum::<f64>() / 5.0;
    assert!((one.grand_mean_effect[0] - avg).abs() < 1e-12);
}

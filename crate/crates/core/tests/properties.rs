//! Property suite over the explainers, preprocessing and backends.

use cluster_explain::clustering::{Algorithm, FittedClusterer};
use cluster_explain::connectivity::{connectivity_features, TimeSeriesPanel};
use cluster_explain::data::zscore;
use cluster_explain::prelude::*;
use ndarray::Array2;
use proptest::prelude::*;

fn params_for(alg: Algorithm) -> ClusterParams {
    match alg {
        Algorithm::DbScan => ClusterParams::dbscan(1.5, 3),
        other => ClusterParams::for_algorithm(other, 2.0),
    }
}

/// Two blobs in the first two columns plus a constant third column.
fn blobs() -> impl Strategy<Value = DataMatrix> {
    (6usize..14, prop::collection::vec(-0.8f64..0.8, 28 * 2), 0.5f64..6.0).prop_map(
        |(half, noise, gap)| {
            let rows: Vec<Vec<f64>> = (0..2 * half)
                .map(|i| {
                    let c = if i < half { 0.0 } else { gap + 2.0 };
                    vec![c + noise[2 * i], c + noise[2 * i + 1], 4.2]
                })
                .collect();
            DataMatrix::from_rows(&rows).unwrap()
        },
    )
}

fn algorithm() -> impl Strategy<Value = Algorithm> {
    prop::sample::select(Algorithm::ALL.to_vec())
}

fn fitted(alg: Algorithm, data: &DataMatrix, seed: u64) -> Option<FittedClusterer> {
    let m = fit(&params_for(alg), data, RandomSeed(seed)).ok()?;
    (!m.train_labels().is_all_noise()).then_some(m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_group_never_moves(data in blobs(), alg in algorithm(), seed in 0u64..1000) {
        let Some(model) = fitted(alg, &data, seed) else { return Ok(()) };
        let g = FeatureGrouping::identity(3).unwrap();
        let r = g2pc(&model, &data, &g, 8, RandomSeed(seed)).unwrap();
        prop_assert!(r.pct_change[2].iter().all(|&v| v == 0.0));
        let l = l2pc(&model, &data, &g, 3, 4, RandomSeed(seed), Some(&[0, 1, 2])).unwrap();
        prop_assert!(l.group_values(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn percent_change_in_unit_interval(data in blobs(), alg in algorithm(), seed in 0u64..1000) {
        let Some(model) = fitted(alg, &data, seed) else { return Ok(()) };
        let g = FeatureGrouping::new(vec![0, 0, 1], None).unwrap();
        let r = g2pc(&model, &data, &g, 10, RandomSeed(seed)).unwrap();
        prop_assert!(r.pct_change.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        let l = l2pc(&model, &data, &g, 2, 5, RandomSeed(seed), None).unwrap();
        prop_assert!(l.pct_change.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn l2pc_values_are_multiples_of_one_over_m(
        data in blobs(), alg in algorithm(), m in 1usize..9, seed in 0u64..1000
    ) {
        let Some(model) = fitted(alg, &data, seed) else { return Ok(()) };
        let g = FeatureGrouping::identity(3).unwrap();
        let l = l2pc(&model, &data, &g, 3, m, RandomSeed(seed), None).unwrap();
        for &v in &l.pct_change {
            let scaled = v * m as f64;
            prop_assert!((scaled - scaled.round()).abs() < 1e-9, "{v} with M={m}");
        }
    }

    #[test]
    fn zscore_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 3..20)) {
        let data = DataMatrix::from_rows(&rows).unwrap();
        let Ok(once) = zscore(&data) else { return Ok(()) };
        let twice = zscore(&once).unwrap();
        for (a, b) in once.values().iter().zip(twice.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gmm_posteriors_sum_to_one(data in blobs(), seed in 0u64..1000, probe in prop::collection::vec(-20.0f64..20.0, 3)) {
        let model = fit(&ClusterParams::gmm(2), &data, RandomSeed(seed)).unwrap();
        let FittedClusterer::Gmm(gmm) = model else { unreachable!() };
        let mut x = data.values().clone();
        x.row_mut(0).assign(&ndarray::Array1::from(probe));
        for row in gmm.posteriors(x.view()) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn fuzzy_memberships_sum_to_one(data in blobs(), seed in 0u64..1000) {
        let model = fit(&ClusterParams::fuzzy_cmeans(2), &data, RandomSeed(seed)).unwrap();
        let FittedClusterer::FuzzyCMeans(fcm) = model else { unreachable!() };
        for row in fcm.memberships(data.view()) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn assignment_is_deterministic(data in blobs(), alg in algorithm(), seed in 0u64..1000) {
        let Some(model) = fitted(alg, &data, seed) else { return Ok(()) };
        let a = model.assign(&data).unwrap();
        let b = model.assign(&data).unwrap();
        prop_assert_eq!(a, b);
        let again = fitted(alg, &data, seed).unwrap();
        prop_assert_eq!(&again, &model);
    }

    #[test]
    fn same_seed_same_result(data in blobs(), alg in algorithm(), seed in 0u64..1000) {
        let Some(model) = fitted(alg, &data, seed) else { return Ok(()) };
        let g = FeatureGrouping::identity(3).unwrap();
        let a = g2pc(&model, &data, &g, 5, RandomSeed(seed)).unwrap();
        let b = g2pc(&model, &data, &g, 5, RandomSeed(seed)).unwrap();
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let la = l2pc(&model, &data, &g, 2, 3, RandomSeed(seed), None).unwrap();
        let lb = l2pc(&model, &data, &g, 2, 3, RandomSeed(seed), None).unwrap();
        prop_assert_eq!(la, lb);
    }

    #[test]
    fn model_json_roundtrip_assigns_identically(data in blobs(), alg in algorithm(), seed in 0u64..1000) {
        let model = fit(&params_for(alg), &data, RandomSeed(seed)).unwrap();
        let back = FittedClusterer::from_json(&model.to_json().unwrap()).unwrap();
        let probe = data.values().mapv(|v| v * 1.1 - 0.3);
        prop_assert_eq!(model.assign_rows(probe.view()).unwrap(), back.assign_rows(probe.view()).unwrap());
        prop_assert_eq!(model.assign_rows(data.view()).unwrap(), back.assign_rows(data.view()).unwrap());
    }

    #[test]
    fn connectivity_ignores_affine_rescaling(
        values in prop::collection::vec(-3.0f64..3.0, 12 * 4),
        scale in prop::collection::vec(0.1f64..10.0, 4),
        shift in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        let ts = Array2::from_shape_vec((12, 4), values).unwrap();
        let scaled = Array2::from_shape_fn((12, 4), |(t, c)| ts[[t, c]] * scale[c] + shift[c]);
        let domains = vec![0, 0, 1, 1];
        let labels = vec!["A".to_string(), "B".to_string()];
        let Ok(p1) = TimeSeriesPanel::new(vec![ts], domains.clone(), labels.clone()) else { return Ok(()) };
        let p2 = TimeSeriesPanel::new(vec![scaled], domains, labels).unwrap();
        let (Ok((a, _)), Ok((b, _))) = (connectivity_features(&p1), connectivity_features(&p2)) else {
            return Ok(());
        };
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn kmeans_tie_goes_to_lowest_cluster() {
    let data = DataMatrix::from_column(&[0.0, 0.1, 9.9, 10.0]).unwrap();
    let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(0)).unwrap();
    let FittedClusterer::KMeans(km) = &model else { unreachable!() };
    let mid = (km.centers[0][0] + km.centers[1][0]) / 2.0;
    let probe = DataMatrix::from_column(&[mid; 5]).unwrap();
    let labels = model.assign(&probe).unwrap();
    assert!(labels.labels().iter().all(|&l| l == Some(0)));
}

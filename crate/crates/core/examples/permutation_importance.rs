//! Supervised permutation importance against ground truth, with the
//! clusterer as predictor.

use cluster_explain::data::zscore;
use cluster_explain::prelude::*;

fn main() -> Result<()> {
    let (raw, truth) = generate(&SyntheticSpec::dataset_one(), RandomSeed(21))?;
    let data = zscore(&raw)?;
    let y: Vec<usize> = truth.labels().iter().map(|l| l.unwrap()).collect();
    let model = fit(&ClusterParams::gmm(2), &data, RandomSeed(21))?;

    // Map each cluster to the true class it overlaps most.
    let fitted: Vec<usize> = model.train_labels().labels().iter().map(|l| l.unwrap()).collect();
    let flip = accuracy(&y, &fitted) < 0.5;
    let predict = |x: ndarray::ArrayView2<f64>| -> Vec<usize> {
        model
            .assign_rows(x)
            .unwrap()
            .into_iter()
            .map(|l| l.map_or(0, |c| if flip { 1 - c } else { c }))
            .collect()
    };

    let grouping = FeatureGrouping::identity(5)?;
    let res = permutation_feature_importance(predict, &data, &y, &grouping, 50, accuracy, RandomSeed(22))?;
    println!("baseline accuracy {:.3}", res.baseline);
    for s in summarize(&res) {
        println!("{:<10} mean {:+.4}  min {:+.4}", s.label, s.mean, s.min);
    }
    Ok(())
}

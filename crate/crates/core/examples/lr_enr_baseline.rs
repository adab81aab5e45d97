//! Elastic-net logistic regression on cluster labels, nested CV.

use cluster_explain::data::zscore;
use cluster_explain::prelude::*;

fn main() -> Result<()> {
    let (raw, _) = generate(&SyntheticSpec::dataset_one(), RandomSeed(12))?;
    let data = zscore(&raw)?;
    let model = fit(&ClusterParams::kmeans(2), &data, RandomSeed(12))?;
    let y: Vec<usize> = model.train_labels().labels().iter().map(|l| l.unwrap()).collect();
    let grouping = FeatureGrouping::identity(5)?;
    let report = nested_cv_effects(&data, &y, &grouping, &NestedCvConfig::default(), RandomSeed(13))?;

    println!("mean test AUC {:.4}", report.mean_auc);
    println!("feature  signed effect  |effect|");
    for f in 0..5 {
        println!(
            "{:>7}  {:>13.4}  {:.4}",
            f + 1,
            report.grand_mean_effect[f],
            report.grand_mean_abs_effect[f]
        );
    }
    for (k, fold) in report.folds.iter().enumerate().take(3) {
        println!("fold {k}: lambda {:.4} alpha {} auc {:.3}", fold.lambda, fold.alpha, fold.test_auc);
    }
    Ok(())
}

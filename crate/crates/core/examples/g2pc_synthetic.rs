//! Global permutation importance on 100 replicates of the two-cluster set.

use cluster_explain::data::zscore;
use cluster_explain::prelude::*;
use cluster_explain::stats::median;

fn main() -> Result<()> {
    let spec = SyntheticSpec::dataset_one();
    let grouping = FeatureGrouping::identity(spec.n_features())?;
    let mut pooled = vec![Vec::new(); spec.n_features()];
    for (r, (raw, _)) in generate_batch(&spec, 100, RandomSeed(1))?.into_iter().enumerate() {
        let data = zscore(&raw)?;
        let seed = RandomSeed(1).derive("replicate", &[r as u64]);
        let model = fit(&ClusterParams::kmeans(2), &data, seed)?;
        let res = g2pc(&model, &data, &grouping, 100, seed)?;
        for (f, v) in res.pct_change.into_iter().enumerate() {
            pooled[f].extend(v);
        }
    }
    println!("feature  median  mean");
    for (f, v) in pooled.iter().enumerate() {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        println!("{:>7}  {:.3}   {:.4}", f + 1, median(v), mean);
    }
    Ok(())
}

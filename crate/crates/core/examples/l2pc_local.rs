//! Per-sample perturbation importance on one replicate.

use cluster_explain::data::zscore;
use cluster_explain::prelude::*;

fn main() -> Result<()> {
    let (raw, truth) = generate(&SyntheticSpec::dataset_one(), RandomSeed(3))?;
    let data = zscore(&raw)?;
    let model = fit(&ClusterParams::fuzzy_cmeans(2), &data, RandomSeed(3))?;
    let grouping = FeatureGrouping::identity(5)?;
    let res = l2pc(&model, &data, &grouping, 100, 30, RandomSeed(4), None)?;

    println!("global: {:?}", l2pc_global(&res).iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
    // A few samples from each true cluster.
    for &i in &[0usize, 1, 50, 51] {
        let pos = res.samples.iter().position(|&s| s == i).unwrap();
        let g = res.n_groups;
        let per: Vec<String> = (0..g)
            .map(|j| {
                let base = (pos * g + j) * res.repeats;
                let v = &res.pct_change[base..base + res.repeats];
                format!("{:.3}", v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        println!("sample {i:>3} (truth {:?}): {}", truth.labels()[i], per.join(" "));
    }
    Ok(())
}

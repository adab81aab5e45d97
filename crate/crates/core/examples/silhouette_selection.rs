//! Choosing the cluster count by mean silhouette.

use cluster_explain::data::zscore;
use cluster_explain::prelude::*;

fn show(name: &str, data: &DataMatrix) {
    let candidates: Vec<f64> = (2..=8).map(f64::from).collect();
    let report = select_clusters(&ClusterParams::kmeans(2), data, &candidates, RandomSeed(0));
    print!("{name:<22}");
    for c in &report.candidates {
        print!(" {}:{:.3}", c.value, c.score.unwrap_or(f64::NAN));
    }
    println!("  -> {:?}", report.selected);
}

fn main() -> Result<()> {
    let (one, _) = generate(&SyntheticSpec::dataset_one(), RandomSeed(2))?;
    let (two, _) = generate(&SyntheticSpec::dataset_two(), RandomSeed(2))?;
    show("two clusters", &zscore(&one)?);
    show("four clusters, raw", &two);
    // Scaling inflates the wide low-signal features relative to the gaps.
    show("four clusters, scaled", &zscore(&two)?);
    Ok(())
}

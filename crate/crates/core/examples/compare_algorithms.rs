//! The same explainer across all five backends on the four-cluster set.

use cluster_explain::clustering::{dbscan_eps_grid, DEFAULT_MIN_PTS};
use cluster_explain::data::zscore;
use cluster_explain::prelude::*;

fn main() -> Result<()> {
    let (raw, _) = generate(&SyntheticSpec::dataset_two(), RandomSeed(9))?;
    let data = zscore(&raw)?;
    let grouping = FeatureGrouping::identity(5)?;
    for alg in Algorithm::ALL {
        let params = match alg {
            Algorithm::DbScan => {
                let grid = dbscan_eps_grid(data.view(), DEFAULT_MIN_PTS, 20)?;
                let template = ClusterParams::dbscan(1.0, DEFAULT_MIN_PTS);
                select_clusters(&template, &data, &grid, RandomSeed(9))
                    .selected_params(&template)
                    .expect("some eps yields clusters")
            }
            other => ClusterParams::for_algorithm(other, 4.0),
        };
        let model = fit(&params, &data, RandomSeed(9))?;
        let res = g2pc(&model, &data, &grouping, 50, RandomSeed(10))?;
        let means: Vec<String> = summarize(&res).iter().map(|s| format!("{:.3}", s.mean)).collect();
        println!("{:<14} C={} {}", alg.to_string(), model.n_clusters(), means.join(" "));
    }
    Ok(())
}

//! Connectivity features from simulated time series, grouped by domain pair.

use cluster_explain::prelude::*;
use ndarray::Array2;
use rand::Rng;

fn subject(coupled: bool, seed: u64) -> Array2<f64> {
    let mut rng = RandomSeed(seed).stream("subject", &[]);
    let mut ts = Array2::zeros((120, 6));
    for t in 0..120 {
        let shared: f64 = rng.random_range(-1.0..1.0);
        for c in 0..6 {
            let own: f64 = rng.random_range(-1.0..1.0);
            // Group B couples the first domain to the third.
            let drive = if coupled && c >= 4 { 1.5 * shared } else if c < 2 { shared } else { 0.0 };
            ts[[t, c]] = own + drive;
        }
    }
    ts
}

fn main() -> Result<()> {
    let subjects: Vec<Array2<f64>> = (0..40).map(|s| subject(s >= 20, s as u64)).collect();
    let truth: Vec<usize> = (0..40).map(|s| usize::from(s >= 20)).collect();
    let labels = ["SC", "AUD", "VIS"].map(String::from).to_vec();
    let panel = TimeSeriesPanel::new(subjects, vec![0, 0, 1, 1, 2, 2], labels)?;
    let (features, grouping) = connectivity_features(&panel)?;
    println!("{} subjects x {} connectivity features", features.n_samples(), features.n_features());

    let model = fit(&ClusterParams::kmeans(2), &features, RandomSeed(5))?;
    let found: Vec<usize> = model.train_labels().labels().iter().map(|l| l.unwrap()).collect();
    let agree = accuracy(&truth, &found).max(1.0 - accuracy(&truth, &found));
    println!("cluster/truth agreement {agree:.2}");

    let res = g2pc(&model, &features, &grouping, 100, RandomSeed(6))?;
    for s in summarize(&res) {
        println!("{:<8} {:.3}", s.label, s.mean);
    }
    Ok(())
}

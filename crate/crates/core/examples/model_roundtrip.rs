//! Freeze a fitted model to JSON and assign new samples with the copy.

use cluster_explain::prelude::*;

fn main() -> Result<()> {
    let (train, _) = generate(&SyntheticSpec::dataset_two(), RandomSeed(30))?;
    let (fresh, truth) = generate(&SyntheticSpec::dataset_two(), RandomSeed(31))?;
    let model = fit(&ClusterParams::agglomerative(4), &train, RandomSeed(30))?;

    let text = model.to_json()?;
    println!("model json: {} bytes", text.len());
    let restored = FittedClusterer::from_json(&text)?;

    let a = assign(&model, &fresh)?;
    let b = assign(&restored, &fresh)?;
    assert_eq!(a, b);

    let mut table = vec![[0usize; 4]; 4];
    for (t, p) in truth.labels().iter().zip(b.labels()) {
        table[t.unwrap()][p.unwrap()] += 1;
    }
    println!("truth x assigned");
    for row in table {
        println!("{row:?}");
    }
    Ok(())
}

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::FeatureGrouping;
use crate::error::{Error, Result};
use crate::stats;

/// Anything that yields a distribution of values per feature group.
pub trait GroupValues {
    fn grouping(&self) -> &FeatureGrouping;
    fn group_values(&self, j: usize) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: usize,
    pub label: String,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Groups ranked by descending mean; equal means keep the lower group id first.
pub fn summarize(result: &impl GroupValues) -> Vec<GroupSummary> {
    let grouping = result.grouping();
    let mut rows: Vec<GroupSummary> = (0..grouping.n_groups())
        .map(|j| {
            let v = result.group_values(j);
            GroupSummary {
                group: j,
                label: grouping.label(j),
                mean: stats::mean(&v),
                median: stats::median(&v),
                std: stats::std_dev(&v),
                min: v.iter().copied().fold(f64::INFINITY, f64::min),
                max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    rows.sort_by(|a, b| b.mean.total_cmp(&a.mean).then(a.group.cmp(&b.group)));
    rows
}

/// Flat summary CSV shared by every explainer and the classifier baseline.
pub fn write_summary_csv(rows: &[GroupSummary], writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["group_label", "mean", "median", "std"])?;
    for r in rows {
        wtr.write_record([
            r.label.clone(),
            r.mean.to_string(),
            r.median.to_string(),
            r.std.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(FeatureGrouping, Vec<Vec<f64>>);

    impl GroupValues for Fixed {
        fn grouping(&self) -> &FeatureGrouping {
            &self.0
        }
        fn group_values(&self, j: usize) -> Vec<f64> {
            self.1[j].clone()
        }
    }

    #[test]
    fn ordering_and_ties() {
        let g = FeatureGrouping::identity(3).unwrap();
        let r = Fixed(g, vec![vec![0.1, 0.1], vec![0.3, 0.3], vec![0.1, 0.1]]);
        let s = summarize(&r);
        assert_eq!(s.iter().map(|r| r.group).collect::<Vec<_>>(), vec![1, 0, 2]);
        assert_eq!(s[0].median, 0.3);
    }

    #[test]
    fn single_group_table() {
        let g = FeatureGrouping::single(4).unwrap();
        let s = summarize(&Fixed(g, vec![vec![0.0, 0.5, 1.0]]));
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].min, s[0].max, s[0].median), (0.0, 1.0, 0.5));
        let mut buf = Vec::new();
        write_summary_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("group_label,mean,median,std\ng0,0.5,0.5,0.5\n"));
    }
}

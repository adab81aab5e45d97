//! Functional connectivity features from component time series.
//!
//! Each subject's C component time series become the C(C-1)/2 Pearson
//! correlations of the strict upper triangle, ordered (0,1), (0,2), ...,
//! (C-2,C-1). Features are grouped by the unordered pair of domains their
//! two components belong to.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::data::{DataMatrix, FeatureGrouping, MIN_STD};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TimeSeriesPanel {
    subjects: Vec<Array2<f64>>,
    component_domains: Vec<usize>,
    domain_labels: Vec<String>,
}

impl TimeSeriesPanel {
    /// `subjects[s]` is T_s timepoints by C components.
    pub fn new(
        subjects: Vec<Array2<f64>>,
        component_domains: Vec<usize>,
        domain_labels: Vec<String>,
    ) -> Result<Self> {
        let c = component_domains.len();
        if subjects.is_empty() {
            return Err(Error::InvalidPanel("no subjects".into()));
        }
        if c < 2 {
            return Err(Error::InvalidPanel("need at least two components".into()));
        }
        for (s, ts) in subjects.iter().enumerate() {
            if ts.ncols() != c {
                return Err(Error::InvalidPanel(format!(
                    "subject {s} has {} components, expected {c}",
                    ts.ncols()
                )));
            }
            if ts.nrows() < 3 {
                return Err(Error::InvalidPanel(format!(
                    "subject {s} has {} timepoints, need at least 3",
                    ts.nrows()
                )));
            }
            if ts.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPanel(format!("subject {s} has non-finite values")));
            }
        }
        let d = domain_labels.len();
        if d == 0 {
            return Err(Error::InvalidPanel("no domains".into()));
        }
        let mut counts = vec![0usize; d];
        for &dom in &component_domains {
            if dom >= d {
                return Err(Error::InvalidPanel(format!("domain id {dom} out of range")));
            }
            counts[dom] += 1;
        }
        if let Some(empty) = counts.iter().position(|&n| n == 0) {
            return Err(Error::InvalidPanel(format!(
                "domain {:?} has no components",
                domain_labels[empty]
            )));
        }
        if let Some(single) = counts.iter().position(|&n| n == 1) {
            return Err(Error::InvalidPanel(format!(
                "domain {:?} has a single component, so its within-domain group would be empty",
                domain_labels[single]
            )));
        }
        Ok(TimeSeriesPanel {
            subjects,
            component_domains,
            domain_labels,
        })
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn n_components(&self) -> usize {
        self.component_domains.len()
    }

    pub fn n_domains(&self) -> usize {
        self.domain_labels.len()
    }

    pub fn subjects(&self) -> &[Array2<f64>] {
        &self.subjects
    }

    pub fn component_domains(&self) -> &[usize] {
        &self.component_domains
    }

    pub fn domain_labels(&self) -> &[String] {
        &self.domain_labels
    }

    /// Loads every `*.csv` in `dir` (sorted by file name) as one subject.
    /// `domains` is a JSON file with either an array of per-component labels
    /// or an object mapping component index to label; when omitted, the single
    /// `*.json` file in `dir` is used.
    pub fn read_dir(dir: impl AsRef<Path>, domains: Option<&Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut csvs = Vec::new();
        let mut jsons = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            match path.extension().and_then(|e| e.to_str()) {
                Some("csv") => csvs.push(path),
                Some("json") => jsons.push(path),
                _ => {}
            }
        }
        csvs.sort();
        let domains_path: PathBuf = match domains {
            Some(p) => p.to_path_buf(),
            None if jsons.len() == 1 => jsons.remove(0),
            None => {
                return Err(Error::InvalidPanel(format!(
                    "expected exactly one domain JSON file in {}, found {}",
                    dir.display(),
                    jsons.len()
                )))
            }
        };
        let subjects = csvs
            .iter()
            .map(|p| DataMatrix::read_csv(p).map(|m| m.values().clone()))
            .collect::<Result<Vec<_>>>()?;
        let text = std::fs::read_to_string(&domains_path).map_err(|e| Error::io(&domains_path, e))?;
        let per_component = parse_domain_map(&text)?;
        let (component_domains, domain_labels) = index_labels(&per_component);
        Self::new(subjects, component_domains, domain_labels)
    }
}

fn parse_domain_map(text: &str) -> Result<Vec<String>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(|v| match v {
                serde_json::Value::String(s) => Ok(s),
                other => Err(Error::InvalidPanel(format!("domain label {other} is not a string"))),
            })
            .collect(),
        serde_json::Value::Object(map) => {
            let mut by_index = BTreeMap::new();
            for (k, v) in map {
                let idx: usize = k
                    .parse()
                    .map_err(|_| Error::InvalidPanel(format!("component key {k:?} is not an index")))?;
                let label = v
                    .as_str()
                    .ok_or_else(|| Error::InvalidPanel(format!("domain label {v} is not a string")))?;
                by_index.insert(idx, label.to_owned());
            }
            if by_index.keys().copied().ne(0..by_index.len()) {
                return Err(Error::InvalidPanel("component indices must be 0..C-1".into()));
            }
            Ok(by_index.into_values().collect())
        }
        _ => Err(Error::InvalidPanel("domain map must be a JSON array or object".into())),
    }
}

/// Domain ids follow first appearance in component order.
fn index_labels(per_component: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut labels: Vec<String> = Vec::new();
    let ids = per_component
        .iter()
        .map(|l| match labels.iter().position(|x| x == l) {
            Some(i) => i,
            None => {
                labels.push(l.clone());
                labels.len() - 1
            }
        })
        .collect();
    (ids, labels)
}

/// Number of strict-upper-triangle pairs for `c` components.
pub fn n_pairs(c: usize) -> usize {
    c * c.saturating_sub(1) / 2
}

/// Position of the unordered domain pair (a, b) in the order (0,0), (0,1), ..., (D-1,D-1).
pub fn domain_pair_index(a: usize, b: usize, n_domains: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * n_domains - a * a.saturating_sub(1) / 2 + (b - a)
}

fn pearson(x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
    let n = x.len() as f64;
    let mx = x.sum() / n;
    let my = y.sum() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Upper-triangle correlations for one subject's T x C time series.
pub fn subject_connectivity(series: ArrayView2<f64>, subject: usize) -> Result<Vec<f64>> {
    let t = series.nrows() as f64;
    for (c, col) in series.columns().into_iter().enumerate() {
        let mean = col.sum() / t;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
        if var.sqrt() <= MIN_STD {
            return Err(Error::ConstantComponent { subject, component: c });
        }
    }
    let c = series.ncols();
    let mut out = Vec::with_capacity(n_pairs(c));
    for i in 0..c {
        for j in i + 1..c {
            out.push(pearson(series.column(i), series.column(j)));
        }
    }
    Ok(out)
}

/// One row of pairwise correlations per subject, grouped by domain pair.
pub fn connectivity_features(panel: &TimeSeriesPanel) -> Result<(DataMatrix, FeatureGrouping)> {
    let c = panel.n_components();
    let d = panel.n_domains();
    let f = n_pairs(c);
    let mut values = Array2::zeros((panel.n_subjects(), f));
    for (s, ts) in panel.subjects.iter().enumerate() {
        let row = subject_connectivity(ts.view(), s)?;
        values.row_mut(s).assign(&ArrayView1::from(&row));
    }

    let mut names = Vec::with_capacity(f);
    let mut group_of = Vec::with_capacity(f);
    for i in 0..c {
        for j in i + 1..c {
            names.push(format!("c{i}-c{j}"));
            group_of.push(domain_pair_index(
                panel.component_domains[i],
                panel.component_domains[j],
                d,
            ));
        }
    }
    let mut group_labels = Vec::with_capacity(d * (d + 1) / 2);
    for a in 0..d {
        for b in a..d {
            group_labels.push(if a == b {
                panel.domain_labels[a].clone()
            } else {
                format!("{}/{}", panel.domain_labels[a], panel.domain_labels[b])
            });
        }
    }

    let data = DataMatrix::new(values)?.with_feature_names(names)?;
    let grouping = FeatureGrouping::new(group_of, Some(group_labels))?;
    Ok((data, grouping))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn three_component_series() -> Array2<f64> {
        let x = [0.3, -1.2, 2.0, 0.7, 1.1];
        Array2::from_shape_fn((5, 3), |(t, c)| match c {
            0 | 1 => x[t],
            _ => -x[t],
        })
    }

    #[test]
    fn perfect_correlation_and_anticorrelation() {
        let feats = subject_connectivity(three_component_series().view(), 0).unwrap();
        assert_eq!(feats.len(), 3);
        assert!((feats[0] - 1.0).abs() < 1e-12);
        assert!((feats[1] + 1.0).abs() < 1e-12);
        assert!((feats[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_component_is_error() {
        let mut ts = three_component_series();
        ts.column_mut(2).fill(4.0);
        assert!(matches!(
            subject_connectivity(ts.view(), 3),
            Err(Error::ConstantComponent { subject: 3, component: 2 })
        ));
    }

    #[test]
    fn pair_counts() {
        assert_eq!(n_pairs(53), 1378);
        assert_eq!(n_pairs(3), 3);
        let d = 7;
        let last = domain_pair_index(d - 1, d - 1, d);
        assert_eq!(last + 1, 28);
        let mut seen = Vec::new();
        for a in 0..d {
            for b in a..d {
                seen.push(domain_pair_index(a, b, d));
            }
        }
        assert_eq!(seen, (0..28).collect::<Vec<_>>());
        assert_eq!(domain_pair_index(3, 1, d), domain_pair_index(1, 3, d));
    }

    #[test]
    fn single_component_domain_rejected() {
        let ts = three_component_series();
        let err = TimeSeriesPanel::new(vec![ts], vec![0, 0, 1], vec!["A".into(), "B".into()]);
        assert!(err.is_err());
    }

    #[test]
    fn domain_map_formats() {
        assert_eq!(parse_domain_map(r#"["A","B","A"]"#).unwrap(), vec!["A", "B", "A"]);
        assert_eq!(
            parse_domain_map(r#"{"1":"B","0":"A","2":"A"}"#).unwrap(),
            vec!["A", "B", "A"]
        );
        assert!(parse_domain_map(r#"{"0":"A","2":"B"}"#).is_err());
        let (ids, labels) = index_labels(&["B".into(), "A".into(), "B".into()]);
        assert_eq!(ids, vec![0, 1, 0]);
        assert_eq!(labels, vec!["B", "A"]);
    }
}

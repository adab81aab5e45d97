//! Shared data model: sample matrices, feature groupings and cluster labels.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard deviations at or below this are treated as zero.
pub const MIN_STD: f64 = 1e-12;

/// N samples by F features of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
    feature_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, f) = values.dim();
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 samples, got {n}")));
        }
        if f < 1 {
            return Err(Error::InvalidData("need at least 1 feature".into()));
        }
        if let Some(((r, c), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite value at row {r}, column {c}")));
        }
        Ok(DataMatrix {
            values,
            feature_names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let f = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != f) {
            return Err(Error::InvalidData(format!(
                "row {bad} has {} values, expected {f}",
                rows[bad].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), f), flat)
            .map_err(|e| Error::InvalidData(e.to_string()))?;
        Self::new(values)
    }

    /// Single-feature matrix, handy for small worked examples.
    pub fn from_column(column: &[f64]) -> Result<Self> {
        let values = Array2::from_shape_vec((column.len(), 1), column.to_vec())
            .map_err(|e| Error::InvalidData(e.to_string()))?;
        Self::new(values)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(Error::InvalidData(format!(
                "{} feature names for {} features",
                names.len(),
                self.n_features()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidData(format!("duplicate feature name {dup:?}")));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Name of feature `f`, falling back to `f{index}`.
    pub fn feature_name(&self, f: usize) -> String {
        match &self.feature_names {
            Some(names) => names[f].clone(),
            None => format!("f{f}"),
        }
    }

    /// Rows `indices` as a new matrix (names carried over).
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let values = self.values.select(Axis(0), indices);
        let mut out = Self::new(values)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    /// Reads a CSV with one row per sample. A first row that does not parse
    /// as numbers is taken as the header.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut header = None;
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if i == 0 => {
                    header = Some(record.iter().map(str::to_owned).collect::<Vec<_>>())
                }
                Err(e) => {
                    return Err(Error::InvalidData(format!("row {}: {e}", i + 1)));
                }
            }
        }
        let data = Self::from_rows(&rows)?;
        match header {
            Some(names) => data.with_feature_names(names),
            None => Ok(data),
        }
    }

    /// Writes the matrix with a header row.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..self.n_features()).map(|f| self.feature_name(f)).collect();
        wtr.write_record(&header)?;
        for row in self.values.rows() {
            wtr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Feature-wise standardization with the sample (n-1) standard deviation.
pub fn zscore(data: &DataMatrix) -> Result<DataMatrix> {
    let n = data.n_samples() as f64;
    let mut values = data.values.clone();
    for (f, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        if std <= MIN_STD {
            return Err(Error::ConstantFeature { feature: f });
        }
        col.mapv_inplace(|v| (v - mean) / std);
    }
    Ok(DataMatrix {
        values,
        feature_names: data.feature_names.clone(),
    })
}

/// Partition of F features into J non-empty groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGrouping {
    group_of: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group_labels: Option<Vec<String>>,
}

impl FeatureGrouping {
    pub fn new(group_of: Vec<usize>, group_labels: Option<Vec<String>>) -> Result<Self> {
        if group_of.is_empty() {
            return Err(Error::InvalidGrouping("no features".into()));
        }
        let n_groups = group_of.iter().max().map_or(0, |m| m + 1);
        let mut used = vec![false; n_groups];
        for &g in &group_of {
            used[g] = true;
        }
        if let Some(empty) = used.iter().position(|u| !u) {
            return Err(Error::InvalidGrouping(format!("group {empty} has no features")));
        }
        if let Some(labels) = &group_labels {
            if labels.len() != n_groups {
                return Err(Error::InvalidGrouping(format!(
                    "{} labels for {n_groups} groups",
                    labels.len()
                )));
            }
        }
        Ok(FeatureGrouping {
            group_of,
            group_labels,
        })
    }

    /// One group per feature.
    pub fn identity(n_features: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidGrouping("no features".into()));
        }
        Self::new((0..n_features).collect(), None)
    }

    /// All features in a single group.
    pub fn single(n_features: usize) -> Result<Self> {
        Self::new(vec![0; n_features], None)
    }

    pub fn n_features(&self) -> usize {
        self.group_of.len()
    }

    pub fn n_groups(&self) -> usize {
        self.group_of.iter().max().map_or(0, |m| m + 1)
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    pub fn group_labels(&self) -> Option<&[String]> {
        self.group_labels.as_deref()
    }

    /// Feature indices belonging to group `j`, ascending.
    pub fn members(&self, j: usize) -> Vec<usize> {
        self.group_of
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == j)
            .map(|(f, _)| f)
            .collect()
    }

    /// Member lists for every group.
    pub fn all_members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_groups()];
        for (f, &g) in self.group_of.iter().enumerate() {
            out[g].push(f);
        }
        out
    }

    pub fn label(&self, j: usize) -> String {
        match &self.group_labels {
            Some(labels) => labels[j].clone(),
            None => format!("g{j}"),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_groups() {
            return Err(Error::InvalidGrouping(format!(
                "{} labels for {} groups",
                labels.len(),
                self.n_groups()
            )));
        }
        self.group_labels = Some(labels);
        Ok(self)
    }

    pub fn check_features(&self, n_features: usize) -> Result<()> {
        if self.n_features() != n_features {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                found: self.n_features(),
            });
        }
        Ok(())
    }

    /// Parses a JSON array of integer group ids.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let ids: Vec<usize> = serde_json::from_str(text)?;
        Self::new(ids, None)
    }

    /// Parses a `feature_name,group_label` CSV. Features are matched to
    /// `feature_names`; group ids follow first appearance in that order.
    pub fn from_csv_reader(reader: impl Read, feature_names: &[String]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "feature_name" || &headers[1] != "group_label" {
            return Err(Error::InvalidGrouping(
                "expected header `feature_name,group_label`".into(),
            ));
        }
        let mut by_feature: BTreeMap<String, String> = BTreeMap::new();
        for record in rdr.records() {
            let record = record?;
            if by_feature
                .insert(record[0].to_owned(), record[1].to_owned())
                .is_some()
            {
                return Err(Error::InvalidGrouping(format!(
                    "feature {:?} listed twice",
                    &record[0]
                )));
            }
        }
        if by_feature.len() != feature_names.len() {
            return Err(Error::InvalidGrouping(format!(
                "{} features listed, data has {}",
                by_feature.len(),
                feature_names.len()
            )));
        }
        let mut labels: Vec<String> = Vec::new();
        let mut group_of = Vec::with_capacity(feature_names.len());
        for name in feature_names {
            let label = by_feature
                .get(name)
                .ok_or_else(|| Error::InvalidGrouping(format!("feature {name:?} not listed")))?;
            let id = match labels.iter().position(|l| l == label) {
                Some(id) => id,
                None => {
                    labels.push(label.clone());
                    labels.len() - 1
                }
            };
            group_of.push(id);
        }
        Self::new(group_of, Some(labels))
    }

    /// Loads a grouping from `.json` (integer array) or `.csv`.
    pub fn read_file(path: impl AsRef<Path>, feature_names: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let grouping = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)?
        } else {
            Self::from_csv_reader(text.as_bytes(), feature_names)?
        };
        grouping.check_features(feature_names.len())?;
        Ok(grouping)
    }

    pub fn write_csv(&self, writer: impl Write, feature_names: &[String]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["feature_name", "group_label"])?;
        for (f, &g) in self.group_of.iter().enumerate() {
            wtr.write_record([feature_names[f].as_str(), self.label(g).as_str()])?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Ungrouped mode: feature i forms group i.
pub fn identity_grouping(n_features: usize) -> Result<FeatureGrouping> {
    FeatureGrouping::identity(n_features)
}

/// A cluster id, or `None` for density-based noise.
pub type Label = Option<usize>;

/// Per-sample cluster ids in `0..n_clusters`, with `None` as the noise label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    labels: Vec<Label>,
    n_clusters: usize,
}

impl ClusterAssignment {
    /// `n_clusters` may be 0 only when every label is noise.
    pub fn new(labels: Vec<Label>, n_clusters: usize) -> Result<Self> {
        if let Some(bad) = labels.iter().flatten().find(|&&c| c >= n_clusters) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} out of range for {n_clusters} clusters"
            )));
        }
        Ok(ClusterAssignment { labels, n_clusters })
    }

    pub(crate) fn from_parts(labels: Vec<Label>, n_clusters: usize) -> Self {
        debug_assert!(labels.iter().flatten().all(|&c| c < n_clusters));
        ClusterAssignment { labels, n_clusters }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn n_noise(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    pub fn is_all_noise(&self) -> bool {
        self.labels.iter().all(Option::is_none)
    }

    /// Members per cluster id (noise excluded).
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for c in self.labels.iter().flatten() {
            sizes[*c] += 1;
        }
        sizes
    }

    /// Number of positions whose label differs; noise is its own label.
    pub fn count_changed(&self, other: &[Label]) -> usize {
        self.labels
            .iter()
            .zip(other)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Labels as integers with -1 for noise.
    pub fn to_signed(&self) -> Vec<i64> {
        self.labels
            .iter()
            .map(|l| l.map_or(-1, |c| c as i64))
            .collect()
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["sample", "label"])?;
        for (i, l) in self.to_signed().iter().enumerate() {
            wtr.write_record([i.to_string(), l.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads a single-column (or `sample,label`) CSV of integer labels; negative
    /// values are noise.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut labels = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let field = record.iter().last().unwrap_or("");
            match field.parse::<i64>() {
                Ok(v) if v < 0 => labels.push(None),
                Ok(v) => labels.push(Some(v as usize)),
                Err(_) if i == 0 => continue,
                Err(e) => return Err(Error::InvalidData(format!("label row {}: {e}", i + 1))),
            }
        }
        let n_clusters = labels.iter().flatten().max().map_or(1, |m| m + 1);
        Self::new(labels, n_clusters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn col_stats(m: &DataMatrix, f: usize) -> (f64, f64) {
        let col = m.values().column(f);
        let n = col.len() as f64;
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    }

    #[test]
    fn rejects_non_finite_and_tiny() {
        assert!(DataMatrix::new(array![[1.0, f64::NAN], [0.0, 1.0]]).is_err());
        assert!(DataMatrix::new(array![[1.0, 2.0]]).is_err());
        assert!(DataMatrix::new(Array2::zeros((3, 0))).is_err());
    }

    #[test]
    fn duplicate_names_rejected() {
        let d = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!(d.clone().with_feature_names(vec!["a".into(), "a".into()]).is_err());
        assert!(d.with_feature_names(vec!["a".into()]).is_err());
    }

    #[test]
    fn zscore_constant_column_is_error() {
        let d = DataMatrix::from_rows(&[
            vec![1.0, 3.0],
            vec![2.0, 3.0],
            vec![5.0, 3.0],
            vec![0.0, 3.0],
        ])
        .unwrap();
        assert!(matches!(zscore(&d), Err(Error::ConstantFeature { feature: 1 })));
    }

    #[test]
    fn zscore_two_points() {
        let z = zscore(&DataMatrix::from_column(&[0.0, 2.0]).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z.values()[[0, 0]] + h).abs() < 1e-12);
        assert!((z.values()[[1, 0]] - h).abs() < 1e-12);
    }

    #[test]
    fn zscore_moments_and_idempotence() {
        let d = DataMatrix::new(array![[1.0, 10.0], [2.0, -4.0], [7.0, 3.5], [4.0, 0.25]]).unwrap();
        let z = zscore(&d).unwrap();
        for f in 0..2 {
            let (mean, std) = col_stats(&z, f);
            assert!(mean.abs() < 1e-9);
            assert!((std - 1.0).abs() < 1e-9);
        }
        let zz = zscore(&z).unwrap();
        for (a, b) in z.values().iter().zip(zz.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_grouping_examples() {
        assert_eq!(identity_grouping(5).unwrap().group_of(), &[0, 1, 2, 3, 4]);
        assert_eq!(identity_grouping(1).unwrap().group_of(), &[0]);
        let big = identity_grouping(1378).unwrap();
        assert_eq!(big.n_groups(), 1378);
        assert!(big.group_of().iter().enumerate().all(|(i, &g)| i == g));
        assert!(identity_grouping(0).is_err());
    }

    #[test]
    fn grouping_rejects_empty_group() {
        assert!(FeatureGrouping::new(vec![0, 2, 2], None).is_err());
        assert!(FeatureGrouping::new(vec![0, 1], Some(vec!["a".into()])).is_err());
    }

    #[test]
    fn grouping_csv_and_json() {
        let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let csv = "feature_name,group_label\nz,B\nx,A\ny,B\n";
        let g = FeatureGrouping::from_csv_reader(csv.as_bytes(), &names).unwrap();
        assert_eq!(g.group_of(), &[0, 1, 1]);
        assert_eq!(g.label(1), "B");

        let g = FeatureGrouping::from_json_str("[1, 0, 1]").unwrap();
        assert_eq!(g.members(1), vec![0, 2]);

        let missing = "feature_name,group_label\nx,A\ny,B\nq,B\n";
        assert!(FeatureGrouping::from_csv_reader(missing.as_bytes(), &names).is_err());
    }

    #[test]
    fn csv_header_detection() {
        let with = DataMatrix::from_csv_reader("a,b\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(with.feature_names().unwrap(), &["a".to_string(), "b".to_string()]);
        let without = DataMatrix::from_csv_reader("1,2\n3,4.5\n".as_bytes()).unwrap();
        assert!(without.feature_names().is_none());
        assert_eq!(without.values()[[1, 1]], 4.5);
        assert!(DataMatrix::from_csv_reader("1,2\nx,4\n".as_bytes()).is_err());
    }

    #[test]
    fn change_counting_treats_noise_as_label() {
        let a = ClusterAssignment::new(vec![Some(0), None, Some(1)], 2).unwrap();
        assert_eq!(a.count_changed(&[Some(0), Some(0), Some(1)]), 1);
        assert_eq!(a.count_changed(&[None, None, Some(1)]), 1);
        assert!(ClusterAssignment::new(vec![Some(2)], 2).is_err());
    }
}

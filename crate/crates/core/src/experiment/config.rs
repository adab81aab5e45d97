use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::NestedCvConfig;
use crate::clustering::{Algorithm, DEFAULT_MIN_PTS};
use crate::connectivity::TimeSeriesPanel;
use crate::data::DataMatrix;
use crate::datagen::SyntheticSpec;
use crate::explain::{DEFAULT_PERTURBATIONS, DEFAULT_REPEATS};

/// Top-level experiment description, read from TOML.
///
/// ```toml
/// seed = 7
/// output_dir = "out"
/// replicates = 100
///
/// [data]
/// source = "synthetic"
/// dataset = "one"
///
/// [clustering]
/// algorithm = "k-means"
/// n_clusters = 2
///
/// [explain.g2pc]
/// repeats = 100
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "one")]
    pub replicates: usize,
    pub data: DataConfig,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    pub clustering: ClusteringConfig,
    #[serde(default)]
    pub grouping: GroupingConfig,
    pub explain: ExplainConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn one() -> usize {
    1
}

fn default_repeats() -> usize {
    DEFAULT_REPEATS
}

fn default_perturbations() -> usize {
    DEFAULT_PERTURBATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// `synthetic`, `csv`, or `panel`.
    pub source: String,
    /// Built-in synthetic dataset: `one` or `two`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    /// JSON synthetic spec file, instead of `dataset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_cluster: Option<usize>,
    /// CSV feature file or panel directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Optional ground-truth label CSV for the `csv` source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    /// Domain JSON for the `panel` source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domains: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Defaults to on for synthetic data and off otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zscore: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringConfig {
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_clusters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_pts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuzzifier: Option<f64>,
    /// Silhouette selection instead of a fixed count or ε.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub select: Option<SelectConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<usize>,
    /// Number of ε candidates for DBSCAN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
}

pub const DEFAULT_SELECT_MIN: usize = 2;
pub const DEFAULT_SELECT_MAX: usize = 10;
pub const DEFAULT_EPS_GRID: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupingConfig {
    /// `identity`, `file`, or `domain-pairs`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        GroupingConfig {
            source: "identity".into(),
            path: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2pc: Option<G2pcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2pc: Option<L2pcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pfi: Option<PfiConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2pcConfig {
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L2pcConfig {
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_perturbations")]
    pub perturbations: usize,
    /// Row indices to explain; all rows when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfiConfig {
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_folds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_folds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

impl BaselineConfig {
    pub fn to_nested_cv(&self) -> NestedCvConfig {
        let d = NestedCvConfig::default();
        NestedCvConfig {
            outer_folds: self.outer_folds.unwrap_or(d.outer_folds),
            inner_folds: self.inner_folds.unwrap_or(d.inner_folds),
            test_fraction: d.test_fraction,
            alphas: self.alphas.clone().unwrap_or(d.alphas),
            lambdas: self.lambdas.clone().unwrap_or(d.lambdas),
        }
    }
}

pub const DATA_SOURCES: [&str; 3] = ["synthetic", "csv", "panel"];
pub const GROUPING_SOURCES: [&str; 3] = ["identity", "file", "domain-pairs"];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn algorithm(&self) -> Option<Algorithm> {
        Algorithm::from_tag(&self.clustering.algorithm)
    }

    pub fn zscore(&self) -> bool {
        self.preprocess
            .zscore
            .unwrap_or(self.data.source == "synthetic")
    }

    /// Copy with every relative path joined onto `base` and defaults made explicit.
    pub fn resolved(&self, base: &Path) -> Self {
        let join = |p: &Option<PathBuf>| p.as_ref().map(|p| base.join(p));
        let mut out = self.clone();
        out.output_dir = base.join(&self.output_dir);
        out.data.spec = join(&self.data.spec);
        out.data.path = join(&self.data.path);
        out.data.labels = join(&self.data.labels);
        out.data.domains = join(&self.data.domains);
        out.grouping.path = join(&self.grouping.path);
        out.preprocess.zscore = Some(self.zscore());
        if self.algorithm() == Some(Algorithm::DbScan) && out.clustering.min_pts.is_none() {
            out.clustering.min_pts = Some(DEFAULT_MIN_PTS);
        }
        out
    }

    pub fn synthetic_spec(&self) -> Result<SyntheticSpec, String> {
        let spec = match (&self.data.dataset, &self.data.spec) {
            (Some(name), None) => SyntheticSpec::by_name(name)
                .ok_or_else(|| format!("unknown dataset '{name}'; valid datasets: one, two"))?,
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read spec {}: {e}", path.display()))?;
                SyntheticSpec::from_json(&text).map_err(|e| format!("bad spec {}: {e}", path.display()))?
            }
            (Some(_), Some(_)) => return Err("set only one of data.dataset and data.spec".into()),
            (None, None) => return Err("synthetic source needs data.dataset or data.spec".into()),
        };
        Ok(match self.data.samples_per_cluster {
            Some(n) => spec.with_samples_per_cluster(n),
            None => spec,
        })
    }

    /// Every problem with the configuration; empty when it is runnable.
    /// Paths must already be resolved.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut diag = Vec::new();
        if self.replicates == 0 {
            diag.push("replicates must be at least 1".to_string());
        }
        if self.workers == Some(0) {
            diag.push("workers must be at least 1".to_string());
        }
        let n_samples = self.check_data(&mut diag);
        if self.replicates > 1 && self.data.source != "synthetic" {
            diag.push("replicates > 1 requires the synthetic data source".to_string());
        }
        self.check_clustering(n_samples, &mut diag);
        self.check_grouping(&mut diag);
        self.check_explain(n_samples, &mut diag);
        diag
    }

    fn check_data(&self, diag: &mut Vec<String>) -> Option<usize> {
        let d = &self.data;
        let unused = |diag: &mut Vec<String>, name: &str, set: bool| {
            if set {
                diag.push(format!("data.{name} is not used by the {} source", d.source));
            }
        };
        match d.source.as_str() {
            "synthetic" => {
                unused(diag, "path", d.path.is_some());
                unused(diag, "labels", d.labels.is_some());
                unused(diag, "domains", d.domains.is_some());
                if d.samples_per_cluster == Some(0) {
                    diag.push("data.samples_per_cluster must be at least 1".into());
                    return None;
                }
                match self.synthetic_spec() {
                    Ok(spec) => Some(spec.samples_per_cluster * spec.n_clusters()),
                    Err(e) => {
                        diag.push(e);
                        None
                    }
                }
            }
            "csv" => {
                unused(diag, "dataset", d.dataset.is_some());
                unused(diag, "spec", d.spec.is_some());
                unused(diag, "samples_per_cluster", d.samples_per_cluster.is_some());
                unused(diag, "domains", d.domains.is_some());
                let Some(path) = &d.path else {
                    diag.push("csv source needs data.path".into());
                    return None;
                };
                if let Some(l) = &d.labels {
                    if !l.is_file() {
                        diag.push(format!("label file {} does not exist", l.display()));
                    }
                }
                if !path.is_file() {
                    diag.push(format!("data file {} does not exist", path.display()));
                    return None;
                }
                match DataMatrix::read_csv(path) {
                    Ok(m) => Some(m.n_samples()),
                    Err(e) => {
                        diag.push(format!("cannot load {}: {e}", path.display()));
                        None
                    }
                }
            }
            "panel" => {
                unused(diag, "dataset", d.dataset.is_some());
                unused(diag, "spec", d.spec.is_some());
                unused(diag, "samples_per_cluster", d.samples_per_cluster.is_some());
                unused(diag, "labels", d.labels.is_some());
                let Some(path) = &d.path else {
                    diag.push("panel source needs data.path".into());
                    return None;
                };
                if let Some(dm) = &d.domains {
                    if !dm.is_file() {
                        diag.push(format!("domain file {} does not exist", dm.display()));
                        return None;
                    }
                }
                if !path.is_dir() {
                    diag.push(format!("panel directory {} does not exist", path.display()));
                    return None;
                }
                match TimeSeriesPanel::read_dir(path, d.domains.as_deref()) {
                    Ok(p) => Some(p.n_subjects()),
                    Err(e) => {
                        diag.push(format!("cannot load panel {}: {e}", path.display()));
                        None
                    }
                }
            }
            other => {
                diag.push(format!(
                    "unknown data source '{other}'; valid sources: {}",
                    DATA_SOURCES.join(", ")
                ));
                None
            }
        }
    }

    fn check_clustering(&self, n: Option<usize>, diag: &mut Vec<String>) {
        let c = &self.clustering;
        let Some(alg) = self.algorithm() else {
            let tags: Vec<&str> = Algorithm::ALL.iter().map(|a| a.tag()).collect();
            diag.push(format!(
                "unknown algorithm '{}'; valid tags: {}",
                c.algorithm,
                tags.join(", ")
            ));
            return;
        };
        if c.fuzzifier.is_some() && alg != Algorithm::FuzzyCMeans {
            diag.push("clustering.fuzzifier applies only to fuzzy-c-means".into());
        }
        if let Some(m) = c.fuzzifier {
            if !(m > 1.0) {
                diag.push("clustering.fuzzifier must be > 1".into());
            }
        }
        if alg.takes_cluster_count() {
            if c.eps.is_some() || c.min_pts.is_some() {
                diag.push(format!("clustering.eps and clustering.min_pts do not apply to {alg}"));
            }
            match (c.n_clusters, &c.select) {
                (Some(_), Some(_)) => diag.push("set only one of clustering.n_clusters and clustering.select".into()),
                (None, None) => diag.push("clustering needs n_clusters or select".into()),
                (Some(k), None) => {
                    if k == 0 || n.is_some_and(|n| k > n) {
                        diag.push(format!("n_clusters must be in 1..=N, got {k}"));
                    }
                }
                (None, Some(s)) => {
                    if s.grid_size.is_some() {
                        diag.push("clustering.select.grid_size applies only to db-scan".into());
                    }
                    let lo = s.min.unwrap_or(DEFAULT_SELECT_MIN);
                    let hi = s.max.unwrap_or(DEFAULT_SELECT_MAX);
                    if lo < 2 {
                        diag.push("clustering.select.min must be at least 2".into());
                    }
                    if hi < lo {
                        diag.push("clustering.select.max must be >= select.min".into());
                    }
                    if let Some(n) = n {
                        if hi >= n {
                            diag.push(format!("clustering.select.max must be <= N-1 = {}", n.saturating_sub(1)));
                        }
                    }
                }
            }
        } else {
            if c.n_clusters.is_some() {
                diag.push("clustering.n_clusters does not apply to db-scan".into());
            }
            if c.min_pts == Some(0) {
                diag.push("clustering.min_pts must be at least 1".into());
            }
            match (c.eps, &c.select) {
                (Some(_), Some(_)) => diag.push("set only one of clustering.eps and clustering.select".into()),
                (None, None) => diag.push("db-scan needs eps or select".into()),
                (Some(e), None) => {
                    if !(e > 0.0) || !e.is_finite() {
                        diag.push(format!("eps must be finite and > 0, got {e}"));
                    }
                }
                (None, Some(s)) => {
                    if s.min.is_some() || s.max.is_some() {
                        diag.push("clustering.select.min/max do not apply to db-scan".into());
                    }
                    if s.grid_size.unwrap_or(DEFAULT_EPS_GRID) < 1 {
                        diag.push("clustering.select.grid_size must be at least 1".into());
                    }
                }
            }
        }
    }

    fn check_grouping(&self, diag: &mut Vec<String>) {
        let g = &self.grouping;
        match g.source.as_str() {
            "identity" => {
                if g.path.is_some() {
                    diag.push("grouping.path is not used by the identity grouping".into());
                }
            }
            "file" => match &g.path {
                None => diag.push("file grouping needs grouping.path".into()),
                Some(p) if !p.is_file() => {
                    diag.push(format!("grouping file {} does not exist", p.display()))
                }
                _ => {}
            },
            "domain-pairs" => {
                if self.data.source != "panel" {
                    diag.push("domain-pairs grouping requires the panel data source".into());
                }
                if g.path.is_some() {
                    diag.push("grouping.path is not used by the domain-pairs grouping".into());
                }
            }
            other => diag.push(format!(
                "unknown grouping source '{other}'; valid sources: {}",
                GROUPING_SOURCES.join(", ")
            )),
        }
    }

    fn check_explain(&self, n: Option<usize>, diag: &mut Vec<String>) {
        let e = &self.explain;
        if e.g2pc.is_none() && e.l2pc.is_none() && e.pfi.is_none() && e.baseline.is_none() {
            diag.push("enable at least one of explain.g2pc, explain.l2pc, explain.pfi, explain.baseline".into());
        }
        if let Some(g) = &e.g2pc {
            if g.repeats == 0 {
                diag.push("g2pc: K must be >= 1".into());
            }
        }
        if let Some(l) = &e.l2pc {
            if l.repeats == 0 {
                diag.push("l2pc: K must be >= 1".into());
            }
            if l.perturbations == 0 {
                diag.push("l2pc: M must be >= 1".into());
            }
            if let Some(n) = n {
                if l.perturbations > n.saturating_sub(1) {
                    diag.push(format!(
                        "l2pc: M must be ≤ N−1 (M = {}, N = {n})",
                        l.perturbations
                    ));
                }
                if let Some(bad) = l.samples.iter().flatten().find(|&&i| i >= n) {
                    diag.push(format!("l2pc: sample index {bad} out of range for N = {n}"));
                }
            }
        }
        if let Some(p) = &e.pfi {
            if p.repeats == 0 {
                diag.push("pfi: K must be >= 1".into());
            }
            let has_truth = self.data.source == "synthetic"
                || (self.data.source == "csv" && self.data.labels.is_some());
            if !has_truth {
                diag.push("pfi requires ground-truth labels (synthetic data or data.labels)".into());
            }
        }
        if let Some(b) = &e.baseline {
            if let Err(err) = b.to_nested_cv().validate() {
                diag.push(format!("baseline: {err}"));
            }
            if self.clustering.n_clusters.is_some_and(|k| k != 2) {
                diag.push("baseline requires exactly two clusters".into());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOKE: &str = r#"
        seed = 1
        [data]
        source = "synthetic"
        dataset = "one"
        [clustering]
        algorithm = "k-means"
        n_clusters = 2
        [explain.g2pc]
        repeats = 10
    "#;

    fn diag(text: &str) -> Vec<String> {
        ExperimentConfig::from_toml(text)
            .unwrap()
            .resolved(Path::new("."))
            .diagnostics()
    }

    #[test]
    fn valid_config_has_no_diagnostics() {
        assert_eq!(diag(SMOKE), Vec::<String>::new());
    }

    #[test]
    fn unknown_key_is_a_parse_error() {
        let text = SMOKE.replace("seed = 1", "seed = 1\nsede = 2");
        assert!(ExperimentConfig::from_toml(&text).unwrap_err().contains("sede"));
    }

    #[test]
    fn unknown_algorithm_lists_tags() {
        let d = diag(&SMOKE.replace("\"k-means\"", "\"kmeens\""));
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("k-means, gmm, db-scan, agglomerative, fuzzy-c-means"));
    }

    #[test]
    fn m_equal_to_n_rejected() {
        let text = format!("{SMOKE}\n[explain.l2pc]\nperturbations = 100\n");
        let d = diag(&text);
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("M must be ≤ N−1"));
    }

    #[test]
    fn collects_every_problem() {
        let text = SMOKE
            .replace("\"k-means\"", "\"nope\"")
            .replace("repeats = 10", "repeats = 0")
            .replace("seed = 1", "seed = 1\nreplicates = 0");
        assert_eq!(diag(&text).len(), 3);
    }

    #[test]
    fn zscore_defaults_by_source() {
        let c = ExperimentConfig::from_toml(SMOKE).unwrap();
        assert!(c.zscore());
        let mut p = c.clone();
        p.data.source = "panel".into();
        assert!(!p.zscore());
    }
}

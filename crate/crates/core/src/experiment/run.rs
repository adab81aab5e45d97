use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, DEFAULT_EPS_GRID, DEFAULT_SELECT_MAX, DEFAULT_SELECT_MIN};
use crate::baseline::{nested_cv_effects, EffectReport};
use crate::clustering::{
    dbscan_eps_grid, fit, select_clusters, Algorithm, ClusterParams, FittedClusterer,
    SilhouetteReport, DEFAULT_MIN_PTS,
};
use crate::connectivity::{connectivity_features, TimeSeriesPanel};
use crate::data::{zscore, ClusterAssignment, DataMatrix, FeatureGrouping, Label};
use crate::datagen::generate_batch;
use crate::error::{Error, Result};
use crate::explain::{
    accuracy, g2pc, l2pc, permutation_feature_importance, summarize, G2pcResult, GroupSummary,
    GroupValues, L2pcResult, PfiResult,
};
use crate::rng::RandomSeed;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

/// Why a run stopped: the pipeline stage and a machine-readable kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub stage: String,
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl RunFailure {
    fn at(stage: &str, e: Error) -> Self {
        RunFailure {
            stage: stage.into(),
            kind: e.kind().into(),
            message: e.to_string(),
            diagnostics: Vec::new(),
        }
    }

    fn config(diagnostics: Vec<String>) -> Self {
        RunFailure {
            stage: "config".into(),
            kind: "ConfigInvalid".into(),
            message: format!("{} configuration problem(s)", diagnostics.len()),
            diagnostics,
        }
    }

    pub fn is_config_error(&self) -> bool {
        self.kind == "ConfigInvalid"
    }
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} stage failed ({}): {}", self.stage, self.kind, self.message)?;
        for d in &self.diagnostics {
            write!(f, "\n  - {d}")?;
        }
        Ok(())
    }
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    seed: u64,
    workers: usize,
    config: ExperimentConfig,
    replicates: Vec<ReplicateEntry>,
    files: Vec<String>,
    timings_secs: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReplicateEntry {
    index: usize,
    dir: String,
    params: ClusterParams,
    n_clusters: usize,
    n_noise: usize,
}

/// Loads a TOML config, or the config echoed in a previous run's manifest
/// JSON, with paths resolved against the file's directory.
pub fn load_config(path: &Path) -> std::result::Result<ExperimentConfig, RunFailure> {
    let text = fs::read_to_string(path).map_err(|e| RunFailure::at("config", Error::io(path, e)))?;
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let base = std::path::absolute(parent).map_err(|e| RunFailure::at("config", Error::io(parent, e)))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    let parsed = if is_json {
        serde_json::from_str::<Manifest>(&text)
            .map(|m| m.config)
            .map_err(|e| e.to_string())
    } else {
        ExperimentConfig::from_toml(&text)
    };
    parsed
        .map(|c| c.resolved(&base))
        .map_err(|e| RunFailure::config(vec![e]))
}

/// Diagnostics for the config at `path`; `Err` only if the file is unreadable.
pub fn validate(path: &Path) -> Result<Vec<String>> {
    match load_config(path) {
        Ok(cfg) => Ok(cfg.diagnostics()),
        Err(f) if f.is_config_error() => Ok(f.diagnostics),
        Err(_) => {
            let e = fs::read_to_string(path).unwrap_err();
            Err(Error::io(path, e))
        }
    }
}

/// Loads, validates and runs; on failure writes `error.json` into the output
/// directory when one is known.
pub fn run_path(path: &Path, overrides: &Overrides) -> std::result::Result<RunReport, RunFailure> {
    let cfg = load_config(path)?;
    let out_hint = overrides.out_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let result = run(&cfg, overrides);
    if let Err(f) = &result {
        write_error(&out_hint, f);
    }
    result
}

fn write_error(dir: &Path, failure: &RunFailure) {
    if fs::create_dir_all(dir).is_ok() {
        if let Ok(text) = serde_json::to_string_pretty(failure) {
            let _ = fs::write(dir.join("error.json"), text + "\n");
        }
    }
}

struct Replicate {
    data: DataMatrix,
    truth: Option<ClusterAssignment>,
}

#[derive(Default)]
struct Timings(BTreeMap<String, f64>);

impl Timings {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        *self.0.entry(stage.to_string()).or_default() += t.elapsed().as_secs_f64();
        out
    }
}

/// Runs a resolved configuration.
pub fn run(config: &ExperimentConfig, overrides: &Overrides) -> std::result::Result<RunReport, RunFailure> {
    let mut cfg = config.clone();
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if let Some(w) = overrides.workers {
        cfg.workers = Some(w);
    }
    if let Some(o) = &overrides.out_dir {
        cfg.output_dir = o.clone();
    }
    let diag = cfg.diagnostics();
    if !diag.is_empty() {
        return Err(RunFailure::config(diag));
    }
    let workers = cfg.workers.unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunFailure::at("setup", Error::InvalidParameter(e.to_string())))?;
    pool.install(|| execute(&cfg, workers))
}

fn execute(cfg: &ExperimentConfig, workers: usize) -> std::result::Result<RunReport, RunFailure> {
    let seed = RandomSeed(cfg.seed);
    let out = cfg.output_dir.clone();
    let io_fail = |p: &Path, e: std::io::Error| RunFailure::at("output", Error::io(p, e));
    fs::create_dir_all(&out).map_err(|e| io_fail(&out, e))?;
    let mut timings = Timings::default();
    let mut files: Vec<PathBuf> = Vec::new();

    let (replicates, panel_grouping) = timings.time("data", || load_replicates(cfg, seed))?;
    let grouping = timings.time("grouping", || resolve_grouping(cfg, &replicates[0].data, panel_grouping))?;
    let algorithm = cfg.algorithm().expect("validated");

    let mut pooled: BTreeMap<&'static str, Vec<Vec<f64>>> = BTreeMap::new();
    let mut entries = Vec::new();
    let multi = replicates.len() > 1;

    for (r, rep) in replicates.into_iter().enumerate() {
        let rseed = seed.derive("replicate-run", &[r as u64]);
        let dir = if multi { out.join(format!("replicate-{r:03}")) } else { out.clone() };
        fs::create_dir_all(&dir).map_err(|e| io_fail(&dir, e))?;
        let mut writer = OutputWriter { dir: &dir, files: &mut files };

        let data = if cfg.zscore() {
            timings
                .time("preprocess", || zscore(&rep.data))
                .map_err(|e| RunFailure::at("preprocess", e))?
        } else {
            rep.data
        };

        let (params, selection) = timings.time("clustering", || cluster_params(cfg, algorithm, &data, rseed))?;
        if let Some(sel) = &selection {
            writer.json("selection.json", sel)?;
        }
        let model = timings
            .time("clustering", || fit(&params, &data, rseed.derive("fit", &[])))
            .map_err(|e| RunFailure::at("clustering", e))?;
        writer.text("model.json", &model.to_json().map_err(|e| RunFailure::at("output", e))?)?;
        let mut buf = Vec::new();
        model.train_labels().write_csv(&mut buf).map_err(|e| RunFailure::at("output", e))?;
        writer.bytes("labels.csv", &buf)?;
        let cluster_labels = model.train_labels().labels().to_vec();
        entries.push(ReplicateEntry {
            index: r,
            dir: dir.strip_prefix(&out).unwrap_or(&dir).display().to_string(),
            params: params.clone(),
            n_clusters: model.n_clusters(),
            n_noise: model.train_labels().n_noise(),
        });

        let truth: Option<Vec<Label>> = rep.truth.as_ref().map(|t| t.labels().to_vec());
        let mapping = truth.as_ref().map(|t| majority_mapping(&cluster_labels, t, model.n_clusters()));
        let plot = PlotContext {
            truth: truth.as_deref(),
            clusters: &cluster_labels,
            mapping: mapping.as_deref(),
        };
        let mut plot_rows = Vec::new();
        let mut summaries: Vec<(&'static str, Vec<GroupSummary>)> = Vec::new();

        if let Some(g) = &cfg.explain.g2pc {
            let res = timings
                .time("g2pc", || g2pc(&model, &data, &grouping, g.repeats, rseed.derive("g2pc", &[])))
                .map_err(|e| RunFailure::at("g2pc", e))?;
            writer.text("g2pc.json", &res.to_json().map_err(|e| RunFailure::at("output", e))?)?;
            plot.g2pc_rows(&res, &mut plot_rows);
            pool_into(&mut pooled, "g2pc", &res);
            summaries.push(("g2pc", summarize(&res)));
        }
        if let Some(l) = &cfg.explain.l2pc {
            let res = timings
                .time("l2pc", || {
                    l2pc(
                        &model,
                        &data,
                        &grouping,
                        l.repeats,
                        l.perturbations,
                        rseed.derive("l2pc", &[]),
                        l.samples.as_deref(),
                    )
                })
                .map_err(|e| RunFailure::at("l2pc", e))?;
            writer.text("l2pc.json", &res.to_json().map_err(|e| RunFailure::at("output", e))?)?;
            plot.l2pc_rows(&res, &mut plot_rows);
            pool_into(&mut pooled, "l2pc", &res);
            summaries.push(("l2pc", summarize(&res)));
        }
        if let Some(p) = &cfg.explain.pfi {
            let truth = truth.as_ref().expect("validated");
            let res = timings
                .time("pfi", || run_pfi(&model, &data, truth, &grouping, p.repeats, rseed.derive("pfi", &[])))
                .map_err(|e| RunFailure::at("pfi", e))?;
            writer.json("pfi.json", &res)?;
            plot.pfi_rows(&res, &mut plot_rows);
            pool_into(&mut pooled, "pfi", &res);
            summaries.push(("pfi", summarize(&res)));
        }
        if let Some(b) = &cfg.explain.baseline {
            let res = timings
                .time("baseline", || run_baseline(&data, &cluster_labels, &grouping, b, rseed))
                .map_err(|e| RunFailure::at("baseline", e))?;
            writer.text("baseline.json", &res.to_json().map_err(|e| RunFailure::at("output", e))?)?;
            let mut buf = Vec::new();
            res.write_fold_csv(&mut buf).map_err(|e| RunFailure::at("output", e))?;
            writer.bytes("baseline_folds.csv", &buf)?;
            plot.baseline_rows(&res, &mut plot_rows);
            pool_into(&mut pooled, "lr-enr", &res);
            summaries.push(("lr-enr", summarize(&res)));
        }

        writer.bytes("summary.csv", &summary_csv(&summaries).map_err(|e| RunFailure::at("output", e))?)?;
        writer.bytes("plot.csv", &plot_csv(&plot_rows).map_err(|e| RunFailure::at("output", e))?)?;
    }

    if multi {
        let summaries: Vec<(&'static str, Vec<GroupSummary>)> = pooled
            .iter()
            .map(|(name, values)| {
                let p = Pooled {
                    grouping: &grouping,
                    values,
                };
                (*name, summarize(&p))
            })
            .collect();
        let ordered = order_explainers(summaries);
        let mut writer = OutputWriter { dir: &out, files: &mut files };
        writer.bytes(
            "pooled_summary.csv",
            &summary_csv(&ordered).map_err(|e| RunFailure::at("output", e))?,
        )?;
    }

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        workers,
        config: cfg.clone(),
        replicates: entries,
        files: files
            .iter()
            .map(|p| p.strip_prefix(&out).unwrap_or(p).display().to_string())
            .collect(),
        timings_secs: timings.0,
    };
    let manifest_path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| RunFailure::at("output", e.into()))?;
    fs::write(&manifest_path, text + "\n").map_err(|e| io_fail(&manifest_path, e))?;
    files.push(manifest_path);
    Ok(RunReport {
        output_dir: out,
        files,
        config: cfg.clone(),
    })
}

struct OutputWriter<'a> {
    dir: &'a Path,
    files: &'a mut Vec<PathBuf>,
}

impl OutputWriter<'_> {
    fn bytes(&mut self, name: &str, content: &[u8]) -> std::result::Result<(), RunFailure> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|e| RunFailure::at("output", Error::io(&path, e)))?;
        self.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, content: &str) -> std::result::Result<(), RunFailure> {
        self.bytes(name, format!("{content}\n").as_bytes())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> std::result::Result<(), RunFailure> {
        let text = serde_json::to_string_pretty(value).map_err(|e| RunFailure::at("output", e.into()))?;
        self.text(name, &text)
    }
}

fn load_replicates(
    cfg: &ExperimentConfig,
    seed: RandomSeed,
) -> std::result::Result<(Vec<Replicate>, Option<FeatureGrouping>), RunFailure> {
    let fail = |e| RunFailure::at("data", e);
    match cfg.data.source.as_str() {
        "synthetic" => {
            let spec = cfg
                .synthetic_spec()
                .map_err(|m| RunFailure::at("data", Error::InvalidParameter(m)))?;
            let reps = generate_batch(&spec, cfg.replicates, seed.derive("data", &[]))
                .map_err(fail)?
                .into_iter()
                .map(|(data, truth)| Replicate {
                    data,
                    truth: Some(truth),
                })
                .collect();
            Ok((reps, None))
        }
        "csv" => {
            let path = cfg.data.path.as_ref().expect("validated");
            let data = DataMatrix::read_csv(path).map_err(fail)?;
            let truth = match &cfg.data.labels {
                Some(p) => {
                    let t = ClusterAssignment::read_csv(p).map_err(fail)?;
                    if t.len() != data.n_samples() {
                        return Err(fail(Error::DimensionMismatch {
                            expected: data.n_samples(),
                            found: t.len(),
                        }));
                    }
                    Some(t)
                }
                None => None,
            };
            Ok((vec![Replicate { data, truth }], None))
        }
        "panel" => {
            let path = cfg.data.path.as_ref().expect("validated");
            let panel = TimeSeriesPanel::read_dir(path, cfg.data.domains.as_deref()).map_err(fail)?;
            let (data, grouping) = connectivity_features(&panel).map_err(fail)?;
            Ok((vec![Replicate { data, truth: None }], Some(grouping)))
        }
        _ => unreachable!("validated"),
    }
}

fn resolve_grouping(
    cfg: &ExperimentConfig,
    data: &DataMatrix,
    panel_grouping: Option<FeatureGrouping>,
) -> std::result::Result<FeatureGrouping, RunFailure> {
    let fail = |e| RunFailure::at("grouping", e);
    match cfg.grouping.source.as_str() {
        "identity" => {
            let names = (0..data.n_features()).map(|f| data.feature_name(f)).collect();
            FeatureGrouping::identity(data.n_features())
                .and_then(|g| g.with_labels(names))
                .map_err(fail)
        }
        "domain-pairs" => Ok(panel_grouping.expect("validated")),
        "file" => {
            let names: Vec<String> = (0..data.n_features()).map(|f| data.feature_name(f)).collect();
            let g = FeatureGrouping::read_file(cfg.grouping.path.as_ref().expect("validated"), &names)
                .map_err(fail)?;
            g.check_features(data.n_features()).map_err(fail)?;
            Ok(g)
        }
        _ => unreachable!("validated"),
    }
}

fn cluster_params(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    data: &DataMatrix,
    seed: RandomSeed,
) -> std::result::Result<(ClusterParams, Option<SilhouetteReport>), RunFailure> {
    let c = &cfg.clustering;
    let min_pts = c.min_pts.unwrap_or(DEFAULT_MIN_PTS);
    let mut template = match algorithm {
        Algorithm::DbScan => ClusterParams::dbscan(c.eps.unwrap_or(1.0), min_pts),
        other => ClusterParams::for_algorithm(other, c.n_clusters.unwrap_or(2) as f64),
    };
    if let (ClusterParams::FuzzyCMeans { fuzzifier, .. }, Some(m)) = (&mut template, c.fuzzifier) {
        *fuzzifier = m;
    }
    let Some(sel) = &c.select else {
        return Ok((template, None));
    };
    let candidates: Vec<f64> = if algorithm == Algorithm::DbScan {
        dbscan_eps_grid(data.view(), min_pts, sel.grid_size.unwrap_or(DEFAULT_EPS_GRID))
            .map_err(|e| RunFailure::at("clustering", e))?
    } else {
        let lo = sel.min.unwrap_or(DEFAULT_SELECT_MIN);
        let hi = sel.max.unwrap_or(DEFAULT_SELECT_MAX);
        (lo..=hi).map(|k| k as f64).collect()
    };
    let report = select_clusters(&template, data, &candidates, seed.derive("select", &[]));
    match report.selected_params(&template) {
        Some(p) => Ok((p, Some(report))),
        None if report.all_noise => Err(RunFailure::at("clustering", Error::AllNoiseModel)),
        None => Err(RunFailure::at("clustering", Error::InsufficientClusters)),
    }
}

/// Most frequent true label per cluster; ties go to the lowest label.
fn majority_mapping(clusters: &[Label], truth: &[Label], n_clusters: usize) -> Vec<Option<usize>> {
    let n_true = truth.iter().flatten().max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0usize; n_true]; n_clusters];
    for (c, t) in clusters.iter().zip(truth) {
        if let (Some(c), Some(t)) = (c, t) {
            counts[*c][*t] += 1;
        }
    }
    counts
        .iter()
        .map(|row| {
            let mut best = 0;
            for (t, &c) in row.iter().enumerate() {
                if c > row[best] {
                    best = t;
                }
            }
            row.get(best).is_some_and(|&c| c > 0).then_some(best)
        })
        .collect()
}

fn run_pfi(
    model: &FittedClusterer,
    data: &DataMatrix,
    truth: &[Label],
    grouping: &FeatureGrouping,
    repeats: usize,
    seed: RandomSeed,
) -> Result<PfiResult> {
    let clusters = model.train_labels().labels();
    let mapping = majority_mapping(clusters, truth, model.n_clusters());
    let y: Vec<usize> = truth.iter().map(|t| t.unwrap_or(usize::MAX)).collect();
    let predict = |x: ndarray::ArrayView2<f64>| -> Vec<usize> {
        model
            .assign_rows(x)
            .expect("column count checked")
            .into_iter()
            .map(|l| l.and_then(|c| mapping[c]).unwrap_or(usize::MAX - 1))
            .collect()
    };
    permutation_feature_importance(predict, data, &y, grouping, repeats, accuracy, seed)
}

fn run_baseline(
    data: &DataMatrix,
    clusters: &[Label],
    grouping: &FeatureGrouping,
    cfg: &super::config::BaselineConfig,
    seed: RandomSeed,
) -> Result<EffectReport> {
    let keep: Vec<usize> = (0..clusters.len()).filter(|&i| clusters[i].is_some()).collect();
    let labels: Vec<usize> = keep.iter().map(|&i| clusters[i].expect("kept")).collect();
    let subset = data.select_rows(&keep)?;
    nested_cv_effects(&subset, &labels, grouping, &cfg.to_nested_cv(), seed.derive("baseline", &[]))
}

struct Pooled<'a> {
    grouping: &'a FeatureGrouping,
    values: &'a [Vec<f64>],
}

impl GroupValues for Pooled<'_> {
    fn grouping(&self) -> &FeatureGrouping {
        self.grouping
    }

    fn group_values(&self, j: usize) -> Vec<f64> {
        self.values[j].clone()
    }
}

fn pool_into(pooled: &mut BTreeMap<&'static str, Vec<Vec<f64>>>, name: &'static str, res: &impl GroupValues) {
    let n = res.grouping().n_groups();
    let entry = pooled.entry(name).or_insert_with(|| vec![Vec::new(); n]);
    for (j, slot) in entry.iter_mut().enumerate() {
        slot.extend(res.group_values(j));
    }
}

fn order_explainers(
    mut s: Vec<(&'static str, Vec<GroupSummary>)>,
) -> Vec<(&'static str, Vec<GroupSummary>)> {
    let rank = |n: &str| ["g2pc", "l2pc", "pfi", "lr-enr"].iter().position(|x| *x == n);
    s.sort_by_key(|(n, _)| rank(n));
    s
}

fn summary_csv(summaries: &[(&'static str, Vec<GroupSummary>)]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut wtr = csv::Writer::from_writer(&mut buf);
        wtr.write_record(["explainer", "group_label", "mean", "median", "std"])?;
        for (name, rows) in summaries {
            for r in rows {
                wtr.write_record([
                    name.to_string(),
                    r.label.clone(),
                    r.mean.to_string(),
                    r.median.to_string(),
                    r.std.to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    }
    Ok(buf)
}

struct PlotRow {
    explainer: &'static str,
    group: String,
    sample: Option<usize>,
    repeat: usize,
    value: f64,
    labels: [String; 3],
}

struct PlotContext<'a> {
    truth: Option<&'a [Label]>,
    clusters: &'a [Label],
    mapping: Option<&'a [Option<usize>]>,
}

impl PlotContext<'_> {
    fn g2pc_rows(&self, res: &G2pcResult, rows: &mut Vec<PlotRow>) {
        for (j, vals) in res.pct_change.iter().enumerate() {
            for (k, &v) in vals.iter().enumerate() {
                rows.push(PlotRow {
                    explainer: "g2pc",
                    group: res.grouping.label(j),
                    sample: None,
                    repeat: k,
                    value: v,
                    labels: Default::default(),
                });
            }
        }
    }

    fn l2pc_rows(&self, res: &L2pcResult, rows: &mut Vec<PlotRow>) {
        for (s, &n) in res.samples.iter().enumerate() {
            let labels = self.sample_fields(n);
            for j in 0..res.n_groups {
                for k in 0..res.repeats {
                    rows.push(PlotRow {
                        explainer: "l2pc",
                        group: res.grouping.label(j),
                        sample: Some(n),
                        repeat: k,
                        value: res.value(s, j, k),
                        labels: labels.clone(),
                    });
                }
            }
        }
    }

    fn pfi_rows(&self, res: &PfiResult, rows: &mut Vec<PlotRow>) {
        for (j, vals) in res.importance.iter().enumerate() {
            for (k, &v) in vals.iter().enumerate() {
                rows.push(PlotRow {
                    explainer: "pfi",
                    group: res.grouping.label(j),
                    sample: None,
                    repeat: k,
                    value: v,
                    labels: Default::default(),
                });
            }
        }
    }

    fn baseline_rows(&self, res: &EffectReport, rows: &mut Vec<PlotRow>) {
        for (o, fold) in res.folds.iter().enumerate() {
            for (j, &v) in fold.group_effect.iter().enumerate() {
                rows.push(PlotRow {
                    explainer: "lr-enr",
                    group: res.grouping.label(j),
                    sample: None,
                    repeat: o,
                    value: v,
                    labels: Default::default(),
                });
            }
        }
    }

    fn sample_fields(&self, i: usize) -> [String; 3] {
        let fmt = |l: Label| l.map_or("-1".to_string(), |c| c.to_string());
        let cluster = fmt(self.clusters[i]);
        match (self.truth, self.mapping) {
            (Some(t), Some(m)) => {
                let predicted = self.clusters[i].and_then(|c| m[c]);
                let correct = predicted.is_some() && predicted == t[i];
                [fmt(t[i]), cluster, correct.to_string()]
            }
            _ => [String::new(), cluster, String::new()],
        }
    }
}

fn plot_csv(rows: &[PlotRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut wtr = csv::Writer::from_writer(&mut buf);
        wtr.write_record([
            "explainer",
            "group",
            "sample",
            "repeat",
            "value",
            "true_label",
            "cluster_label",
            "correct",
        ])?;
        for r in rows {
            wtr.write_record([
                r.explainer.to_string(),
                r.group.clone(),
                r.sample.map_or(String::new(), |s| s.to_string()),
                r.repeat.to_string(),
                r.value.to_string(),
                r.labels[0].clone(),
                r.labels[1].clone(),
                r.labels[2].clone(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    }
    Ok(buf)
}

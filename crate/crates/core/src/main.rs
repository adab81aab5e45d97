use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cluster_explain::connectivity::{connectivity_features, TimeSeriesPanel};
use cluster_explain::data::zscore;
use cluster_explain::datagen::{generate, SyntheticSpec};
use cluster_explain::experiment::{run_path, validate, Overrides};
use cluster_explain::rng::RandomSeed;
use cluster_explain::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "cluster-explain", version, about = "Feature importance for clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the explain loops.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config or a previous manifest.json.
    Run { config: PathBuf },
    /// List every problem with a config.
    Validate { config: PathBuf },
    /// Write a synthetic dataset (`one`, `two`, or a JSON spec) to CSV.
    Generate { spec: String, out: PathBuf },
    /// Turn a directory of per-subject time series into connectivity features.
    Fnc {
        panel_dir: PathBuf,
        out: PathBuf,
        /// Domain JSON; defaults to the single *.json in the panel directory.
        #[arg(long)]
        domains: Option<PathBuf>,
        /// Z-score the connectivity features.
        #[arg(long)]
        zscore: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { ref config } => {
            let overrides = Overrides {
                seed: cli.seed,
                workers: cli.workers,
                out_dir: cli.out_dir.clone(),
            };
            match run_path(config, &overrides) {
                Ok(report) => {
                    println!("wrote {} files to {}", report.files.len(), report.output_dir.display());
                    ExitCode::SUCCESS
                }
                Err(f) => {
                    eprintln!("{f}");
                    ExitCode::from(if f.is_config_error() { EXIT_CONFIG } else { EXIT_RUNTIME })
                }
            }
        }
        Command::Validate { ref config } => match validate(config) {
            Ok(diag) if diag.is_empty() => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Ok(diag) => {
                for d in diag {
                    println!("{d}");
                }
                ExitCode::from(EXIT_CONFIG)
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Generate { ref spec, ref out } => {
            let spec = match load_spec(spec) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            report(generate_files(&spec, &target(&cli.out_dir, out), RandomSeed(cli.seed.unwrap_or(0))))
        }
        Command::Fnc {
            ref panel_dir,
            ref out,
            ref domains,
            zscore,
        } => report(fnc_files(panel_dir, domains.as_deref(), zscore, &target(&cli.out_dir, out))),
    }
}

fn target(out_dir: &Option<PathBuf>, out: &Path) -> PathBuf {
    match out_dir {
        Some(d) => d.join(out),
        None => out.to_path_buf(),
    }
}

fn report(result: Result<Vec<PathBuf>, Error>) -> ExitCode {
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn load_spec(spec: &str) -> Result<SyntheticSpec, Error> {
    if let Some(s) = SyntheticSpec::by_name(spec) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Error::InvalidParameter(format!("{spec}: {e}")))?;
    SyntheticSpec::from_json(&text)
}

/// `<stem>_labels.csv` next to `out`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or("out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn ensure_parent(out: &Path) -> Result<(), Error> {
    if let Some(p) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(p).map_err(|e| Error::InvalidData(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn generate_files(spec: &SyntheticSpec, out: &Path, seed: RandomSeed) -> Result<Vec<PathBuf>, Error> {
    ensure_parent(out)?;
    let (data, labels) = generate(spec, seed)?;
    data.write_csv_file(out)?;
    let label_path = sibling(out, "labels");
    let file = std::fs::File::create(&label_path)
        .map_err(|e| Error::InvalidData(format!("{}: {e}", label_path.display())))?;
    labels.write_csv(file)?;
    Ok(vec![out.to_path_buf(), label_path])
}

fn fnc_files(dir: &Path, domains: Option<&Path>, standardize: bool, out: &Path) -> Result<Vec<PathBuf>, Error> {
    ensure_parent(out)?;
    let panel = TimeSeriesPanel::read_dir(dir, domains)?;
    let (mut data, grouping) = connectivity_features(&panel)?;
    if standardize {
        data = zscore(&data)?;
    }
    data.write_csv_file(out)?;
    let group_path = sibling(out, "groups");
    let file = std::fs::File::create(&group_path)
        .map_err(|e| Error::InvalidData(format!("{}: {e}", group_path.display())))?;
    let names: Vec<String> = (0..data.n_features()).map(|f| data.feature_name(f)).collect();
    grouping.write_csv(file, &names)?;
    Ok(vec![out.to_path_buf(), group_path])
}

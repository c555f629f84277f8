//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::geometry::{DomainKind, GeometryReport, DEFAULT_FILL_GRID};
use crate::protocol::{enumerate_slices, execute_experiment, Axis, Method, Regime};
use crate::report::{self, SliceSelection};
use crate::synthdata::{generate, DesignSpec, FactorialDataset};

#[derive(Debug, Parser)]
#[command(name = "surfcmp", version, about = "Paired benchmark of cubic and RBF surface interpolants")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// TOML config or a `setting,value` CSV.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `random_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "artifacts")]
    outdir: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the factorial dataset to `dataset.csv`.
    Generate,
    /// Run the full paired experiment and write every artifact.
    Run,
    /// Summarize a run table.
    Report {
        /// Defaults to `<outdir>/runs.csv`.
        #[arg(long)]
        runs: Option<PathBuf>,
        /// Print CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
    },
    /// Export one interpolated slice on a regular grid.
    Surface {
        #[arg(long, default_value = "noise-free", value_parser = parse_regime)]
        regime: Regime,
        /// 1-based output channel.
        #[arg(long, default_value_t = 1)]
        output: usize,
        /// Fixed axis.
        #[arg(long, default_value = "X3", value_parser = parse_axis)]
        axis: Axis,
        #[arg(long, default_value_t = 0)]
        level_index: usize,
        #[arg(long, default_value = "cubic", value_parser = parse_method)]
        method: Method,
        /// Defaults to `<outdir>/surface_<method>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fill distance, separation distance and mesh ratio of every slice.
    Diagnose {
        /// Use the bounding box instead of the convex hull as domain.
        #[arg(long)]
        bbox: bool,
        #[arg(long, default_value_t = DEFAULT_FILL_GRID)]
        grid: usize,
    },
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    Regime::parse(s).ok_or_else(|| format!("expected noise-free or noisy, got {s:?}"))
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    Axis::parse(s).ok_or_else(|| format!("expected X1, X2 or X3, got {s:?}"))
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| format!("expected cubic or rbf, got {s:?}"))
}

#[derive(Debug, Serialize)]
struct SliceGeometry {
    slice: String,
    n_nodes: usize,
    report: GeometryReport,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn load_config(global: &GlobalOpts) -> Result<ExperimentConfig> {
    let mut config = match &global.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.random_seed = seed;
    }
    Ok(config)
}

fn dataset(config: &ExperimentConfig) -> Result<FactorialDataset> {
    Ok(generate(&DesignSpec::default(), &config.noise())?)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(file))
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(&cli.global)?;
    let outdir = &cli.global.outdir;
    match cli.command {
        Command::Generate => {
            let path = outdir.join("dataset.csv");
            dataset(&config)?.write_csv(create(&path)?)?;
            println!("{}", path.display());
        }
        Command::Run => {
            let start = Instant::now();
            let data = dataset(&config)?;
            let records = execute_experiment(&data, &config);
            let meta = report::write_artifacts(outdir, &data, &records, &config, start.elapsed())?;
            log::info!("{} records in {:.2}s", meta.n_records, meta.runtime_seconds);
            println!("{}", outdir.display());
        }
        Command::Report { runs, csv } => {
            let path = runs.unwrap_or_else(|| outdir.join("runs.csv"));
            let file = std::fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let rows = report::read_runs_csv(file)?;
            if rows.is_empty() {
                bail!("no runs in {}", path.display());
            }
            let table = report::summarize(&rows, &config)?;
            if csv {
                table.write_csv(std::io::stdout().lock())?;
            } else {
                print!("{}", table.render());
            }
        }
        Command::Surface { regime, output, axis, level_index, method, out } => {
            let data = dataset(&config)?;
            let selection = SliceSelection { regime, output, axis, level_index };
            let (grid, axes) = report::export_surface_grid(&data, selection, method, &config)?;
            let path = out.unwrap_or_else(|| outdir.join(format!("surface_{method}.csv")));
            grid.write_csv(create(&path)?, [axes[0].label(), axes[1].label()])?;
            println!("{}", path.display());
        }
        Command::Diagnose { bbox, grid } => {
            let data = dataset(&config)?;
            let domain = if bbox { DomainKind::BoundingBox } else { DomainKind::ConvexHull };
            // geometry does not depend on the output channel
            let slices: Vec<SliceGeometry> = enumerate_slices(&data, Regime::NoiseFree)
                .into_iter()
                .filter(|t| t.output == 1)
                .map(|t| {
                    let report = GeometryReport::compute(&t.points, domain, grid)?;
                    Ok(SliceGeometry { slice: t.slice.to_string(), n_nodes: t.len(), report })
                })
                .collect::<Result<_>>()?;
            let text = serde_json::to_string_pretty(&slices)?;
            std::fs::create_dir_all(outdir)?;
            std::fs::write(outdir.join("geometry.json"), &text)?;
            println!("{text}");
        }
    }
    Ok(())
}

//! Aggregation of run tables and export of tabular artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ExperimentConfig, CI_LEVEL};
use crate::geometry::{Point2, PointSet2};
use crate::interp_cubic::fit_cubic;
use crate::interp_rbf::{fit_rbf, RbfConfig};
use crate::metrics::{bootstrap_ci, BootstrapCI};
use crate::protocol::{enumerate_slices, Axis, Method, Regime, RunReason, RunRecord};
use crate::seed;
use crate::synthdata::FactorialDataset;

/// Marker for undefined values in every CSV artifact.
pub const NA: &str = "NA";

pub const RUNS_CSV_HEADER: [&str; 13] = [
    "regime",
    "output",
    "fixed_axis",
    "fixed_level",
    "repeat",
    "method",
    "valid",
    "reason",
    "n_test",
    "n_finite",
    "rmse",
    "mae",
    "r2",
];

pub const SUMMARY_CSV_HEADER: [&str; 11] = [
    "regime",
    "output",
    "method",
    "runs",
    "rmse_mean",
    "rmse_ci_lo",
    "rmse_ci_hi",
    "mae_mean",
    "r2_mean",
    "r2_ci_lo",
    "r2_ci_hi",
];

pub const PRED_CSV_HEADER: [&str; 7] = ["regime", "output", "slice", "repeat", "method", "y_true", "y_pred"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no runs to summarize")]
    NoRuns,
    #[error("malformed run table at line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("unknown slice {axis} level index {level_index}")]
    UnknownSlice { axis: Axis, level_index: usize },
    #[error("fit failed ({reason}): {msg}")]
    Fit { reason: RunReason, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        NA.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), fmt_num)
}

fn parse_opt(s: &str) -> Result<Option<f64>, String> {
    if s == NA {
        Ok(None)
    } else {
        s.parse::<f64>().map(Some).map_err(|e| format!("{s:?}: {e}"))
    }
}

/// One line of `runs.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub regime: Regime,
    pub output: usize,
    pub fixed_axis: Axis,
    pub fixed_level: f64,
    pub repeat: usize,
    pub method: Method,
    pub valid: bool,
    pub reason: RunReason,
    pub n_test: usize,
    pub n_finite: usize,
    pub rmse: Option<f64>,
    pub mae: Option<f64>,
    pub r2: Option<f64>,
}

impl From<&RunRecord> for RunRow {
    fn from(r: &RunRecord) -> Self {
        Self {
            regime: r.regime,
            output: r.output,
            fixed_axis: r.slice.axis,
            fixed_level: r.slice.level,
            repeat: r.repeat,
            method: r.method,
            valid: r.valid,
            reason: r.reason,
            n_test: r.n_test,
            n_finite: r.n_finite,
            rmse: r.metrics.map(|m| m.rmse),
            mae: r.metrics.map(|m| m.mae),
            r2: r.metrics.map(|m| m.r2),
        }
    }
}

impl RunRow {
    fn fields(&self) -> [String; 13] {
        [
            self.regime.label().into(),
            self.output.to_string(),
            self.fixed_axis.label().into(),
            fmt_num(self.fixed_level),
            self.repeat.to_string(),
            self.method.label().into(),
            self.valid.to_string(),
            self.reason.code().into(),
            self.n_test.to_string(),
            self.n_finite.to_string(),
            fmt_opt(self.rmse),
            fmt_opt(self.mae),
            fmt_opt(self.r2),
        ]
    }

    fn parse(rec: &csv::StringRecord) -> Result<Self, String> {
        if rec.len() != RUNS_CSV_HEADER.len() {
            return Err(format!("expected {} fields, got {}", RUNS_CSV_HEADER.len(), rec.len()));
        }
        let int = |i: usize| rec[i].parse::<usize>().map_err(|e| format!("{}: {e}", RUNS_CSV_HEADER[i]));
        Ok(Self {
            regime: Regime::parse(&rec[0]).ok_or_else(|| format!("unknown regime {:?}", &rec[0]))?,
            output: int(1)?,
            fixed_axis: Axis::parse(&rec[2]).ok_or_else(|| format!("unknown axis {:?}", &rec[2]))?,
            fixed_level: rec[3].parse().map_err(|e| format!("fixed_level: {e}"))?,
            repeat: int(4)?,
            method: Method::parse(&rec[5]).ok_or_else(|| format!("unknown method {:?}", &rec[5]))?,
            valid: rec[6].parse().map_err(|e| format!("valid: {e}"))?,
            reason: RunReason::parse(&rec[7]).ok_or_else(|| format!("unknown reason {:?}", &rec[7]))?,
            n_test: int(8)?,
            n_finite: int(9)?,
            rmse: parse_opt(&rec[10])?,
            mae: parse_opt(&rec[11])?,
            r2: parse_opt(&rec[12])?,
        })
    }
}

pub fn write_runs_csv<W: Write>(rows: &[RunRow], w: W) -> Result<(), ReportError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RUNS_CSV_HEADER)?;
    for row in rows {
        out.write_record(row.fields())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_runs_csv<R: Read>(r: R) -> Result<Vec<RunRow>, ReportError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if i == 0 {
            if rec.iter().ne(RUNS_CSV_HEADER) {
                return Err(ReportError::Malformed { line: 1, msg: "unexpected header".into() });
            }
            continue;
        }
        rows.push(RunRow::parse(&rec).map_err(|msg| ReportError::Malformed { line: i + 1, msg })?);
    }
    Ok(rows)
}

/// Aggregate of the valid runs of one (regime, output, method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub regime: Regime,
    pub output: usize,
    pub method: Method,
    pub valid_runs: usize,
    pub mean_rmse: Option<f64>,
    pub mean_mae: Option<f64>,
    pub mean_r2: Option<f64>,
    pub rmse_ci: Option<BootstrapCI>,
    pub r2_ci: Option<BootstrapCI>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Per-(regime, output, method) means over valid runs with percentile
/// bootstrap intervals for RMSE and R².
pub fn summarize(rows: &[RunRow], config: &ExperimentConfig) -> Result<SummaryTable, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::NoRuns);
    }
    let mut groups: BTreeMap<(Regime, usize, Method), Vec<&RunRow>> = BTreeMap::new();
    for row in rows {
        groups.entry((row.regime, row.output, row.method)).or_default().push(row);
    }
    let rows = groups
        .into_iter()
        .map(|((regime, output, method), members)| {
            let valid: Vec<&RunRow> = members.into_iter().filter(|r| r.valid).collect();
            let pick = |f: fn(&RunRow) -> Option<f64>| valid.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let rmse = pick(|r| r.rmse);
            let mae = pick(|r| r.mae);
            let r2 = pick(|r| r.r2);
            let ci = |xs: &[f64], metric: &str| {
                let s = seed::derive_seed(
                    config.random_seed,
                    &[seed::label_key("summary"), regime as u64, output as u64, method as u64, seed::label_key(metric)],
                );
                bootstrap_ci(xs, config.bootstrap_resamples, CI_LEVEL, s)
            };
            SummaryRow {
                regime,
                output,
                method,
                valid_runs: valid.len(),
                mean_rmse: mean(&rmse),
                mean_mae: mean(&mae),
                mean_r2: mean(&r2),
                rmse_ci: ci(&rmse, "rmse"),
                r2_ci: ci(&r2, "r2"),
            }
        })
        .collect();
    Ok(SummaryTable { rows })
}

impl SummaryTable {
    pub fn get(&self, regime: Regime, output: usize, method: Method) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.regime == regime && r.output == output && r.method == method)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), ReportError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SUMMARY_CSV_HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.regime.label().to_string(),
                r.output.to_string(),
                r.method.label().to_string(),
                r.valid_runs.to_string(),
                fmt_opt(r.mean_rmse),
                fmt_opt(r.rmse_ci.map(|c| c.lower)),
                fmt_opt(r.rmse_ci.map(|c| c.upper)),
                fmt_opt(r.mean_mae),
                fmt_opt(r.mean_r2),
                fmt_opt(r.r2_ci.map(|c| c.lower)),
                fmt_opt(r.r2_ci.map(|c| c.upper)),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Fixed-width text rendering for terminals.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<11} {:<8} {:<6} {:>5} {:>9} {:>21} {:>9} {:>21}",
            "Regime", "Output", "Method", "Runs", "RMSE", "RMSE 95% CI", "R2", "R2 95% CI"
        );
        let num = |v: Option<f64>| v.map_or_else(|| NA.to_string(), |x| format!("{x:.3}"));
        let ci =
            |c: Option<BootstrapCI>| c.map_or_else(|| NA.to_string(), |c| format!("[{:.3}, {:.3}]", c.lower, c.upper));
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<11} {:<8} {:<6} {:>5} {:>9} {:>21} {:>9} {:>21}",
                r.regime.label(),
                format!("Output{}", r.output),
                r.method.label(),
                r.valid_runs,
                num(r.mean_rmse),
                ci(r.rmse_ci),
                num(r.mean_r2),
                ci(r.r2_ci),
            );
        }
        s
    }
}

/// Interpolated values on a uniform grid; `None` marks undefined cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Row-major over `(u, v)`: index `i * v.len() + j`.
    pub values: Vec<Option<f64>>,
}

impl SurfaceGrid {
    pub fn at(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.v.len() + j]
    }

    pub fn write_csv<W: Write>(&self, w: W, axes: [&str; 2]) -> Result<(), ReportError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([axes[0], axes[1], "value"])?;
        for (i, &u) in self.u.iter().enumerate() {
            for (j, &v) in self.v.iter().enumerate() {
                out.write_record([fmt_num(u), fmt_num(v), fmt_opt(self.at(i, j))])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// Fits `method` to all of `points` and evaluates it on a
/// `resolution × resolution` grid over their bounding box.
pub fn surface_grid(
    points: &PointSet2,
    values: &[f64],
    method: Method,
    rbf: &RbfConfig,
    resolution: usize,
) -> Result<SurfaceGrid, ReportError> {
    let (lo, hi) = crate::geometry::bounds(points.points());
    let u = linspace(lo.u, hi.u, resolution);
    let v = linspace(lo.v, hi.v, resolution);
    let eval: Box<dyn Fn(Point2) -> Option<f64>> = match method {
        Method::Cubic => {
            let s = fit_cubic(points, values)
                .map_err(|e| ReportError::Fit { reason: RunReason::from_cubic(&e), msg: e.to_string() })?;
            Box::new(move |q| s.eval(q))
        }
        Method::Rbf => {
            let s = fit_rbf(points, values, rbf)
                .map_err(|e| ReportError::Fit { reason: RunReason::from_rbf(&e), msg: e.to_string() })?;
            Box::new(move |q| Some(s.eval(q)).filter(|z| z.is_finite()))
        }
    };
    let values = u.iter().flat_map(|&a| v.iter().map(move |&b| Point2::new(a, b))).map(&eval).collect();
    Ok(SurfaceGrid { u, v, values })
}

/// Which slice to export as a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceSelection {
    pub regime: Regime,
    pub output: usize,
    pub axis: Axis,
    pub level_index: usize,
}

/// Surface grid of one dataset slice, fitted on every node of the slice.
pub fn export_surface_grid(
    dataset: &FactorialDataset,
    selection: SliceSelection,
    method: Method,
    config: &ExperimentConfig,
) -> Result<(SurfaceGrid, [Axis; 2]), ReportError> {
    let task = enumerate_slices(dataset, selection.regime)
        .into_iter()
        .find(|t| {
            t.output == selection.output
                && t.slice.axis == selection.axis
                && t.slice.level_index == selection.level_index
        })
        .ok_or(ReportError::UnknownSlice { axis: selection.axis, level_index: selection.level_index })?;
    let grid = surface_grid(&task.points, &task.targets, method, &config.rbf(), config.grid_resolution)?;
    Ok((grid, task.free_axes))
}

/// Writes `(y_true, y_pred)` pairs of the selected valid records.
/// Invalid records and undefined predictions are skipped.
pub fn export_pred_vs_true<'a, W: Write>(
    records: impl IntoIterator<Item = &'a RunRecord>,
    w: W,
) -> Result<usize, ReportError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PRED_CSV_HEADER)?;
    let mut n = 0;
    for rec in records {
        if !rec.valid {
            log::info!(
                "excluding invalid {} run {} {} output {} repeat {} ({})",
                rec.method,
                rec.regime,
                rec.slice,
                rec.output,
                rec.repeat,
                rec.reason
            );
            continue;
        }
        for &(t, p) in rec.predictions.iter().filter(|(_, p)| p.is_finite()) {
            out.write_record([
                rec.regime.label().to_string(),
                rec.output.to_string(),
                rec.slice.to_string(),
                rec.repeat.to_string(),
                rec.method.label().to_string(),
                fmt_num(t),
                fmt_num(p),
            ])?;
            n += 1;
        }
    }
    out.flush()?;
    Ok(n)
}

/// Run metadata written alongside the artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub tool_version: String,
    pub config_hash: String,
    pub runtime_seconds: f64,
    pub n_records: usize,
    pub files: Vec<String>,
}

/// Writes the full artifact set of an experiment into `outdir`.
pub fn write_artifacts(
    outdir: &Path,
    dataset: &FactorialDataset,
    records: &[RunRecord],
    config: &ExperimentConfig,
    runtime: Duration,
) -> Result<RunMeta, ReportError> {
    std::fs::create_dir_all(outdir)?;
    let path = |name: &str| -> PathBuf { outdir.join(name) };
    let mut files = Vec::new();

    dataset.write_csv(std::io::BufWriter::new(std::fs::File::create(path("dataset.csv"))?))?;
    files.push("dataset.csv".to_string());

    let rows: Vec<RunRow> = records.iter().map(RunRow::from).collect();
    write_runs_csv(&rows, std::fs::File::create(path("runs.csv"))?)?;
    files.push("runs.csv".to_string());

    summarize(&rows, config)?.write_csv(std::fs::File::create(path("summary.csv"))?)?;
    files.push("summary.csv".to_string());

    std::fs::write(path("settings.csv"), config.to_settings_csv())?;
    files.push("settings.csv".to_string());

    export_pred_vs_true(records, std::io::BufWriter::new(std::fs::File::create(path("pred_vs_true.csv"))?))?;
    files.push("pred_vs_true.csv".to_string());

    let meta = RunMeta {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        runtime_seconds: runtime.as_secs_f64(),
        n_records: records.len(),
        files,
    };
    std::fs::write(path("meta.json"), serde_json::to_string_pretty(&meta).expect("meta serializes"))?;
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: Method, valid: bool, rmse: Option<f64>) -> RunRow {
        RunRow {
            regime: Regime::Noisy,
            output: 2,
            fixed_axis: Axis::X3,
            fixed_level: 2.0,
            repeat: 0,
            method,
            valid,
            reason: if valid { RunReason::Ok } else { RunReason::TooFewFinite },
            n_test: 5,
            n_finite: if valid { 5 } else { 1 },
            rmse,
            mae: rmse.map(|r| r / 2.0),
            r2: rmse.map(|r| 1.0 - r),
        }
    }

    #[test]
    fn summary_means_and_counts() {
        let rows = vec![
            row(Method::Cubic, true, Some(1.0)),
            row(Method::Cubic, true, Some(2.0)),
            row(Method::Cubic, true, Some(3.0)),
            row(Method::Cubic, false, None),
            row(Method::Rbf, false, None),
        ];
        let table = summarize(&rows, &ExperimentConfig::default()).unwrap();
        assert_eq!(table.rows.len(), 2);
        let c = table.get(Regime::Noisy, 2, Method::Cubic).unwrap();
        assert_eq!(c.valid_runs, 3);
        assert_eq!(c.mean_rmse, Some(2.0));
        let ci = c.rmse_ci.unwrap();
        assert!(1.0 <= ci.lower && ci.lower <= ci.upper && ci.upper <= 3.0);
        let r = table.get(Regime::Noisy, 2, Method::Rbf).unwrap();
        assert_eq!((r.valid_runs, r.mean_rmse, r.rmse_ci), (0, None, None));

        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), SUMMARY_CSV_HEADER.join(","));
        assert!(text.lines().nth(2).unwrap().starts_with("noisy,2,rbf,0,NA"));
        assert!(table.render().contains("Output2"));
    }

    #[test]
    fn empty_run_table_is_an_error() {
        assert!(matches!(summarize(&[], &ExperimentConfig::default()), Err(ReportError::NoRuns)));
    }

    #[test]
    fn runs_csv_round_trip() {
        let rows = vec![row(Method::Cubic, true, Some(0.125)), row(Method::Rbf, false, None)];
        let mut buf = Vec::new();
        write_runs_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), RUNS_CSV_HEADER.join(","));
        assert!(text.contains("noisy,2,X3,2,0,rbf,false,too_few_finite,5,1,NA,NA,NA"));
        assert_eq!(read_runs_csv(buf.as_slice()).unwrap(), rows);
        assert!(matches!(read_runs_csv("a,b\n".as_bytes()), Err(ReportError::Malformed { line: 1, .. })));
    }

    #[test]
    fn grids_mark_undefined_cells() {
        let pts = PointSet2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.3, 0.3),
        ])
        .unwrap();
        let vals: Vec<f64> = pts.points().iter().map(|p| 1.0 + 2.0 * p.u - p.v).collect();
        let cubic = surface_grid(&pts, &vals, Method::Cubic, &RbfConfig::default(), 50).unwrap();
        let rbf = surface_grid(&pts, &vals, Method::Rbf, &RbfConfig::default(), 50).unwrap();
        assert_eq!(cubic.values.len(), 2500);
        assert_eq!(cubic.at(49, 49), None);
        assert!(cubic.values.iter().any(Option::is_none));
        assert!(rbf.values.iter().all(Option::is_some));
        for (i, &u) in cubic.u.iter().enumerate() {
            for (j, &v) in cubic.v.iter().enumerate() {
                let want = 1.0 + 2.0 * u - v;
                assert!((rbf.at(i, j).unwrap() - want).abs() < 1e-8);
                if let Some(z) = cubic.at(i, j) {
                    assert!((z - want).abs() < 1e-8);
                }
            }
        }
        let mut buf = Vec::new();
        cubic.write_csv(&mut buf, ["X1", "X2"]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("X1,X2,value\n"));
        assert!(text.trim_end().ends_with(",NA"));
    }
}

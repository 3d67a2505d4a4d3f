//! On-disk experiment output.
//!
//! A run directory holds:
//!
//! * `<name>.csv`: header `t,mean,stderr,weight_var,n_eff`, one row per
//!   recorded time, every value in scientific notation with 17
//!   significant digits (`{:.16e}`);
//! * `<name>.conf`: the resolved configuration in key-value form; rerunning
//!   it reproduces the CSV byte for byte;
//! * `metadata.json`: resolved configuration, code version, wall time and
//!   transition statistics;
//! * `hops.csv` (optional): every accepted transition;
//! * `comparison.csv` (compare mode): weight-variance ratio per time.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{RunConfig, SchemeKind};
use crate::engine::{Engine, EnsembleResult, HopStats};
use crate::error::{Error, Result};
use crate::estimator::ObservableSeries;

pub const CSV_HEADER: &str = "t,mean,stderr,weight_var,n_eff";
pub const COMPARISON_HEADER: &str =
    "t,weight_var_primitive,weight_var_energy_conserving,weight_var_ratio";

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SSTP_OUTPUT_DIR";

#[derive(Debug, Clone, Default)]
pub struct ExperimentOptions {
    /// Run both schemes on identical bath draws and random streams.
    pub compare: bool,
    /// Write `hops.csv`.
    pub hop_log: bool,
    /// In compare mode, stop the primitive run at this time.
    pub primitive_t_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scheme: String,
    pub csv: String,
    pub config: RunConfig,
    pub n_traj: usize,
    pub n_used: usize,
    pub n_non_finite: usize,
    pub n_over_cap: usize,
    pub hop_stats: HopStats,
    pub max_weight_final: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub code_version: String,
    pub config: RunConfig,
    pub resolved_config: String,
    pub runs: Vec<RunSummary>,
    pub wall_time_s: f64,
}

/// Everything an experiment produced, for callers that want the numbers
/// without rereading the files.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub metadata: Metadata,
    pub results: Vec<(SchemeKind, EnsembleResult)>,
    pub comparison: Option<Vec<(f64, f64, f64, f64)>>,
}

pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders an observable table in the CSV schema.
pub fn series_csv(series: &ObservableSeries) -> String {
    let mut out = String::with_capacity(96 * (series.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..series.len() {
        let row = [
            series.times[k],
            series.mean[k],
            series.stderr[k],
            series.weight_var[k],
            series.n_effective[k],
        ];
        let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses a CSV produced by [`series_csv`].
pub fn parse_series_csv(text: &str) -> Result<ObservableSeries> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header.trim() != CSV_HEADER {
        return Err(Error::invalid(
            "csv",
            format!("expected header `{CSV_HEADER}`, got `{header}`"),
        ));
    }
    let mut s = ObservableSeries {
        times: vec![],
        mean: vec![],
        stderr: vec![],
        weight_var: vec![],
        n_effective: vec![],
    };
    for (i, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::invalid("csv", format!("row {} is not numeric", i + 2)))?;
        if vals.len() != 5 {
            return Err(Error::invalid("csv", format!("row {} has {} columns", i + 2, vals.len())));
        }
        s.times.push(vals[0]);
        s.mean.push(vals[1]);
        s.stderr.push(vals[2]);
        s.weight_var.push(vals[3]);
        s.n_effective.push(vals[4]);
    }
    Ok(s)
}

fn hop_log_csv(result: &EnsembleResult) -> String {
    let mut out = String::from("traj,initial_pair,step,side,target,energy_residual\n");
    if let Some(logs) = &result.hop_logs {
        for (traj, pair, events) in logs {
            for e in events {
                out.push_str(&format!(
                    "{traj},{}{},{},{:?},{},{}\n",
                    pair.ket.index(),
                    pair.bra.index(),
                    e.step,
                    e.side,
                    e.target.index(),
                    format_value(e.energy_residual)
                ));
            }
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

fn run_one(
    config: &RunConfig,
    dir: &Path,
    name: &str,
    hop_log: bool,
) -> Result<(RunSummary, EnsembleResult)> {
    let start = Instant::now();
    let engine = Engine::new(config)?;
    let result = engine.run_ensemble(hop_log);
    let wall = start.elapsed().as_secs_f64();

    let csv_name = format!("{name}.csv");
    write_file(&dir.join(&csv_name), &series_csv(&result.series))?;
    write_file(&dir.join(format!("{name}.conf")), &config.to_kv_string())?;
    if hop_log {
        write_file(&dir.join(format!("{name}.hops.csv")), &hop_log_csv(&result))?;
    }
    let summary = RunSummary {
        scheme: config.scheme.name().to_string(),
        csv: csv_name,
        config: config.clone(),
        n_traj: result.n_traj,
        n_used: result.n_used,
        n_non_finite: result.n_non_finite,
        n_over_cap: result.n_over_cap,
        hop_stats: result.stats,
        max_weight_final: result.max_weight.last().copied().unwrap_or(0.0),
        wall_time_s: wall,
    };
    Ok((summary, result))
}

/// Runs the configured experiment and writes its files into `dir`.
///
/// Returns [`Error::NumericFailure`] after writing everything if any
/// trajectory produced a non-finite weight.
pub fn run_experiment(
    config: &RunConfig,
    dir: &Path,
    options: &ExperimentOptions,
) -> Result<ExperimentOutput> {
    config.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let start = Instant::now();

    let mut runs = Vec::new();
    let mut results = Vec::new();
    let mut comparison = None;
    if options.compare {
        let mut prim_cfg = config.with_scheme(SchemeKind::Primitive);
        if let Some(t) = options.primitive_t_max {
            prim_cfg.t_max = t.min(config.t_max);
            prim_cfg.validate()?;
        }
        let ec_cfg = config.with_scheme(SchemeKind::EnergyConserving);
        let (ps, pr) = run_one(&prim_cfg, dir, SchemeKind::Primitive.name(), options.hop_log)?;
        let (es, er) = run_one(&ec_cfg, dir, SchemeKind::EnergyConserving.name(), options.hop_log)?;
        let rows = comparison_rows(&pr.series, &er.series);
        let mut text = String::from(COMPARISON_HEADER);
        text.push('\n');
        for (t, a, b, r) in &rows {
            text.push_str(&format!(
                "{},{},{},{}\n",
                format_value(*t),
                format_value(*a),
                format_value(*b),
                format_value(*r)
            ));
        }
        write_file(&dir.join("comparison.csv"), &text)?;
        comparison = Some(rows);
        runs.push(ps);
        runs.push(es);
        results.push((SchemeKind::Primitive, pr));
        results.push((SchemeKind::EnergyConserving, er));
    } else {
        let (s, r) = run_one(config, dir, "observable", options.hop_log)?;
        runs.push(s);
        results.push((config.scheme, r));
    }

    let metadata = Metadata {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        resolved_config: config.to_kv_string(),
        runs,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&metadata)?;
    write_file(&dir.join("metadata.json"), &json)?;

    let failures: usize = metadata.runs.iter().map(|r| r.n_non_finite).sum();
    if failures > 0 {
        return Err(Error::NumericFailure(failures));
    }
    Ok(ExperimentOutput {
        metadata,
        results,
        comparison,
    })
}

/// `(t, var_primitive, var_energy_conserving, ratio)` over the common times.
pub fn comparison_rows(
    primitive: &ObservableSeries,
    conserving: &ObservableSeries,
) -> Vec<(f64, f64, f64, f64)> {
    primitive
        .times
        .iter()
        .zip(&primitive.weight_var)
        .zip(conserving.times.iter().zip(&conserving.weight_var))
        .map(|((&t, &a), (_, &b))| (t, a, b, a / b))
        .collect()
}

/// Default output directory: `$SSTP_OUTPUT_DIR`, else `./sstp-out`.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("sstp-out"))
}

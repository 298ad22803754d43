//! The CLI subcommands, callable as library functions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::config::{load_config, Algorithm, ExperimentConfig};
use crate::error::{BenchError, Result};
use crate::experiment::{
    hole_family, run_alpha_sweep, run_hole_scaling, run_oracle, ExperimentRow, OracleReport,
    Prepared, Run, SurfaceOutcome, SweepOutcome,
};
use crate::report::{
    ensure_dir, read_rows, write_classes, write_oracle_classes, write_paths, write_rows,
    write_surfaces, write_text, write_timings, write_trace,
};
use crate::svg::{Chart, Series};

/// Output file, axis label, metric and whether to use a log scale.
type Metric = (&'static str, &'static str, fn(&ExperimentRow) -> f64, bool);

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub seed: Option<u64>,
    /// Write per-pop traces (sweep only).
    pub trace: bool,
    /// Record measured wall times in `rows.csv` instead of 0.
    pub wall_time: bool,
}

impl Overrides {
    fn apply(&self, mut config: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(out) = &self.out {
            config.output_dir = out.to_string_lossy().into_owned();
        }
        if let Some(algorithms) = &self.algorithms {
            config.algorithms = algorithms.clone();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

fn load(config: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    overrides.apply(load_config(config)?)
}

pub const SWEEP_ID: &str = "sweep";
pub const ORACLE_ID: &str = "oracle";

pub struct SweepReport {
    pub prepared: Prepared,
    pub outcome: SweepOutcome,
    pub rows: Vec<ExperimentRow>,
    pub out_dir: PathBuf,
}

pub fn sweep(config: &Path, overrides: &Overrides) -> Result<SweepReport> {
    let config = load(config, overrides)?;
    let out_dir = config.output_path();
    let algorithms = config.algorithms.clone();
    let prepared = Prepared::new(config)?;
    let outcome = run_alpha_sweep(&prepared, &algorithms, overrides.trace)?;
    let rows = outcome.rows(SWEEP_ID, overrides.wall_time);

    ensure_dir(&out_dir)?;
    write_rows(&out_dir.join("rows.csv"), &rows)?;
    write_paths(
        &out_dir.join("paths.json"),
        outcome.runs.iter().map(|r| (SWEEP_ID, r)),
    )?;
    write_timings(
        &out_dir.join("timings.csv"),
        outcome.runs.iter().map(|r| (SWEEP_ID, r)),
    )?;
    write_text(&out_dir.join("surface.json"), &prepared.surface.to_json()?)?;
    write_text(&out_dir.join("basis.json"), &prepared.basis.to_json()?)?;
    if let Some(classes) = &outcome.blk_classes {
        write_classes(&out_dir.join("classes.csv"), classes)?;
    }
    if overrides.trace {
        let dir = out_dir.join("traces");
        ensure_dir(&dir)?;
        for (i, run) in outcome.runs.iter().enumerate() {
            write_trace(&dir, &format!("{i:03}_{}", run.algorithm), run)?;
        }
    }
    write_charts(&out_dir, &sweep_charts(&rows))?;
    Ok(SweepReport {
        prepared,
        outcome,
        rows,
        out_dir,
    })
}

pub struct HolesReport {
    pub surfaces: Vec<SurfaceOutcome>,
    pub rows: Vec<ExperimentRow>,
    pub out_dir: PathBuf,
}

/// Runs the family made of the first 1, 2, …, n holes of the config.
pub fn holes(config: &Path, overrides: &Overrides) -> Result<HolesReport> {
    let config = load(config, overrides)?;
    if config.holes.is_empty() {
        return Err(BenchError::invalid(
            "holes",
            "a hole-scaling family needs at least one hole",
        ));
    }
    let out_dir = config.output_path();
    let surfaces = run_hole_scaling(&hole_family(&config), &config.algorithms)?;
    let labelled: Vec<(&str, &Run)> = surfaces
        .iter()
        .flat_map(|s| s.best.iter().map(move |r| (s.experiment_id.as_str(), r)))
        .collect();
    let rows: Vec<ExperimentRow> = labelled
        .iter()
        .map(|(id, r)| ExperimentRow::from_run(id, r, overrides.wall_time))
        .collect();

    ensure_dir(&out_dir)?;
    write_rows(&out_dir.join("rows.csv"), &rows)?;
    write_paths(&out_dir.join("paths.json"), labelled.iter().copied())?;
    write_timings(&out_dir.join("timings.csv"), labelled.iter().copied())?;
    write_surfaces(&out_dir.join("surfaces.csv"), &surfaces)?;
    for s in &surfaces {
        if let Some(classes) = &s.blk_classes {
            write_classes(
                &out_dir.join(format!("classes_{}.csv", s.experiment_id)),
                classes,
            )?;
        }
    }
    write_charts(&out_dir, &holes_charts(&rows))?;
    Ok(HolesReport {
        surfaces,
        rows,
        out_dir,
    })
}

pub struct OracleCommandReport {
    pub prepared: Prepared,
    pub report: OracleReport,
    pub rows: Vec<ExperimentRow>,
    pub out_dir: PathBuf,
}

/// Brute-force cross-check; only for surfaces small enough to enumerate.
pub fn oracle(config: &Path, overrides: &Overrides) -> Result<OracleCommandReport> {
    let config = load(config, overrides)?;
    let out_dir = config.output_path();
    let algorithms = config.algorithms.clone();
    let prepared = Prepared::new(config)?;
    let report = run_oracle(&prepared, &algorithms)?;
    let rows = report.sweep.rows(ORACLE_ID, overrides.wall_time);

    ensure_dir(&out_dir)?;
    write_rows(&out_dir.join("rows.csv"), &rows)?;
    write_oracle_classes(&out_dir.join("oracle_classes.csv"), &report.table)?;
    write_classes(&out_dir.join("classes.csv"), &report.blk_records)?;
    write_text(&out_dir.join("surface.json"), &prepared.surface.to_json()?)?;
    write_text(&out_dir.join("basis.json"), &prepared.basis.to_json()?)?;
    Ok(OracleCommandReport {
        prepared,
        report,
        rows,
        out_dir,
    })
}

/// Redraws the charts of an output directory from its `rows.csv`.
pub fn plot(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let path = out_dir.join("rows.csv");
    if !path.is_file() {
        return Err(BenchError::Read {
            path,
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no rows.csv in the output directory",
            ),
        });
    }
    let rows = read_rows(&path)?;
    let (scaling, per_alpha): (Vec<ExperimentRow>, Vec<ExperimentRow>) = rows
        .into_iter()
        .partition(|r| hole_count(&r.experiment_id).is_some());
    let mut charts = sweep_charts(&per_alpha);
    charts.extend(holes_charts(&scaling));
    write_charts(out_dir, &charts)?;
    Ok(charts
        .into_iter()
        .map(|(name, _)| out_dir.join(name))
        .collect())
}

fn write_charts(dir: &Path, charts: &[(String, Chart)]) -> Result<()> {
    for (name, chart) in charts {
        write_text(&dir.join(name), &chart.render())?;
    }
    Ok(())
}

fn hole_count(experiment_id: &str) -> Option<usize> {
    experiment_id.strip_prefix("holes-")?.parse().ok()
}

fn series_by_algorithm(
    rows: &[ExperimentRow],
    point: impl Fn(&ExperimentRow) -> Option<(f64, f64)>,
) -> Vec<Series> {
    let mut grouped: BTreeMap<Algorithm, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        if let Some(p) = point(r) {
            grouped.entry(r.algorithm).or_default().push(p);
        }
    }
    grouped
        .into_iter()
        .map(|(a, mut points)| {
            points.sort_by(|x, y| x.0.total_cmp(&y.0));
            Series {
                name: a.label().to_string(),
                points,
            }
        })
        .collect()
}

/// Path length, projection difference and visits against α.
pub fn sweep_charts(rows: &[ExperimentRow]) -> Vec<(String, Chart)> {
    if rows.is_empty() {
        return Vec::new();
    }
    let metrics: [Metric; 3] = [
        (
            "length_vs_alpha.svg",
            "path length",
            |r| r.path_length,
            false,
        ),
        (
            "proj_diff_vs_alpha.svg",
            "projection difference",
            |r| r.proj_diff,
            false,
        ),
        (
            "visits_vs_alpha.svg",
            "nodes visited",
            |r| r.nodes_visited as f64,
            true,
        ),
    ];
    metrics
        .into_iter()
        .map(|(file, label, metric, log_y)| {
            let chart = Chart {
                title: format!("{label} vs α"),
                x_label: "α".into(),
                y_label: label.into(),
                log_y,
                series: series_by_algorithm(rows, |r| Some((r.alpha, metric(r)))),
            };
            (file.to_string(), chart)
        })
        .collect()
}

/// Best path length and visits against the number of holes.
pub fn holes_charts(rows: &[ExperimentRow]) -> Vec<(String, Chart)> {
    if rows.is_empty() {
        return Vec::new();
    }
    let metrics: [Metric; 2] = [
        (
            "length_vs_holes.svg",
            "path length",
            |r| r.path_length,
            false,
        ),
        (
            "visits_vs_holes.svg",
            "nodes visited",
            |r| r.nodes_visited as f64,
            true,
        ),
    ];
    metrics
        .into_iter()
        .map(|(file, label, metric, log_y)| {
            let chart = Chart {
                title: format!("{label} vs number of holes"),
                x_label: "holes".into(),
                y_label: label.into(),
                log_y,
                series: series_by_algorithm(rows, |r| {
                    Some((hole_count(&r.experiment_id)? as f64, metric(r)))
                }),
            };
            (file.to_string(), chart)
        })
        .collect()
}

//! CSV and JSON output files.

use std::fs;
use std::path::Path;

use hstar_core::blk::ClassRecord;
use hstar_core::oracle::ClassTable;
use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::experiment::{ExperimentRow, Run, SurfaceOutcome, Trace};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| BenchError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_records<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| BenchError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// `rows.csv`; the header is written even when there are no rows.
pub fn write_rows(path: &Path, rows: &[ExperimentRow]) -> Result<()> {
    if rows.is_empty() {
        let header = "experiment_id,algorithm,alpha,path_length,proj_diff,nodes_visited,class_key,wall_time_seconds\n";
        return write_text(path, header);
    }
    write_records(path, rows)
}

pub fn read_rows(path: &Path) -> Result<Vec<ExperimentRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Serialize)]
struct ClassRow {
    discovery_rank: usize,
    signature_key: String,
    shortest_length: f64,
}

/// BLK class records: `discovery_rank, signature_key, shortest_length`.
pub fn write_classes(path: &Path, records: &[ClassRecord]) -> Result<()> {
    write_records(
        path,
        records.iter().map(|r| ClassRow {
            discovery_rank: r.discovery_rank,
            signature_key: r.signature_key.to_string(),
            shortest_length: r.shortest_length,
        }),
    )
}

#[derive(Serialize)]
struct OracleClassRow {
    signature_key: String,
    shortest_length: f64,
    member_count: usize,
    representative: String,
}

pub fn write_oracle_classes(path: &Path, table: &ClassTable) -> Result<()> {
    write_records(
        path,
        table.classes.iter().map(|(k, c)| OracleClassRow {
            signature_key: k.to_string(),
            shortest_length: c.shortest_length,
            member_count: c.member_count,
            representative: c
                .representative
                .nodes()
                .iter()
                .map(|v| v.index().to_string())
                .collect::<Vec<_>>()
                .join(" "),
        }),
    )
}

#[derive(Serialize)]
struct PathEntry<'a> {
    id: usize,
    experiment_id: &'a str,
    algorithm: &'a str,
    alpha: f64,
    class_key: String,
    path: &'a hstar_core::path::Path,
}

/// `paths.json`: the path of every row, with `id` equal to the row index.
pub fn write_paths<'a>(
    path: &Path,
    runs: impl IntoIterator<Item = (&'a str, &'a Run)>,
) -> Result<()> {
    let entries: Vec<PathEntry> = runs
        .into_iter()
        .enumerate()
        .map(|(id, (experiment_id, run))| PathEntry {
            id,
            experiment_id,
            algorithm: run.algorithm.name(),
            alpha: run.alpha,
            class_key: run.class_key.to_string(),
            path: &run.result.path,
        })
        .collect();
    write_json(path, &entries)
}

#[derive(Serialize)]
struct TimingRow<'a> {
    experiment_id: &'a str,
    algorithm: &'a str,
    alpha: f64,
    wall_time_seconds: f64,
}

/// Measured wall times, kept apart from `rows.csv` so that file stays
/// reproducible.
pub fn write_timings<'a>(
    path: &Path,
    runs: impl IntoIterator<Item = (&'a str, &'a Run)>,
) -> Result<()> {
    write_records(
        path,
        runs.into_iter().map(|(experiment_id, r)| TimingRow {
            experiment_id,
            algorithm: r.algorithm.name(),
            alpha: r.alpha,
            wall_time_seconds: r.wall_time_seconds,
        }),
    )
}

/// Writes the trace of `run`, if it has one, as `<stem>.csv`.
pub fn write_trace(dir: &Path, stem: &str, run: &Run) -> Result<()> {
    let path = dir.join(format!("{stem}.csv"));
    match &run.trace {
        Some(Trace::Search(records)) => write_records(&path, records),
        Some(Trace::Rollout(records)) => write_records(&path, records),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct SurfaceRow<'a> {
    experiment_id: &'a str,
    holes: usize,
    vertices: usize,
    reference_key: String,
    blk_classes: Option<usize>,
}

/// One line per surface of a hole-scaling family.
pub fn write_surfaces(path: &Path, outcomes: &[SurfaceOutcome]) -> Result<()> {
    write_records(
        path,
        outcomes.iter().map(|o| SurfaceRow {
            experiment_id: &o.experiment_id,
            holes: o.holes,
            vertices: o.vertices,
            reference_key: o.target_key.to_string(),
            blk_classes: o.blk_classes.as_ref().map(Vec::len),
        }),
    )
}

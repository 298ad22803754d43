//! Experiment orchestration: α sweeps, hole-count scaling and the
//! brute-force cross-check on tiny surfaces.
//!
//! Independent runs are evaluated in parallel; results are always collected
//! in job order so the emitted rows do not depend on scheduling.

use std::time::Instant;

use hstar_core::blk::{blk_enumerate_classes, blk_search, ClassRecord, SignatureKey, WindingBound};
use hstar_core::complex::{build_grid_complex, SimplicialSurface, VertexId};
use hstar_core::homology::{
    hole_loop_values, path_projection, surface_harmonic_basis, HarmonicBasis, Projection,
};
use hstar_core::hstar::{hstar_search, hstar_search_traced, SearchResult, TraceRecord};
use hstar_core::oracle::{enumerate_classes, ClassTable, MAX_ORACLE_VERTICES};
use hstar_core::path::{reference_from_keypoints, Keypoints, Path};
use hstar_core::rollout::{default_epsilon, rollout, RolloutOptions, RolloutTraceRecord};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{BenchError, Result};

/// A config resolved against its surface.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub surface: SimplicialSurface,
    pub basis: HarmonicBasis,
    pub source: VertexId,
    pub dest: VertexId,
    pub reference: Path,
    pub target: Projection,
    pub target_key: SignatureKey,
    /// PRH* pruning tolerance actually used.
    pub epsilon: f64,
}

impl Prepared {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let field = if config.holes.is_empty() {
            "grid"
        } else {
            "holes"
        };
        let surface = build_grid_complex(&config.grid, &config.holes)
            .map_err(|e| BenchError::invalid(field, e.to_string()))?;
        let mut waypoints = Vec::new();
        for (i, [col, row]) in config.waypoints().into_iter().enumerate() {
            let v = surface
                .find_vertex(config.grid.position(col, row))
                .ok_or_else(|| {
                    let field = match i {
                        0 => "source".to_string(),
                        i if i == config.keypoints.len() + 1 => "dest".to_string(),
                        i => format!("keypoints[{}]", i - 1),
                    };
                    BenchError::invalid(field, format!("[{col}, {row}] was removed with a hole"))
                })?;
            waypoints.push(v);
        }
        let basis = surface_harmonic_basis(&surface)?;
        let reference = reference_from_keypoints(&surface, &Keypoints::new(waypoints.clone())?)?;
        let target = path_projection(&surface, &basis, &reference)?;
        let epsilon = match config.epsilon {
            Some(eps) => eps,
            None => default_epsilon(&surface, &basis, &reference)?,
        };
        Ok(Self {
            source: waypoints[0],
            dest: *waypoints.last().expect("at least two waypoints"),
            target_key: SignatureKey::of(target.values()),
            config,
            surface,
            basis,
            reference,
            target,
            epsilon,
        })
    }

    pub fn class_key(&self, path: &Path) -> Result<SignatureKey> {
        Ok(SignatureKey::of(
            path_projection(&self.surface, &self.basis, path)?.values(),
        ))
    }
}

/// Per-pop trace of one run.
#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    Search(Vec<TraceRecord>),
    Rollout(Vec<RolloutTraceRecord>),
}

/// Outcome of one algorithm at one α.
#[derive(Debug, Clone)]
pub struct Run {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub result: SearchResult,
    pub class_key: SignatureKey,
    pub wall_time_seconds: f64,
    pub trace: Option<Trace>,
}

impl Run {
    /// `W + α·Δγ` at this run's α.
    pub fn total_cost(&self) -> f64 {
        self.result.length + self.alpha * self.result.proj_diff
    }

    pub fn is_homologous(&self, target: &SignatureKey) -> bool {
        &self.class_key == target
    }
}

/// One line of `rows.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub experiment_id: String,
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub path_length: f64,
    pub proj_diff: f64,
    pub nodes_visited: usize,
    pub class_key: String,
    pub wall_time_seconds: f64,
}

impl ExperimentRow {
    pub fn from_run(experiment_id: &str, run: &Run, record_wall_time: bool) -> Self {
        Self {
            experiment_id: experiment_id.to_string(),
            algorithm: run.algorithm,
            alpha: run.alpha,
            path_length: run.result.length,
            proj_diff: run.result.proj_diff,
            nodes_visited: run.result.visited_count,
            class_key: run.class_key.to_string(),
            wall_time_seconds: if record_wall_time {
                run.wall_time_seconds
            } else {
                0.0
            },
        }
    }

    pub fn total_cost(&self) -> f64 {
        self.path_length + self.alpha * self.proj_diff
    }
}

/// Runs H*, RH* or PRH* at one α. BLK is α-independent; see [`run_blk`].
pub fn run_search(p: &Prepared, algorithm: Algorithm, alpha: f64, trace: bool) -> Result<Run> {
    let start = Instant::now();
    let (result, trace) = match algorithm {
        Algorithm::Hstar if trace => {
            let (r, t) =
                hstar_search_traced(&p.surface, &p.basis, p.source, p.dest, &p.reference, alpha)?;
            (r, Some(Trace::Search(t)))
        }
        Algorithm::Hstar => (
            hstar_search(&p.surface, &p.basis, p.source, p.dest, &p.reference, alpha)?,
            None,
        ),
        Algorithm::Rhstar | Algorithm::Prhstar => {
            let epsilon = (algorithm == Algorithm::Prhstar).then_some(p.epsilon);
            let options = RolloutOptions {
                epsilon,
                stage_limit: None,
                trace,
            };
            let out = rollout(
                &p.surface,
                &p.basis,
                p.source,
                p.dest,
                &p.reference,
                alpha,
                options,
            )?;
            (out.result, trace.then_some(Trace::Rollout(out.pop_trace)))
        }
        Algorithm::Blk => return Err(BenchError::Check("BLK has no α; use run_blk".into())),
    };
    let wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(Run {
        algorithm,
        alpha,
        class_key: p.class_key(&result.path)?,
        result,
        wall_time_seconds,
        trace,
    })
}

/// Exact BLK run, with the classes it discovered before the target.
pub fn run_blk(p: &Prepared) -> Result<(Run, Vec<ClassRecord>)> {
    let start = Instant::now();
    let out = blk_search(&p.surface, &p.basis, p.source, p.dest, &p.reference)?;
    let wall_time_seconds = start.elapsed().as_secs_f64();
    let run = Run {
        algorithm: Algorithm::Blk,
        alpha: 0.0,
        class_key: p.class_key(&out.result.path)?,
        result: out.result,
        wall_time_seconds,
        trace: None,
    };
    Ok((run, out.classes))
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Grouped by algorithm in the requested order, then by α.
    pub runs: Vec<Run>,
    /// Classes BLK discovered before the target, when BLK was requested.
    pub blk_classes: Option<Vec<ClassRecord>>,
}

impl SweepOutcome {
    pub fn rows(&self, experiment_id: &str, record_wall_time: bool) -> Vec<ExperimentRow> {
        self.runs
            .iter()
            .map(|r| ExperimentRow::from_run(experiment_id, r, record_wall_time))
            .collect()
    }

    pub fn runs_of(&self, algorithm: Algorithm) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(move |r| r.algorithm == algorithm)
    }
}

/// Every algorithm at every configured α. The single BLK run is repeated
/// once per α so each algorithm has one row per α.
pub fn run_alpha_sweep(
    p: &Prepared,
    algorithms: &[Algorithm],
    trace: bool,
) -> Result<SweepOutcome> {
    let alphas = &p.config.alphas;
    let jobs: Vec<(Algorithm, f64)> = algorithms
        .iter()
        .filter(|a| **a != Algorithm::Blk)
        .flat_map(|&a| alphas.iter().map(move |&alpha| (a, alpha)))
        .collect();
    let mut searched: Vec<Run> = jobs
        .par_iter()
        .map(|&(a, alpha)| run_search(p, a, alpha, trace))
        .collect::<Result<_>>()?;
    let blk = if algorithms.contains(&Algorithm::Blk) {
        Some(run_blk(p)?)
    } else {
        None
    };

    let mut runs = Vec::with_capacity(algorithms.len() * alphas.len());
    let mut blk_classes = None;
    let mut searched = searched.drain(..);
    for &algorithm in algorithms {
        if algorithm == Algorithm::Blk {
            let (run, classes) = blk.clone().expect("BLK was run");
            runs.extend(alphas.iter().map(|&alpha| Run {
                alpha,
                ..run.clone()
            }));
            blk_classes = Some(classes);
        } else {
            runs.extend(searched.by_ref().take(alphas.len()));
        }
    }
    Ok(SweepOutcome { runs, blk_classes })
}

/// Configs with the first 1, 2, …, n holes of `config`.
pub fn hole_family(config: &ExperimentConfig) -> Vec<ExperimentConfig> {
    (1..=config.holes.len())
        .map(|n| ExperimentConfig {
            holes: config.holes[..n].to_vec(),
            ..config.clone()
        })
        .collect()
}

/// Lengths closer than this are ties.
pub const LENGTH_TIE: f64 = 1e-9;

/// The shortest run in the reference class (earliest α on ties). When no
/// run reaches the reference class, the run closest to it in projection.
pub fn best_homologous<'a>(runs: &'a [Run], target: &SignatureKey) -> Option<&'a Run> {
    let homologous = runs.iter().filter(|r| r.is_homologous(target));
    let best = homologous.fold(None, |best: Option<&Run>, r| match best {
        Some(b) if b.result.length <= r.result.length + LENGTH_TIE => Some(b),
        _ => Some(r),
    });
    best.or_else(|| {
        runs.iter().fold(None, |best: Option<&Run>, r| match best {
            Some(b)
                if (b.result.proj_diff, b.result.length)
                    <= (r.result.proj_diff, r.result.length) =>
            {
                Some(b)
            }
            _ => Some(r),
        })
    })
}

#[derive(Debug, Clone)]
pub struct SurfaceOutcome {
    pub experiment_id: String,
    pub holes: usize,
    pub vertices: usize,
    pub target_key: SignatureKey,
    /// Best run per algorithm, in the requested order.
    pub best: Vec<Run>,
    pub blk_classes: Option<Vec<ClassRecord>>,
}

impl SurfaceOutcome {
    pub fn run(&self, algorithm: Algorithm) -> Option<&Run> {
        self.best.iter().find(|r| r.algorithm == algorithm)
    }
}

/// For every surface of the family: each search algorithm's best
/// reference-class path over the α grid, plus one exact BLK run.
pub fn run_hole_scaling(
    family: &[ExperimentConfig],
    algorithms: &[Algorithm],
) -> Result<Vec<SurfaceOutcome>> {
    family
        .par_iter()
        .map(|config| {
            let p = Prepared::new(config.clone())?;
            let sweep = run_alpha_sweep(&p, algorithms, false)?;
            let best = algorithms
                .iter()
                .map(|&a| {
                    let runs: Vec<Run> = sweep.runs_of(a).cloned().collect();
                    let mut run = best_homologous(&runs, &p.target_key)
                        .expect("alphas are non-empty")
                        .clone();
                    if a == Algorithm::Blk {
                        run.alpha = 0.0;
                    }
                    run
                })
                .collect();
            Ok(SurfaceOutcome {
                experiment_id: format!("holes-{}", config.holes.len()),
                holes: config.holes.len(),
                vertices: p.surface.num_vertices(),
                target_key: p.target_key.clone(),
                best,
                blk_classes: sweep.blk_classes,
            })
        })
        .collect()
}

/// Brute-force cross-check on a tiny surface.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub table: ClassTable,
    /// Every class BLK reaches inside the winding box around the reference.
    pub blk_records: Vec<ClassRecord>,
    pub sweep: SweepOutcome,
    /// Classes of non-H* runs that simple-path enumeration does not contain.
    pub unmatched_runs: usize,
}

/// Random orthogonal matrix.
pub fn random_rotation(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0))
        .qr()
        .q()
}

/// Enumerates every simple path, checks BLK's class lengths against it,
/// checks that grouping is unchanged under a seeded random change of
/// harmonic basis, and checks that every H* output class is a real class.
pub fn run_oracle(p: &Prepared, algorithms: &[Algorithm]) -> Result<OracleReport> {
    let table = enumerate_classes(&p.surface, &p.basis, p.source, p.dest, MAX_ORACLE_VERTICES)?;

    let bound = WindingBound::around(&p.target, &hole_loop_values(&p.surface, &p.basis)?);
    let blk_records = blk_enumerate_classes(&p.surface, &p.basis, p.source, p.dest, bound.clone())?;
    for (key, entry) in &table.classes {
        if !bound.contains(entry.projection.values()) {
            continue;
        }
        match blk_records.iter().find(|r| &r.signature_key == key) {
            Some(r) if (r.shortest_length - entry.shortest_length).abs() <= 1e-12 => {}
            Some(r) => {
                return Err(BenchError::Check(format!(
                    "class {key}: BLK length {} but enumeration gives {}",
                    r.shortest_length, entry.shortest_length
                )))
            }
            None => {
                return Err(BenchError::Check(format!(
                    "class {key} was not found by BLK"
                )))
            }
        }
    }

    let rotated = p
        .basis
        .rotated(&random_rotation(p.basis.dim(), p.config.seed))?;
    let other = enumerate_classes(&p.surface, &rotated, p.source, p.dest, MAX_ORACLE_VERTICES)?;
    let partition = |t: &ClassTable| {
        let mut v: Vec<(Path, usize)> = t
            .classes
            .values()
            .map(|c| (c.representative.clone(), c.member_count))
            .collect();
        v.sort_by(|a, b| a.0.nodes().cmp(b.0.nodes()).then(a.1.cmp(&b.1)));
        v
    };
    if partition(&table) != partition(&other) {
        return Err(BenchError::Check(
            "class grouping changed under a change of harmonic basis".into(),
        ));
    }

    let sweep = run_alpha_sweep(p, algorithms, false)?;
    let mut unmatched_runs = 0;
    for run in &sweep.runs {
        if table.get(&run.class_key).is_some() {
            continue;
        }
        if matches!(run.algorithm, Algorithm::Hstar | Algorithm::Blk) {
            return Err(BenchError::Check(format!(
                "{} at α = {} returned class {} unknown to the enumeration",
                run.algorithm, run.alpha, run.class_key
            )));
        }
        unmatched_runs += 1;
    }
    Ok(OracleReport {
        table,
        blk_records,
        sweep,
        unmatched_runs,
    })
}

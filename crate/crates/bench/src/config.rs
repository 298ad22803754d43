//! Experiment configuration files.
//!
//! A config is a JSON object; grid points (`source`, `dest`, `keypoints`) are
//! `[col, row]` pairs, holes are rectangles in world coordinates.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hstar_core::complex::{GridSpec, Rect};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Hstar,
    Rhstar,
    Prhstar,
    Blk,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Hstar,
        Algorithm::Rhstar,
        Algorithm::Prhstar,
        Algorithm::Blk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hstar => "hstar",
            Algorithm::Rhstar => "rhstar",
            Algorithm::Prhstar => "prhstar",
            Algorithm::Blk => "blk",
        }
    }

    /// Label used in plots.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Hstar => "H*",
            Algorithm::Rhstar => "RH*",
            Algorithm::Prhstar => "PRH*",
            Algorithm::Blk => "BLK",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| {
                format!("unknown algorithm `{s}`; expected one of hstar, rhstar, prhstar, blk")
            })
    }
}

/// Parses a comma-separated algorithm list such as `hstar,blk`.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>, String> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}

fn default_output_dir() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub holes: Vec<Rect>,
    pub source: [usize; 2],
    pub dest: [usize; 2],
    /// Intermediate waypoints of the reference path, in order.
    #[serde(default)]
    pub keypoints: Vec<[usize; 2]>,
    pub alphas: Vec<f64>,
    /// Pruning tolerance for PRH*; `None` means 5% of the reference
    /// projection norm.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| BenchError::Parse {
                path: origin.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    /// Source, keypoints and destination, in path order.
    pub fn waypoints(&self) -> Vec<[usize; 2]> {
        let mut points = vec![self.source];
        points.extend(&self.keypoints);
        points.push(self.dest);
        points
    }

    pub fn output_path(&self) -> PathBuf {
        PathBuf::from(&self.output_dir)
    }

    /// Semantic checks that do not need the surface.
    pub fn validate(&self) -> Result<()> {
        self.grid
            .validate()
            .map_err(|e| BenchError::invalid("grid", e.to_string()))?;
        for (i, hole) in self.holes.iter().enumerate() {
            if !hole.is_valid() {
                return Err(BenchError::invalid(
                    format!("holes[{i}]"),
                    "not a finite, non-empty rectangle",
                ));
            }
            if !hole.strictly_inside(&self.grid.bounds) {
                return Err(BenchError::invalid(
                    format!("holes[{i}]"),
                    "must lie strictly inside the grid bounds",
                ));
            }
        }
        let mut points = vec![
            ("source".to_string(), self.source),
            ("dest".to_string(), self.dest),
        ];
        points.extend(
            self.keypoints
                .iter()
                .enumerate()
                .map(|(i, &p)| (format!("keypoints[{i}]"), p)),
        );
        for (field, [col, row]) in points {
            if col >= self.grid.cols || row >= self.grid.rows {
                return Err(BenchError::invalid(
                    field,
                    format!(
                        "[{col}, {row}] is outside the {}x{} grid",
                        self.grid.cols, self.grid.rows
                    ),
                ));
            }
            let p = self.grid.position(col, row);
            if let Some(i) = self.holes.iter().position(|h| h.contains_open(p)) {
                return Err(BenchError::invalid(
                    field,
                    format!("[{col}, {row}] lies inside holes[{i}]"),
                ));
            }
        }
        if self.source == self.dest {
            return Err(BenchError::invalid("dest", "must differ from source"));
        }
        if self.alphas.is_empty() {
            return Err(BenchError::invalid(
                "alphas",
                "at least one value is required",
            ));
        }
        if let Some(i) = self
            .alphas
            .iter()
            .position(|a| !(a.is_finite() && *a >= 0.0))
        {
            return Err(BenchError::invalid(
                format!("alphas[{i}]"),
                format!("must be finite and non-negative, got {}", self.alphas[i]),
            ));
        }
        if let Some(eps) = self.epsilon {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(BenchError::invalid(
                    "epsilon",
                    format!("must be positive, got {eps}"),
                ));
            }
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::invalid(
                "algorithms",
                "at least one algorithm is required",
            ));
        }
        if self.algorithms.iter().collect::<BTreeSet<_>>().len() != self.algorithms.len() {
            return Err(BenchError::invalid("algorithms", "duplicate entries"));
        }
        Ok(())
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_json(&text, path)
}

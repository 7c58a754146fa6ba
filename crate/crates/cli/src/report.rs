use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spinbath_core::{EtaStats, PointerReport, ShapeReport};

use crate::config::RunConfig;

pub const REPORT_FORMAT: &str = "spinbath-run-report/1";
pub const UNITS: &str = "hbar = 1; inputs and outputs are in the energy unit below, times in its inverse";

/// Natural energy scale of the run: `|center|` of the coupling distribution,
/// or `s` (`model.s`, else `s_N`; the width for ensembles) when the center
/// is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyUnit {
    pub reference: String,
    pub value: f64,
}

/// Asymptotic formula against the numerical average on the run's grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub regime: String,
    /// `Δ/s` or `s/Δ`, whichever the expansion is in.
    pub ratio: f64,
    /// Max component difference over samples that are inside the formula's
    /// validity window and numerically converged.
    pub max_abs_diff: Option<f64>,
    pub valid_samples: usize,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Written as `report.json` next to the data files. The manifest lists every
/// other file of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub library_version: String,
    pub rng_algorithm: String,
    pub units: String,
    pub energy_unit: EnergyUnit,
    pub threads: usize,
    pub config: RunConfig,
    /// Grid actually used, after unit conversion.
    pub time_span: TimeSpan,
    pub s: Option<f64>,
    pub eta_stats: Option<EtaStats>,
    pub lindeberg_ratio: Option<f64>,
    pub shape: Option<ShapeReport>,
    pub shape_of_mean: Option<ShapeReport>,
    pub gaussian_law_deviation: Option<f64>,
    pub echo_max_deviation: Option<f64>,
    pub pointer: Option<PointerReport>,
    pub pz_drift: Option<f64>,
    pub comparisons: Vec<Comparison>,
    /// Unconverged samples, one entry per series that has any.
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
    pub files: Vec<FileEntry>,
    pub timings: Vec<StageTiming>,
    pub total_seconds: f64,
    pub exit_code: i32,
}

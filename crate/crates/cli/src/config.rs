use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinbath_core::pointer::BasisThresholds;
use spinbath_core::{DistributionKind, DistributionSpec, Polarization};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    StrengthFunction,
    DecoherenceFactor,
    LorentzianEnsemble,
    Dynamics,
    AsymptoticsCompare,
    Pointer,
    EchoIdentity,
}

impl Experiment {
    pub const ALL: [&'static str; 7] = [
        "strength_function",
        "decoherence_factor",
        "lorentzian_ensemble",
        "dynamics",
        "asymptotics_compare",
        "pointer",
        "echo_identity",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsSpec {
    Uniform(f64),
    PerSpin(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaModel {
    /// Enumerate the drawn bath.
    Exact,
    /// Centered Gaussian of width `model.s` (or `s_N` of the drawn bath).
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub couplings: DistributionSpec,
    #[serde(default = "default_weights")]
    pub weights: WeightsSpec,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_p0")]
    pub p0: [f64; 3],
    #[serde(default = "default_eta")]
    pub eta: EtaModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

fn default_weights() -> WeightsSpec {
    WeightsSpec::Uniform(0.5)
}

fn default_p0() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

fn default_eta() -> EtaModel {
    EtaModel::Exact
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnits {
    #[default]
    Absolute,
    /// Grid values are multiples of `1/s`.
    InverseS,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub units: TimeUnits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    #[default]
    GaussHermite,
    Panels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub time: TimeGrid,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default)]
    pub quadrature: QuadratureKind,
    #[serde(default = "default_cap")]
    pub enumeration_cap: usize,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "default_true")]
    pub merge_degenerate: bool,
    #[serde(default)]
    pub basis_thresholds: BasisThresholds,
}

fn default_nodes() -> usize {
    spinbath_core::dynamics::DEFAULT_NODES
}

fn default_cap() -> usize {
    spinbath_core::strength::ENUMERATION_CAP
}

fn default_ensemble() -> usize {
    200
}

fn default_bins() -> usize {
    64
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    /// Comma-separated series.
    Csv,
    /// Space-separated `.dat` histograms for gnuplot.
    Dat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Dat]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub experiment: Experiment,
    pub model: ModelConfig,
    pub numerics: NumericsConfig,
    pub output: OutputConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Syntax { path: PathBuf, message: String },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text)
            .map_err(|e| ConfigError::Syntax { path: origin.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        RunConfig::from_json(&text, path)
    }

    pub fn p0(&self) -> Polarization {
        let [x, y, z] = self.model.p0;
        Polarization::new(x, y, z)
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let m = &self.model;
        let nm = &self.numerics;
        if self.version != CONFIG_VERSION {
            errs.push(format!("version: expected {CONFIG_VERSION}, found {}", self.version));
        }
        if m.n == 0 {
            errs.push("model.n: must be at least 1".into());
        }
        if let Err(e) = m.couplings.validate() {
            errs.push(format!("model.couplings: {e}"));
        }
        match &m.weights {
            WeightsSpec::Uniform(w) => {
                if !(0.0..=1.0).contains(w) {
                    errs.push(format!("model.weights.uniform: {w} is outside [0, 1]"));
                }
            }
            WeightsSpec::PerSpin(ws) => {
                if ws.len() != m.n {
                    errs.push(format!("model.weights.per_spin: {} entries for n = {}", ws.len(), m.n));
                }
                for (i, w) in ws.iter().enumerate() {
                    if !(0.0..=1.0).contains(w) {
                        errs.push(format!("model.weights.per_spin[{i}]: {w} is outside [0, 1]"));
                    }
                }
            }
        }
        if !m.delta.is_finite() {
            errs.push("model.delta: must be finite".into());
        }
        let p = self.p0();
        if !p.to_array().iter().all(|c| c.is_finite()) || p.norm_sqr() > 1.0 + 1e-12 {
            errs.push(format!("model.p0: |p0| = {} must not exceed 1", p.norm()));
        }
        if let Some(s) = m.s {
            if !(s > 0.0 && s.is_finite()) {
                errs.push(format!("model.s: must be positive, got {s}"));
            }
        }
        let t = &nm.time;
        if t.count < 2 {
            errs.push(format!("numerics.time.count: must be at least 2, got {}", t.count));
        }
        if !(t.start.is_finite() && t.stop.is_finite()) || t.stop <= t.start {
            errs.push(format!("numerics.time: need finite start < stop, got [{}, {}]", t.start, t.stop));
        }
        if nm.quadrature_nodes < spinbath_core::quadrature::MIN_NODES {
            errs.push(format!("numerics.quadrature_nodes: must be at least {}", spinbath_core::quadrature::MIN_NODES));
        }
        if 2 * nm.quadrature_nodes > spinbath_core::quadrature::MAX_NODES {
            errs.push(format!(
                "numerics.quadrature_nodes: at most {} (the convergence check doubles it)",
                spinbath_core::quadrature::MAX_NODES / 2
            ));
        }
        if nm.enumeration_cap == 0 || nm.enumeration_cap > 30 {
            errs.push(format!("numerics.enumeration_cap: must lie in [1, 30], got {}", nm.enumeration_cap));
        }
        if nm.ensemble_size == 0 {
            errs.push("numerics.ensemble_size: must be at least 1".into());
        }
        if nm.histogram_bins == 0 {
            errs.push("numerics.histogram_bins: must be at least 1".into());
        }
        if nm.threads == Some(0) {
            errs.push("numerics.threads: must be at least 1".into());
        }
        if let Err(e) = nm.basis_thresholds.validate() {
            errs.push(format!("numerics.basis_thresholds: {e}"));
        }
        if self.output.directory.as_os_str().is_empty() {
            errs.push("output.directory: must not be empty".into());
        }
        if self.output.formats.is_empty() {
            errs.push("output.formats: list at least one format".into());
        }
        let lorentzian = m.couplings.kind == DistributionKind::Lorentzian;
        match self.experiment {
            Experiment::LorentzianEnsemble => {
                if !matches!(m.weights, WeightsSpec::Uniform(_)) {
                    errs.push(
                        "model.weights: lorentzian_ensemble draws a new bath per realization and needs uniform weights"
                            .into(),
                    );
                }
                if t.units == TimeUnits::InverseS {
                    errs.push("numerics.time.units: lorentzian_ensemble has no single s; use absolute".into());
                }
            }
            Experiment::AsymptoticsCompare => {
                if m.eta != EtaModel::Gaussian {
                    errs.push("model.eta: asymptotics_compare integrates a Gaussian strength function".into());
                }
                if m.delta < 0.0 {
                    errs.push("model.delta: asymptotics_compare needs delta >= 0".into());
                }
            }
            _ => {}
        }
        if lorentzian
            && m.s.is_none()
            && t.units == TimeUnits::InverseS
            && self.experiment != Experiment::LorentzianEnsemble
        {
            // s_N of a drawn Lorentzian bath exists but is dominated by its largest coupling
            errs.push("numerics.time.units: inverse_s with Lorentzian couplings needs an explicit model.s".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

//! Coupling ensembles and the exact first and second moments of the
//! environment energy `B = Σ ±g_k`.
//!
//! Only the occupation probabilities `|α_k|²` of the environment spins are
//! stored. For product initial states every observable in this crate (the
//! decoherence factor, the strength function, and the central spin
//! polarization) depends on the amplitudes through `|α_k|²` and
//! `|β_k|² = 1 − |α_k|²` alone; the phases of `α_k`, `β_k` drop out.

use std::f64::consts::PI;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Fixed,
    Uniform,
    Gaussian,
    Lorentzian,
}

/// A distribution of coupling energies.
///
/// `width` is the half-width for `Uniform`, the standard deviation for
/// `Gaussian` and the scale (half width at half maximum) for `Lorentzian`. It
/// must be zero for `Fixed` and positive otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub kind: DistributionKind,
    pub center: f64,
    #[serde(default)]
    pub width: f64,
    #[serde(default)]
    pub seed: u64,
}

impl DistributionSpec {
    pub fn fixed(center: f64) -> Self {
        DistributionSpec { kind: DistributionKind::Fixed, center, width: 0.0, seed: 0 }
    }

    pub fn new(kind: DistributionKind, center: f64, width: f64, seed: u64) -> Result<Self> {
        let spec = DistributionSpec { kind, center, width, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() || !self.width.is_finite() {
            return Err(Error::invalid("distribution center and width must be finite"));
        }
        if self.width < 0.0 {
            return Err(Error::invalid(format!("width must be >= 0, got {}", self.width)));
        }
        match self.kind {
            DistributionKind::Fixed if self.width != 0.0 => {
                Err(Error::invalid("a fixed distribution must have width 0"))
            }
            DistributionKind::Fixed => Ok(()),
            _ if self.width == 0.0 => {
                Err(Error::invalid(format!("{:?} distribution needs a positive width", self.kind)))
            }
            _ => Ok(()),
        }
    }

    /// Variance of the distribution itself (not of a drawn sample).
    pub fn variance(&self) -> Result<f64> {
        self.validate()?;
        match self.kind {
            DistributionKind::Fixed => Ok(0.0),
            DistributionKind::Uniform => Ok(self.width * self.width / 3.0),
            DistributionKind::Gaussian => Ok(self.width * self.width),
            DistributionKind::Lorentzian => {
                Err(Error::Unsupported("a Lorentzian distribution has no finite variance".into()))
            }
        }
    }
}

/// System-environment coupling energies `g_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Couplings(Vec<f64>);

impl Couplings {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("at least one coupling is required"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("coupling {v} is not finite")));
        }
        Ok(Couplings(values))
    }

    pub fn equal(g: f64, n: usize) -> Result<Self> {
        Couplings::new(vec![g; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Couplings {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Couplings::new(values)
    }
}

impl From<Couplings> for Vec<f64> {
    fn from(c: Couplings) -> Self {
        c.0
    }
}

/// Product initial state of the environment, stored as `|α_k|²` per spin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvProductState {
    weights: Vec<f64>,
}

impl EnvProductState {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::invalid(format!("spin weight {w} is outside [0, 1]")));
        }
        Ok(EnvProductState { weights })
    }

    pub fn uniform(weight: f64, n: usize) -> Result<Self> {
        EnvProductState::new(vec![weight; n])
    }

    /// `|α_k|²`, the probability that spin `k` points up.
    pub fn up(&self) -> &[f64] {
        &self.weights
    }

    /// `|β_k|² = 1 − |α_k|²`.
    pub fn down(&self, k: usize) -> f64 {
        1.0 - self.weights[k]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub(crate) fn check_matches(&self, g: &Couplings) -> Result<()> {
        if self.len() != g.len() {
            return Err(Error::LengthMismatch { what: "environment weights", expected: g.len(), found: self.len() });
        }
        Ok(())
    }
}

/// Mean and spread of the energy random walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaStats {
    /// `B̄_N = Σ a_k`.
    pub mean: f64,
    /// `s_N`, with `s_N² = Σ b_k²`.
    pub std: f64,
    /// `a_k = (|α_k|² − |β_k|²) g_k`.
    pub per_spin_means: Vec<f64>,
    /// `b_k² = 4 |α_k|² |β_k|² g_k²`.
    pub per_spin_vars: Vec<f64>,
}

impl EtaStats {
    pub fn variance(&self) -> f64 {
        self.per_spin_vars.iter().sum()
    }
}

pub fn sample_couplings(spec: &DistributionSpec, n: usize) -> Result<Couplings> {
    sample_couplings_stream(spec, n, 0)
}

/// Draws `n` couplings from stream `stream` of `spec.seed`. Realization `i`
/// of an ensemble uses stream `i`.
pub fn sample_couplings_stream(spec: &DistributionSpec, n: usize, stream: u64) -> Result<Couplings> {
    if n == 0 {
        return Err(Error::invalid("the number of couplings must be at least 1"));
    }
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, stream);
    let (c, w) = (spec.center, spec.width);
    let values = match spec.kind {
        DistributionKind::Fixed => vec![c; n],
        DistributionKind::Uniform => (0..n).map(|_| c + w * (2.0 * rng.random::<f64>() - 1.0)).collect(),
        DistributionKind::Gaussian => {
            let normal = Normal::new(c, w).map_err(|e| Error::invalid(e.to_string()))?;
            normal.sample_iter(&mut rng).take(n).collect()
        }
        // Inverse CDF keeps the heavy tails exact.
        DistributionKind::Lorentzian => (0..n)
            .map(|_| {
                let u: f64 = Open01.sample(&mut rng);
                c + w * (PI * (u - 0.5)).tan()
            })
            .collect(),
    };
    Couplings::new(values)
}

pub fn eta_stats(g: &Couplings, env: &EnvProductState) -> Result<EtaStats> {
    env.check_matches(g)?;
    let (per_spin_means, per_spin_vars): (Vec<f64>, Vec<f64>) = g
        .values()
        .iter()
        .zip(env.up())
        .map(|(&gk, &up)| {
            let down = 1.0 - up;
            ((up - down) * gk, 4.0 * up * down * gk * gk)
        })
        .unzip();
    let mean = per_spin_means.iter().sum();
    let std = per_spin_vars.iter().sum::<f64>().sqrt();
    Ok(EtaStats { mean, std, per_spin_means, per_spin_vars })
}

/// `max_k b_k² / s_N²`.
///
/// A finite-size stand-in for the Lindeberg condition: it lies in
/// `[1/N, 1]`, and small values mean no single spin dominates the walk, so
/// the Gaussian limit can be trusted. It is a heuristic, not a convergence
/// bound.
pub fn lindeberg_ratio(g: &Couplings, env: &EnvProductState) -> Result<f64> {
    let stats = eta_stats(g, env)?;
    let total = stats.variance();
    if total <= 0.0 {
        return Err(Error::Degenerate("s_N = 0: every step of the walk is deterministic".into()));
    }
    let max = stats.per_spin_vars.iter().cloned().fold(0.0, f64::max);
    Ok(max / total)
}

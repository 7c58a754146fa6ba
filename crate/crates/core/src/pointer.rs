//! Long-time structure: residual polarization and pointer-basis selection.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::dynamics::polarization_from_eta;
use crate::error::{Error, Result};
use crate::polarization::{Polarization, PolarizationSeries};
use crate::special::gamma_fn;
use crate::strength::DiscreteEta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointerBasis {
    /// `σ_z` eigenstates survive: decoherence dominates.
    ZDominant,
    /// `σ_x` eigenstates survive: the system Hamiltonian dominates.
    XDominant,
    Crossover,
}

/// Classification thresholds on `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisThresholds {
    pub z_below: f64,
    pub x_above: f64,
}

impl Default for BasisThresholds {
    fn default() -> Self {
        BasisThresholds { z_below: 0.1, x_above: 0.9 }
    }
}

impl BasisThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.z_below && self.z_below <= self.x_above && self.x_above <= 1.0) {
            return Err(Error::invalid("basis thresholds need 0 <= z_below <= x_above <= 1"));
        }
        Ok(())
    }

    pub fn classify(&self, gamma: f64) -> PointerBasis {
        if gamma < self.z_below {
            PointerBasis::ZDominant
        } else if gamma > self.x_above {
            PointerBasis::XDominant
        } else {
            PointerBasis::Crossover
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointerReport {
    /// `t → ∞` polarization `(γ p_x(0), 0, (1 − γ) p_z(0))`.
    pub residual: Polarization,
    pub gamma_value: f64,
    pub basis: PointerBasis,
    pub delta_over_s: f64,
    /// Always `"analytic"`: residuals come from the plateau formulas, not
    /// from long-time numerics.
    pub provenance: String,
}

pub fn residual_polarization(p0: Polarization, delta: f64, s: f64) -> Result<PointerReport> {
    residual_polarization_with(p0, delta, s, &BasisThresholds::default())
}

pub fn residual_polarization_with(
    p0: Polarization,
    delta: f64,
    s: f64,
    thresholds: &BasisThresholds,
) -> Result<PointerReport> {
    if !(s > 0.0) {
        return Err(Error::invalid(format!("s must be positive, got {s}")));
    }
    thresholds.validate()?;
    let ratio = delta.abs() / s;
    let gamma = gamma_fn(ratio / SQRT_2)?;
    Ok(PointerReport {
        residual: Polarization::new(gamma * p0.px, 0.0, (1.0 - gamma) * p0.pz),
        gamma_value: gamma,
        basis: thresholds.classify(gamma),
        delta_over_s: ratio,
        provenance: "analytic".into(),
    })
}

/// `(1 + |p|²)/2`; fails outside the Bloch ball.
pub fn purity(p: Polarization) -> Result<f64> {
    p.purity()
}

/// Two-point strength function `[δ(B − s) + δ(B + s)]/2`: the average of two
/// precession cones.
pub fn two_field_toy(p0: Polarization, delta: f64, s: f64, times: &[f64]) -> Result<PolarizationSeries> {
    let eta = DiscreteEta::from_points(&[(s, 0.5), (-s, 0.5)])?;
    let mut series = polarization_from_eta(&eta, p0, delta, times)?;
    series.meta.method = "two_field_toy".into();
    Ok(series)
}

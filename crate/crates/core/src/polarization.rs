use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{check_times, Error, Result};
use crate::series::SeriesMeta;

const NORM_SLACK: f64 = 1e-12;

/// Bloch vector of the central spin, `ρ = (I + p·σ)/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Polarization {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl Polarization {
    pub const X: Polarization = Polarization { px: 1.0, py: 0.0, pz: 0.0 };
    pub const Y: Polarization = Polarization { px: 0.0, py: 1.0, pz: 0.0 };
    pub const Z: Polarization = Polarization { px: 0.0, py: 0.0, pz: 1.0 };

    pub const fn new(px: f64, py: f64, pz: f64) -> Self {
        Polarization { px, py, pz }
    }

    /// Validated constructor: finite components inside the unit ball.
    pub fn checked(px: f64, py: f64, pz: f64) -> Result<Self> {
        let p = Polarization { px, py, pz };
        if !(px.is_finite() && py.is_finite() && pz.is_finite()) {
            return Err(Error::invalid("polarization components must be finite"));
        }
        if p.norm_sqr() > 1.0 + NORM_SLACK {
            return Err(Error::invalid(format!("|p| = {} exceeds 1", p.norm())));
        }
        Ok(p)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.px * self.px + self.py * self.py + self.pz * self.pz
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `Tr ρ² = (1 + |p|²)/2`.
    pub fn purity(&self) -> Result<f64> {
        let n2 = self.norm_sqr();
        if !(n2 <= 1.0 + NORM_SLACK) {
            return Err(Error::invalid(format!("|p| = {} exceeds 1", n2.sqrt())));
        }
        Ok(0.5 * (1.0 + n2))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.px, self.py, self.pz]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Polarization { px: a[0], py: a[1], pz: a[2] }
    }

    /// Largest componentwise difference.
    pub fn max_diff(&self, other: &Polarization) -> f64 {
        (self.px - other.px).abs().max((self.py - other.py).abs()).max((self.pz - other.pz).abs())
    }
}

impl Add for Polarization {
    type Output = Polarization;
    fn add(self, o: Polarization) -> Polarization {
        Polarization { px: self.px + o.px, py: self.py + o.py, pz: self.pz + o.pz }
    }
}

impl Mul<f64> for Polarization {
    type Output = Polarization;
    fn mul(self, s: f64) -> Polarization {
        Polarization { px: self.px * s, py: self.py * s, pz: self.pz * s }
    }
}

/// Polarization samples with a per-sample trust flag: convergence for
/// numerical engines, validity window for asymptotic formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationSeries {
    times: Vec<f64>,
    values: Vec<Polarization>,
    flags: Vec<bool>,
    pub meta: SeriesMeta,
}

impl PolarizationSeries {
    pub fn new(times: Vec<f64>, values: Vec<Polarization>, flags: Vec<bool>, meta: SeriesMeta) -> Result<Self> {
        check_times(&times)?;
        if values.len() != times.len() {
            return Err(Error::LengthMismatch { what: "series values", expected: times.len(), found: values.len() });
        }
        if flags.len() != times.len() {
            return Err(Error::LengthMismatch { what: "series flags", expected: times.len(), found: flags.len() });
        }
        Ok(PolarizationSeries { times, values, flags, meta })
    }

    pub(crate) fn from_parts(times: Vec<f64>, values: Vec<Polarization>, flags: Vec<bool>, meta: SeriesMeta) -> Self {
        PolarizationSeries { times, values, flags, meta }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Polarization] {
        &self.values
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn all_flagged(&self) -> bool {
        self.flags.iter().all(|&f| f)
    }

    pub fn px(&self) -> Vec<f64> {
        self.values.iter().map(|p| p.px).collect()
    }

    pub fn py(&self) -> Vec<f64> {
        self.values.iter().map(|p| p.py).collect()
    }

    pub fn pz(&self) -> Vec<f64> {
        self.values.iter().map(|p| p.pz).collect()
    }

    /// Component `i` (0 = x, 1 = y, 2 = z).
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|p| p.to_array()[i]).collect()
    }

    /// Largest componentwise difference against a series on the same grid.
    pub fn max_diff(&self, other: &PolarizationSeries) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::invalid("series are sampled on different grids"));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.max_diff(b)).fold(0.0, f64::max))
    }
}

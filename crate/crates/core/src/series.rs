use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{check_times, Error, Result};

/// Where a series came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_std: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

impl SeriesMeta {
    pub fn new(method: impl Into<String>) -> Self {
        SeriesMeta { method: method.into(), ..Default::default() }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_eta(mut self, mean: f64, std: f64) -> Self {
        self.eta_mean = Some(mean);
        self.eta_std = Some(std);
        self
    }

    pub fn with_spec(mut self, spec: DistributionSpec) -> Self {
        self.seed = Some(spec.seed);
        self.spec = Some(spec);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn note(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.notes.insert(key.into(), value.to_string());
        self
    }
}

/// Complex samples `r(t)` on a strictly increasing time grid (`ħ = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSeries {
    times: Vec<f64>,
    values: Vec<Complex64>,
    pub meta: SeriesMeta,
}

impl ComplexSeries {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>, meta: SeriesMeta) -> Result<Self> {
        check_times(&times)?;
        if times.len() != values.len() {
            return Err(Error::LengthMismatch { what: "series values", expected: times.len(), found: values.len() });
        }
        Ok(ComplexSeries { times, values, meta })
    }

    pub(crate) fn from_parts(times: Vec<f64>, values: Vec<Complex64>, meta: SeriesMeta) -> Self {
        debug_assert_eq!(times.len(), values.len());
        ComplexSeries { times, values, meta }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Largest `|a − b|` over matching samples; both series must share a grid.
    pub fn max_abs_diff(&self, other: &ComplexSeries) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::invalid("series are sampled on different grids"));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Largest componentwise deviation `max(|Δre|, |Δim|)`.
    pub fn max_component_diff(&self, other: &ComplexSeries) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::invalid("series are sampled on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.re - b.re).abs().max((a.im - b.im).abs()))
            .fold(0.0, f64::max))
    }
}

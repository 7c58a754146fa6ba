//! The strength function `η(B)`: the distribution of environment-conditioned
//! energies `B_n = Σ_k (−1)^{n_k} g_k`, each weighted by the occupation
//! `|c_n|²` of the corresponding environment basis state.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, Discrete as _};

use crate::distributions::{Couplings, EnvProductState};
use crate::enumerate::enumerate_walks;
use crate::error::{Error, Result};
use crate::numeric;
use crate::rng::stream_rng;

/// Largest bath that is enumerated walk by walk.
pub const ENUMERATION_CAP: usize = 20;
/// Largest bath for which a full `2^N` state vector is built.
pub const GENERIC_STATE_CAP: usize = 20;
/// Degenerate energies closer than this multiple of `s_N` are merged.
pub const MERGE_RTOL: f64 = 1e-9;

const MASS_TOL: f64 = 1e-12;

pub(crate) fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::ResourceLimit { what, requested: n, cap });
    }
    Ok(())
}

/// Point masses `(B_n, |c_n|²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEta {
    energies: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteEta {
    pub fn new(energies: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if energies.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "strength-function weights",
                expected: energies.len(),
                found: weights.len(),
            });
        }
        if energies.is_empty() {
            return Err(Error::invalid("a discrete strength function needs at least one point"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("weights must be non-negative and energies finite"));
        }
        let eta = DiscreteEta { energies, weights };
        let mass = eta.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!("weights sum to {mass}, expected 1")));
        }
        Ok(eta)
    }

    /// Builds the distribution from `(energy, weight)` pairs.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let (e, w) = points.iter().cloned().unzip();
        DiscreteEta::new(e, w)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.energies.iter().cloned().zip(self.weights.iter().cloned())
    }

    pub fn total_mass(&self) -> f64 {
        numeric::sum(&self.weights)
    }

    pub fn moments(&self) -> (f64, f64) {
        let mean = numeric::pairwise_sum(self.len(), &|i| self.weights[i] * self.energies[i]);
        let var = numeric::pairwise_sum(self.len(), &|i| {
            let d = self.energies[i] - mean;
            self.weights[i] * d * d
        });
        (mean, var.max(0.0).sqrt())
    }

    /// Points sorted by energy, ties kept.
    pub fn sorted(&self) -> DiscreteEta {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.energies[a].total_cmp(&self.energies[b]));
        DiscreteEta {
            energies: order.iter().map(|&i| self.energies[i]).collect(),
            weights: order.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// Merges energies that lie within `tol` of the first member of their
    /// group. The merged point keeps that first (lowest) energy and the summed
    /// weight. Output is sorted by energy.
    pub fn merge_degenerate(&self, tol: f64) -> DiscreteEta {
        let sorted = self.sorted();
        let mut energies = Vec::new();
        let mut weights = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let start = sorted.energies[i];
            let mut j = i;
            while j < sorted.len() && sorted.energies[j] - start <= tol {
                j += 1;
            }
            energies.push(start);
            weights.push(numeric::sum(&sorted.weights[i..j]));
            i = j;
        }
        DiscreteEta { energies, weights }
    }

    /// Merging with the default tolerance `MERGE_RTOL · s_N`.
    pub fn merged(&self) -> DiscreteEta {
        let (_, std) = self.moments();
        let scale = if std > 0.0 { std } else { self.energies.iter().fold(1.0f64, |m, e| m.max(e.abs())) };
        self.merge_degenerate(MERGE_RTOL * scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    edges: Vec<f64>,
    masses: Vec<f64>,
}

impl Histogram {
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum StrengthFunction {
    Discrete(DiscreteEta),
    AnalyticGaussian { mean: f64, std: f64 },
    Histogram(Histogram),
}

impl StrengthFunction {
    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0) || !mean.is_finite() || !std.is_finite() {
            return Err(Error::invalid(format!("Gaussian strength function needs std > 0, got {std}")));
        }
        Ok(StrengthFunction::AnalyticGaussian { mean, std })
    }
}

impl From<DiscreteEta> for StrengthFunction {
    fn from(eta: DiscreteEta) -> Self {
        StrengthFunction::Discrete(eta)
    }
}

impl From<Histogram> for StrengthFunction {
    fn from(h: Histogram) -> Self {
        StrengthFunction::Histogram(h)
    }
}

/// A generic `2^N`-amplitude environment state `Σ c_n |n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvGenericState {
    amplitudes: Vec<Complex64>,
}

impl EnvGenericState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() || !amplitudes.len().is_power_of_two() {
            return Err(Error::invalid("a generic state needs 2^N amplitudes"));
        }
        check_cap("environment spins", amplitudes.len().trailing_zeros() as usize, GENERIC_STATE_CAP)?;
        let norm = numeric::pairwise_sum(amplitudes.len(), &|i| amplitudes[i].norm_sqr());
        if (norm - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!("state norm is {norm}, expected 1")));
        }
        Ok(EnvGenericState { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_spins(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm_sqr(&self) -> f64 {
        numeric::pairwise_sum(self.amplitudes.len(), &|i| self.amplitudes[i].norm_sqr())
    }
}

pub fn enumerate_eta(g: &Couplings, env: &EnvProductState) -> Result<DiscreteEta> {
    enumerate_eta_capped(g, env, ENUMERATION_CAP)
}

/// All `2^N` walks, raw (unmerged), in block-major Gray order.
pub fn enumerate_eta_capped(g: &Couplings, env: &EnvProductState, cap: usize) -> Result<DiscreteEta> {
    env.check_matches(g)?;
    check_cap("environment spins", g.len(), cap)?;
    let walks = enumerate_walks(g.values(), env.up());
    Ok(DiscreteEta { energies: walks.energies, weights: walks.weights })
}

/// Equal couplings `g` and equal occupations: the `2^N` walks collapse onto
/// the `N+1` energies `g(2k − N)`, where `k` counts the `+g` steps.
pub fn binomial_eta(g: f64, weight: f64, n: usize) -> Result<DiscreteEta> {
    if n == 0 {
        return Err(Error::invalid("binomial strength function needs n >= 1"));
    }
    if !(0.0..=1.0).contains(&weight) || !g.is_finite() {
        return Err(Error::invalid(format!("weight {weight} must lie in [0, 1]")));
    }
    let binom = Binomial::new(weight, n as u64).map_err(|e| Error::invalid(e.to_string()))?;
    let energies = (0..=n).map(|k| g * (2.0 * k as f64 - n as f64)).collect();
    let weights = (0..=n).map(|k| binom.pmf(k as u64)).collect();
    DiscreteEta::new(energies, weights)
}

/// Continuum envelope of the binomial strength function in the variable
/// `B/g`: a Gaussian of mean `N(|α|² − |β|²)` and variance `4N|α β|²`.
///
/// The lattice `B/g = 2k − N` has spacing 2, so the binomial point masses are
/// approximated by twice this density.
pub fn binomial_gaussian_envelope(g: f64, weight: f64, n: usize, energy: f64) -> f64 {
    let nf = n as f64;
    let ab2 = weight * (1.0 - weight);
    let x = energy / g - nf * (2.0 * weight - 1.0);
    (-x * x / (8.0 * nf * ab2)).exp() / (8.0 * PI * nf * ab2).sqrt()
}

/// Random-phase environment `c_n = 2^{-N/2} e^{iφ_n}` with independent
/// uniform phases, and its strength function (uniform weights `2^{-N}` on the
/// enumerated energies).
pub fn random_state_eta(g: &Couplings, seed: u64) -> Result<(EnvGenericState, DiscreteEta)> {
    random_state_eta_capped(g, seed, GENERIC_STATE_CAP)
}

pub fn random_state_eta_capped(g: &Couplings, seed: u64, cap: usize) -> Result<(EnvGenericState, DiscreteEta)> {
    let n = g.len();
    check_cap("environment spins", n, cap)?;
    let mut rng = stream_rng(seed, 0);
    let modulus = (-(n as f64) * 0.5 * std::f64::consts::LN_2).exp();
    let amplitudes = (0..1usize << n).map(|_| Complex64::from_polar(modulus, 2.0 * PI * rng.random::<f64>())).collect();
    let state = EnvGenericState::new(amplitudes)?;
    // |c_n|² = 2^{-N} by construction; the enumeration with all weights ½
    // produces exactly that power of two.
    let walks = enumerate_walks(g.values(), &vec![0.5; n]);
    let eta = DiscreteEta { energies: walks.energies, weights: walks.weights };
    Ok((state, eta))
}

/// Mass-preserving binning over `[min B, max B]`; the last bin is closed on
/// the right. A single-energy input is binned over a unit-width interval
/// centered on that energy.
pub fn histogram_eta(eta: &DiscreteEta, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    if eta.is_empty() {
        return Err(Error::invalid("cannot bin an empty strength function"));
    }
    let lo = eta.energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eta.energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = hi - lo;
    let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 / bins as f64 }).collect();
    let mut masses = vec![0.0; bins];
    let sorted = eta.sorted();
    for (e, w) in sorted.points() {
        let idx = (((e - lo) / width) * bins as f64).floor();
        let idx = (idx.max(0.0) as usize).min(bins - 1);
        masses[idx] += w;
    }
    Ok(Histogram { edges, masses })
}

/// Weighted mean and standard deviation of any representation. Histograms use
/// their bin centers.
pub fn eta_moments(eta: &StrengthFunction) -> (f64, f64) {
    match eta {
        StrengthFunction::Discrete(d) => d.moments(),
        StrengthFunction::AnalyticGaussian { mean, std } => (*mean, *std),
        StrengthFunction::Histogram(h) => {
            let c = h.centers();
            let mean = numeric::pairwise_sum(c.len(), &|i| c[i] * h.masses[i]);
            let var = numeric::pairwise_sum(c.len(), &|i| (c[i] - mean).powi(2) * h.masses[i]);
            (mean, var.sqrt())
        }
    }
}

//! The decoherence factor `r(t) = Σ_n |c_n|² e^{−i B_n t}`.
//!
//! Sign convention: spin `k` up (probability `|α_k|²`) shifts the branch
//! energy by `+g_k`, and the environment evolves under
//! `H¹ = +Σ_k g_k σ_z^{(k)}`. With this choice the product form
//! `Π_k (|α_k|² e^{−i g_k t} + |β_k|² e^{+i g_k t})`, the strength-function
//! sum and the echo overlap `⟨Ψ|e^{−iH¹t}|Ψ⟩` are the same function of `t`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::distributions::{eta_stats, sample_couplings_stream, Couplings, DistributionSpec, EnvProductState};
use crate::error::{check_times, Error, Result};
use crate::numeric;
use crate::series::{ComplexSeries, SeriesMeta};
use crate::strength::{check_cap, random_state_eta, EnvGenericState, StrengthFunction, GENERIC_STATE_CAP};

/// Exact product form, `O(N)` per time.
///
/// `ln|r|` and `arg r` are accumulated separately, so deep decay underflows
/// gracefully instead of flushing intermediate products to zero, and
/// `r(0) = 1` exactly.
pub fn r_product(g: &Couplings, env: &EnvProductState, times: &[f64]) -> Result<ComplexSeries> {
    env.check_matches(g)?;
    check_times(times)?;
    let stats = eta_stats(g, env)?;
    let values = times.par_iter().map(|&t| product_at(g.values(), env.up(), t)).collect();
    let meta = SeriesMeta::new("r_product").with_n(g.len()).with_eta(stats.mean, stats.std);
    Ok(ComplexSeries::from_parts(times.to_vec(), values, meta))
}

pub(crate) fn product_at(g: &[f64], up: &[f64], t: f64) -> Complex64 {
    let mut log_mod = 0.0;
    let mut phase = 0.0;
    for (&gk, &w) in g.iter().zip(up) {
        let d = 2.0 * w - 1.0;
        let (sin, cos) = (gk * t).sin_cos();
        // factor = cos(g t) − i d sin(g t)
        log_mod += 0.5 * (cos * cos + d * d * sin * sin).ln();
        phase += (-d * sin).atan2(cos);
    }
    Complex64::from_polar(log_mod.exp(), phase)
}

/// `r(t)` from a strength function: the weighted Fourier sum for discrete
/// data, the closed form `e^{−i B̄ t} e^{−s² t²/2}` for the Gaussian limit.
pub fn r_from_eta(eta: &StrengthFunction, times: &[f64]) -> Result<ComplexSeries> {
    check_times(times)?;
    match eta {
        StrengthFunction::Discrete(d) => {
            let (e, w) = (d.energies(), d.weights());
            let values = times
                .par_iter()
                .map(|&t| numeric::pairwise_sum(e.len(), &|i| Complex64::from_polar(w[i], -e[i] * t)))
                .collect();
            let (mean, std) = d.moments();
            let meta = SeriesMeta::new("r_from_eta").note("points", d.len()).with_eta(mean, std);
            Ok(ComplexSeries::from_parts(times.to_vec(), values, meta))
        }
        StrengthFunction::AnalyticGaussian { mean, std } => gaussian_approximant(*mean, *std, times),
        StrengthFunction::Histogram(_) => {
            Err(Error::Unsupported("r(t) from a histogram is lossy; use the discrete strength function".into()))
        }
    }
}

/// Gaussian limit `e^{−i B̄ t} e^{−s² t²/2}`.
pub fn gaussian_approximant(mean: f64, std: f64, times: &[f64]) -> Result<ComplexSeries> {
    check_times(times)?;
    let values = times.iter().map(|&t| Complex64::from_polar((-0.5 * std * std * t * t).exp(), -mean * t)).collect();
    let meta = SeriesMeta::new("gaussian_approximant").with_eta(mean, std);
    Ok(ComplexSeries::from_parts(times.to_vec(), values, meta))
}

/// `r(t)` for the random-phase environment state drawn with `seed`.
pub fn r_random_env(g: &Couplings, seed: u64, times: &[f64]) -> Result<ComplexSeries> {
    let (_, eta) = random_state_eta(g, seed)?;
    let mut series = r_from_eta(&eta.into(), times)?;
    series.meta.method = "r_random_env".into();
    series.meta.n = Some(g.len());
    series.meta.seed = Some(seed);
    Ok(series)
}

/// Product state `⊗_k (√|α_k|² e^{iφ_k}|↑⟩ + √|β_k|² e^{iχ_k}|↓⟩)` as a full
/// amplitude table. Bit `k` of the index is clear for spin `k` up.
pub fn product_state_vector(env: &EnvProductState, phases: Option<&[(f64, f64)]>) -> Result<EnvGenericState> {
    let n = env.len();
    check_cap("environment spins", n, GENERIC_STATE_CAP)?;
    if let Some(p) = phases {
        if p.len() != n {
            return Err(Error::LengthMismatch { what: "spin phases", expected: n, found: p.len() });
        }
    }
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for (k, &up) in env.up().iter().enumerate() {
        let (phi, chi) = phases.map_or((0.0, 0.0), |p| p[k]);
        let a = Complex64::from_polar(up.sqrt(), phi);
        let b = Complex64::from_polar((1.0 - up).sqrt(), chi);
        let lower: Vec<Complex64> = amps.iter().map(|c| c * a).collect();
        let upper: Vec<Complex64> = amps.iter().map(|c| c * b).collect();
        amps = lower;
        amps.extend(upper);
    }
    // normalization can drift by an ulp per spin; renormalize onto the sphere
    let norm = numeric::pairwise_sum(amps.len(), &|i| amps[i].norm_sqr()).sqrt();
    amps.iter_mut().for_each(|c| *c /= norm);
    EnvGenericState::new(amps)
}

/// Echo amplitude `⟨Ψ|e^{−iH¹t}|Ψ⟩` with `H¹ = Σ_k g_k σ_z^{(k)}`, computed
/// by evolving the full state vector one spin at a time.
pub fn loschmidt_overlap(g: &Couplings, env: &EnvProductState, times: &[f64]) -> Result<ComplexSeries> {
    env.check_matches(g)?;
    let state = product_state_vector(env, None)?;
    let mut series = loschmidt_overlap_state(g, &state, times)?;
    series.meta.n = Some(g.len());
    Ok(series)
}

pub fn loschmidt_overlap_state(g: &Couplings, state: &EnvGenericState, times: &[f64]) -> Result<ComplexSeries> {
    check_times(times)?;
    if state.n_spins() != g.len() {
        return Err(Error::LengthMismatch { what: "state spins", expected: g.len(), found: state.n_spins() });
    }
    let psi = state.amplitudes();
    let values = times
        .par_iter()
        .map(|&t| {
            let mut phi = psi.to_vec();
            for (k, &gk) in g.values().iter().enumerate() {
                let up = Complex64::from_polar(1.0, -gk * t);
                let down = up.conj();
                let bit = 1usize << k;
                for (i, c) in phi.iter_mut().enumerate() {
                    *c *= if i & bit == 0 { up } else { down };
                }
            }
            numeric::pairwise_sum(psi.len(), &|i| psi[i].conj() * phi[i])
        })
        .collect();
    Ok(ComplexSeries::from_parts(times.to_vec(), values, SeriesMeta::new("loschmidt_overlap")))
}

/// Ensemble average over coupling realizations.
#[derive(Debug, Clone)]
pub struct Ensemble {
    /// Average of the complex `r(t)`.
    pub mean: ComplexSeries,
    /// Average of `|r(t)|`.
    pub mean_abs: Vec<f64>,
    /// `s_N` of every realization, in stream order.
    pub stds: Vec<f64>,
}

/// Realization `i` draws `n` couplings from stream `i` of `spec.seed` and
/// evaluates the product form. Sums run in realization order, so the result
/// does not depend on the number of worker threads.
pub fn ensemble(
    spec: &DistributionSpec,
    n: usize,
    weight: f64,
    realizations: usize,
    times: &[f64],
) -> Result<Ensemble> {
    if realizations == 0 {
        return Err(Error::invalid("ensemble needs at least one realization"));
    }
    check_times(times)?;
    let env = EnvProductState::uniform(weight, n)?;
    let runs: Vec<(Vec<Complex64>, f64)> = (0..realizations as u64)
        .into_par_iter()
        .map(|i| {
            let g = sample_couplings_stream(spec, n, i)?;
            let std = eta_stats(&g, &env)?.std;
            Ok((times.iter().map(|&t| product_at(g.values(), env.up(), t)).collect(), std))
        })
        .collect::<Result<_>>()?;
    let scale = 1.0 / realizations as f64;
    let mean = (0..times.len()).map(|j| numeric::pairwise_sum(runs.len(), &|i| runs[i].0[j]) * scale).collect();
    let mean_abs =
        (0..times.len()).map(|j| numeric::pairwise_sum(runs.len(), &|i| runs[i].0[j].norm()) * scale).collect();
    let meta = SeriesMeta::new("ensemble_mean").with_n(n).with_spec(*spec).note("realizations", realizations);
    Ok(Ensemble {
        mean: ComplexSeries::from_parts(times.to_vec(), mean, meta),
        mean_abs,
        stds: runs.iter().map(|r| r.1).collect(),
    })
}

/// `max_t | |r(t)| − e^{−s² t²/2} |`.
pub fn gaussian_law_deviation(series: &ComplexSeries, std: f64) -> f64 {
    series
        .times()
        .iter()
        .zip(series.values())
        .map(|(&t, v)| (v.norm() - (-0.5 * std * std * t * t).exp()).abs())
        .fold(0.0, f64::max)
}

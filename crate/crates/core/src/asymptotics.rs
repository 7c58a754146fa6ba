//! Closed-form limits of the polarization average over a centered Gaussian
//! strength function of width `s`, and envelope tools to compare them with
//! numerics.
//!
//! The formulas are implemented as printed in the literature, including
//! their phase conventions and normalization; in particular the large-`Δ`
//! `p_z` line yields `p_z(0)(2 − γ)` at `t = 0` rather than `p_z(0)`.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{check_times, Error, Result};
use crate::polarization::{Polarization, PolarizationSeries};
use crate::series::SeriesMeta;
use crate::special::{erf, gamma_fn};

/// Short-time small-`Δ` results are flagged beyond `tΔ` above this.
pub const SHORT_TIME_LIMIT: f64 = 0.3;
/// Long-time small-`Δ` results are flagged below `tΔ` under this.
pub const LONG_TIME_FLOOR: f64 = 3.0;
/// Ratios (`Δ/s` or `s/Δ`) above this draw a warning.
pub const SOFT_RATIO: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SmallDeltaShort,
    SmallDeltaLong,
    LargeDeltaAllTime,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::SmallDeltaShort => "small_delta_short",
            Regime::SmallDeltaLong => "small_delta_long",
            Regime::LargeDeltaAllTime => "large_delta_alltime",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub delta: f64,
    pub s: f64,
    pub regime: Regime,
    /// `tΔ` limit for the validity flag: an upper bound for the short-time
    /// regime, a lower bound for the long-time one, unused otherwise.
    pub validity: f64,
}

impl RegimeParams {
    /// Fails when the regime's small ratio is 1 or more.
    pub fn new(delta: f64, s: f64, regime: Regime) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("s must be positive, got {s}")));
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!("delta must be non-negative, got {delta}")));
        }
        let params = RegimeParams { delta, s, regime, validity: 0.0 };
        if params.ratio() >= 1.0 {
            return Err(Error::invalid(format!("{} needs a ratio below 1, got {:.3}", regime.name(), params.ratio())));
        }
        let validity = match regime {
            Regime::SmallDeltaShort => SHORT_TIME_LIMIT,
            Regime::SmallDeltaLong => LONG_TIME_FLOOR,
            Regime::LargeDeltaAllTime => 0.0,
        };
        Ok(RegimeParams { validity, ..params })
    }

    pub fn with_validity(mut self, validity: f64) -> Self {
        self.validity = validity;
        self
    }

    /// `Δ/s` for the small-`Δ` regimes, `s/Δ` for the large one.
    pub fn ratio(&self) -> f64 {
        match self.regime {
            Regime::SmallDeltaShort | Regime::SmallDeltaLong => self.delta / self.s,
            Regime::LargeDeltaAllTime => self.s / self.delta,
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        let r = self.ratio();
        if r > SOFT_RATIO {
            vec![format!("{} used at ratio {r:.3}; the expansion is only asymptotic", self.regime.name())]
        } else {
            Vec::new()
        }
    }

    /// `γ(Δ/(√2 s))`.
    pub fn gamma(&self) -> f64 {
        gamma_fn(self.delta / (SQRT_2 * self.s)).expect("delta is non-negative")
    }

    fn is_valid(&self, t: f64) -> bool {
        let td = t.abs() * self.delta;
        match self.regime {
            Regime::SmallDeltaShort => td <= self.validity,
            Regime::SmallDeltaLong => td >= self.validity,
            Regime::LargeDeltaAllTime => true,
        }
    }
}

fn check_regime(params: &RegimeParams, expected: Regime) -> Result<()> {
    if params.regime != expected {
        return Err(Error::invalid(format!(
            "{} formula called with {} parameters",
            expected.name(),
            params.regime.name()
        )));
    }
    Ok(())
}

fn build(
    p0: Polarization,
    params: &RegimeParams,
    times: &[f64],
    f: impl Fn(f64) -> Polarization,
) -> Result<PolarizationSeries> {
    check_times(times)?;
    let values = times.iter().map(|&t| f(t)).collect();
    let flags = times.iter().map(|&t| params.is_valid(t)).collect();
    let meta = SeriesMeta::new(params.regime.name())
        .with_eta(0.0, params.s)
        .note("delta", params.delta)
        .note("regime", params.regime.name())
        .note("p0", format!("{} {} {}", p0.px, p0.py, p0.pz));
    Ok(PolarizationSeries::from_parts(times.to_vec(), values, flags, meta))
}

/// Taylor expansion in `Δ` for `t ≪ 1/Δ`.
pub fn small_delta_short(p0: Polarization, params: &RegimeParams, times: &[f64]) -> Result<PolarizationSeries> {
    check_regime(params, Regime::SmallDeltaShort)?;
    let (d, s) = (params.delta, params.s);
    build(p0, params, times, |t| {
        let damp = (-2.0 * t * t * s * s).exp();
        let drift = d / s * (PI / 2.0).sqrt() * erf(SQRT_2 * s * t);
        Polarization::new(p0.px * damp, p0.py * damp - p0.pz * drift, p0.pz + p0.py * drift)
    })
}

/// Stationary-phase result for `t ≫ 1/Δ`.
pub fn small_delta_long(p0: Polarization, params: &RegimeParams, times: &[f64]) -> Result<PolarizationSeries> {
    check_regime(params, Regime::SmallDeltaLong)?;
    let (d, s) = (params.delta, params.s);
    let gamma = params.gamma();
    build(p0, params, times, |t| {
        let amp = (d / (2.0 * s * s * t)).sqrt();
        let tail = 1.0 / (8.0 * d * s * s * t * t * t).sqrt();
        let (sin, cos) = (2.0 * d * t + FRAC_PI_4).sin_cos();
        Polarization::new(
            p0.px * (gamma + tail * (2.0 * d * t + 3.0 * FRAC_PI_4).cos()),
            amp * (p0.py * cos - p0.pz * sin),
            p0.pz * (1.0 - gamma + amp * cos) + p0.py * amp * sin,
        )
    })
}

/// Expansion `Ω ≈ Δ + B²/2Δ`, valid at all times for `s ≪ Δ`.
pub fn large_delta_alltime(p0: Polarization, params: &RegimeParams, times: &[f64]) -> Result<PolarizationSeries> {
    check_regime(params, Regime::LargeDeltaAllTime)?;
    let (d, s) = (params.delta, params.s);
    let gamma = params.gamma();
    build(p0, params, times, |t| {
        let u = 2.0 * s * s * t / d;
        let a = u.atan();
        let base = 1.0 + u * u;
        let env_x = base.powf(-0.75);
        let env = base.powf(-0.25);
        let (sin, cos) = (2.0 * d * t + 0.5 * a).sin_cos();
        Polarization::new(
            p0.px * (gamma + s * s / (d * d) * (2.0 * d * t + 1.5 * a).cos() * env_x),
            env * (p0.py * cos - p0.pz * sin),
            p0.pz * (1.0 - gamma + cos * env) + p0.py * sin * env,
        )
    })
}

pub fn evaluate(p0: Polarization, params: &RegimeParams, times: &[f64]) -> Result<PolarizationSeries> {
    match params.regime {
        Regime::SmallDeltaShort => small_delta_short(p0, params, times),
        Regime::SmallDeltaLong => small_delta_long(p0, params, times),
        Regime::LargeDeltaAllTime => large_delta_alltime(p0, params, times),
    }
}

/// Uniform grid on `[start, stop]` with exactly `samples_per_period` samples
/// per carrier period `π/Δ`.
pub fn carrier_grid(delta: f64, start: f64, stop: f64, samples_per_period: usize) -> Result<Vec<f64>> {
    if !(delta > 0.0) || samples_per_period == 0 || !(stop > start) {
        return Err(Error::invalid("carrier grid needs delta > 0, samples > 0 and stop > start"));
    }
    let step = PI / (delta * samples_per_period as f64);
    let count = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// Mean and amplitude of one carrier period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeWindow {
    pub t_start: f64,
    pub t_end: f64,
    /// Window mean, the slowly varying plateau.
    pub center: f64,
    /// `√(2·variance)`, the amplitude of a sinusoid with that variance.
    pub amplitude: f64,
}

impl EnvelopeWindow {
    pub fn upper(&self) -> f64 {
        self.center + self.amplitude
    }

    pub fn lower(&self) -> f64 {
        self.center - self.amplitude
    }
}

/// Splits a carrier-grid signal into consecutive non-overlapping windows of
/// `samples_per_period` samples; a ragged tail is dropped.
pub fn envelope_windows(times: &[f64], values: &[f64], samples_per_period: usize) -> Vec<EnvelopeWindow> {
    let m = samples_per_period.max(1);
    times
        .chunks_exact(m)
        .zip(values.chunks_exact(m))
        .map(|(t, v)| {
            let mean = v.iter().sum::<f64>() / m as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
            EnvelopeWindow { t_start: t[0], t_end: t[m - 1], center: mean, amplitude: (2.0 * var).sqrt() }
        })
        .collect()
}

/// Worst relative disagreement between the upper and lower envelopes of two
/// signals on the same carrier grid, measured against the reference `formula`:
/// `|E_numeric − E_formula| / max(|E_formula|, A_formula)` over all windows.
/// `None` when the formula vanishes identically.
pub fn envelope_relative_error(
    times: &[f64],
    numeric: &[f64],
    formula: &[f64],
    samples_per_period: usize,
) -> Option<f64> {
    if formula.iter().all(|v| v.abs() < 1e-12) {
        return None;
    }
    let a = envelope_windows(times, numeric, samples_per_period);
    let b = envelope_windows(times, formula, samples_per_period);
    let worst = a
        .iter()
        .zip(&b)
        .map(|(q, f)| {
            let scale_u = f.upper().abs().max(f.amplitude);
            let scale_l = f.lower().abs().max(f.amplitude);
            let eu = if scale_u > 0.0 { (q.upper() - f.upper()).abs() / scale_u } else { 0.0 };
            let el = if scale_l > 0.0 { (q.lower() - f.lower()).abs() / scale_l } else { 0.0 };
            eu.max(el)
        })
        .fold(0.0, f64::max);
    Some(worst)
}

/// Linearly interpolated zero crossings.
pub fn zero_crossings(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..times.len().min(values.len()) {
        let (a, b) = (values[i - 1], values[i]);
        if a == 0.0 {
            out.push(times[i - 1]);
        } else if a * b < 0.0 {
            out.push(times[i - 1] + (times[i] - times[i - 1]) * a / (a - b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linspace;

    #[test]
    fn regime_ratio_rules() {
        assert!(RegimeParams::new(1.0, 1.0, Regime::SmallDeltaShort).is_err());
        assert!(RegimeParams::new(5.0, 1.0, Regime::SmallDeltaLong).is_err());
        assert!(RegimeParams::new(0.5, 1.0, Regime::LargeDeltaAllTime).is_err());
        assert!(RegimeParams::new(0.5, 0.0, Regime::SmallDeltaShort).is_err());
        let p = RegimeParams::new(0.5, 1.0, Regime::SmallDeltaShort).unwrap();
        assert_eq!(p.warnings().len(), 1);
        let p = RegimeParams::new(0.1, 1.0, Regime::SmallDeltaShort).unwrap();
        assert!(p.warnings().is_empty());
    }

    #[test]
    fn short_time_starts_at_p0() {
        let p0 = Polarization::new(0.48, 0.6, 0.64);
        let p = RegimeParams::new(0.1, 1.0, Regime::SmallDeltaShort).unwrap();
        let s = small_delta_short(p0, &p, &[0.0, 0.5]).unwrap();
        assert_eq!(s.values()[0], p0);
    }

    #[test]
    fn short_time_without_field_is_gaussian() {
        let p0 = Polarization::new(0.6, 0.8, 0.0);
        let p = RegimeParams::new(0.0, 2.0, Regime::SmallDeltaShort).unwrap();
        let t = linspace(0.0, 1.0, 11);
        let s = small_delta_short(p0, &p, &t).unwrap();
        for (&t, v) in t.iter().zip(s.values()) {
            let damp = (-8.0 * t * t).exp();
            assert!((v.px - 0.6 * damp).abs() < 1e-15 && (v.py - 0.8 * damp).abs() < 1e-15 && v.pz == 0.0);
        }
    }

    #[test]
    fn validity_flags() {
        let p = RegimeParams::new(0.1, 1.0, Regime::SmallDeltaLong).unwrap();
        let s = small_delta_long(Polarization::X, &p, &[10.0, 29.0, 30.0, 100.0]).unwrap();
        assert_eq!(s.flags(), &[false, false, true, true]);
        let p = RegimeParams::new(0.1, 1.0, Regime::SmallDeltaShort).unwrap();
        let s = small_delta_short(Polarization::X, &p, &[1.0, 2.9, 3.1]).unwrap();
        assert_eq!(s.flags(), &[true, true, false]);
    }

    #[test]
    fn wrong_regime_is_rejected() {
        let p = RegimeParams::new(0.1, 1.0, Regime::SmallDeltaLong).unwrap();
        assert!(large_delta_alltime(Polarization::X, &p, &[1.0]).is_err());
    }

    #[test]
    fn large_delta_long_time_reduces_to_stationary_phase() {
        // the two printed forms share their t ≫ Δ/s² limit (γ kept at its value)
        let (d, s) = (5.0, 1.0);
        let large = RegimeParams::new(d, s, Regime::LargeDeltaAllTime).unwrap();
        let long = RegimeParams { regime: Regime::SmallDeltaLong, ..large };
        let t = linspace(500.0, 520.0, 41);
        for p0 in [Polarization::X, Polarization::Y, Polarization::Z] {
            let a = large_delta_alltime(p0, &large, &t).unwrap();
            let b = small_delta_long(p0, &long, &t).unwrap();
            assert!(a.max_diff(&b).unwrap() < 0.01);
        }
    }

    #[test]
    fn large_delta_px_stays_in_band() {
        let (d, s) = (5.0, 1.0);
        let p = RegimeParams::new(d, s, Regime::LargeDeltaAllTime).unwrap();
        let gamma = p.gamma();
        let band = 2.0 * s * s / (d * d);
        let t = linspace(0.0, 50.0, 5001);
        for v in large_delta_alltime(Polarization::X, &p, &t).unwrap().values() {
            assert!(v.px >= gamma - band && v.px <= gamma + band);
        }
    }

    #[test]
    fn large_delta_initial_normalization() {
        // γ(Δ/√2 s) + s²/Δ² − 1 = 3 (s/Δ)⁴ + O((s/Δ)⁶)
        let (d, s) = (5.0, 1.0);
        let p = RegimeParams::new(d, s, Regime::LargeDeltaAllTime).unwrap();
        let px0 = large_delta_alltime(Polarization::X, &p, &[0.0]).unwrap().values()[0].px;
        let r4 = (s / d).powi(4);
        assert!((px0 - 1.0).abs() < 3.5 * r4, "{}", px0 - 1.0);
        for ratio in [10.0, 20.0, 40.0] {
            let p = RegimeParams::new(ratio, 1.0, Regime::LargeDeltaAllTime).unwrap();
            let px0 = large_delta_alltime(Polarization::X, &p, &[0.0]).unwrap().values()[0].px;
            let lead = 3.0 / ratio.powi(4);
            assert!(((px0 - 1.0) - lead).abs() < 20.0 / ratio.powi(6));
        }
    }

    #[test]
    fn large_delta_crossover_at_envelope_intersection() {
        // early envelope ≈ 1, late envelope ≈ u^(-1/2); the asymptotes meet at t = Δ/2s²
        let (d, s) = (5.0, 1.0);
        let t_cross = d / (2.0 * s * s);
        let p = RegimeParams::new(d, s, Regime::LargeDeltaAllTime).unwrap();
        let grid = carrier_grid(d, 0.0, 20.0 * t_cross, 32).unwrap();
        let series = large_delta_alltime(Polarization::Z, &p, &grid).unwrap();
        let windows = envelope_windows(&grid, &series.pz(), 32);
        assert!(windows[0].amplitude > 0.97);
        let late = windows.iter().rev().find(|w| w.t_start < 10.0 * t_cross).unwrap();
        let tm = 0.5 * (late.t_start + late.t_end);
        let asym = (2.0 * s * s * tm / d).powf(-0.5);
        assert!((late.amplitude / asym - 1.0).abs() < 0.05);
        assert!(((2.0 * s * s * t_cross / d).powf(-0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn envelopes_of_a_pure_sinusoid() {
        let d = 2.0;
        let t = carrier_grid(d, 0.0, 10.0, 16).unwrap();
        let v: Vec<f64> = t.iter().map(|t| 0.3 + 0.5 * (2.0 * d * t + 0.4).cos()).collect();
        for w in envelope_windows(&t, &v, 16) {
            assert!((w.center - 0.3).abs() < 1e-12 && (w.amplitude - 0.5).abs() < 1e-12);
        }
        assert_eq!(envelope_relative_error(&t, &v, &v, 16), Some(0.0));
        assert_eq!(envelope_relative_error(&t, &v, &vec![0.0; v.len()], 16), None);
    }

    #[test]
    fn crossings_of_cosine() {
        let t = linspace(0.0, 10.0, 2001);
        let v: Vec<f64> = t.iter().map(|t| t.cos()).collect();
        let z = zero_crossings(&t, &v);
        assert_eq!(z.len(), 3);
        assert!((z[0] - PI / 2.0).abs() < 1e-5);
    }
}

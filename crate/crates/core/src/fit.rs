//! Gaussian versus exponential decay discrimination.

use serde::{Deserialize, Serialize};

use crate::series::ComplexSeries;

pub const FIT_WINDOW_LOW: f64 = 1e-3;
pub const FIT_WINDOW_HIGH: f64 = 0.9;
/// `|r|` must dip below the upper window edge and stay above this floor
/// somewhere for a fit to be attempted.
pub const FIT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayShape {
    Gaussian,
    Exponential,
}

/// Least-squares comparison of `ln|r| = a − k t` and `ln|r| = a − k t²` on
/// the samples with `window_low ≤ |r| ≤ window_high`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    /// False when the window holds too few samples; the other fields are then
    /// empty.
    pub applicable: bool,
    pub gaussian_r2: Option<f64>,
    pub exponential_r2: Option<f64>,
    pub best: Option<DecayShape>,
    /// `k` of the better model.
    pub fitted_rate: Option<f64>,
    pub window_low: f64,
    pub window_high: f64,
    pub points: usize,
}

pub fn decay_shape_fit(series: &ComplexSeries) -> ShapeReport {
    decay_shape_fit_abs(series.times(), &series.abs())
}

pub fn decay_shape_fit_abs(times: &[f64], abs: &[f64]) -> ShapeReport {
    decay_shape_fit_window(times, abs, FIT_WINDOW_LOW, FIT_WINDOW_HIGH)
}

pub fn decay_shape_fit_window(times: &[f64], abs: &[f64], low: f64, high: f64) -> ShapeReport {
    let mut report = ShapeReport {
        applicable: false,
        gaussian_r2: None,
        exponential_r2: None,
        best: None,
        fitted_rate: None,
        window_low: low,
        window_high: high,
        points: 0,
    };
    let decays = abs.iter().any(|&a| a < high && a > FIT_FLOOR);
    let (t, y): (Vec<f64>, Vec<f64>) =
        times.iter().zip(abs).filter(|(_, &a)| a >= low && a <= high).map(|(&t, &a)| (t, a.ln())).unzip();
    report.points = t.len();
    if !decays || t.len() < 3 {
        return report;
    }
    let exp = linear_fit(&t, &y);
    let t2: Vec<f64> = t.iter().map(|x| x * x).collect();
    let gauss = linear_fit(&t2, &y);
    let (Some(exp), Some(gauss)) = (exp, gauss) else {
        return report;
    };
    report.applicable = true;
    report.exponential_r2 = Some(exp.r2);
    report.gaussian_r2 = Some(gauss.r2);
    let (shape, fit) = if exp.r2 > gauss.r2 { (DecayShape::Exponential, exp) } else { (DecayShape::Gaussian, gauss) };
    report.best = Some(shape);
    report.fitted_rate = Some(-fit.slope);
    report
}

struct LineFit {
    slope: f64,
    r2: f64,
}

fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Some(LineFit { slope, r2 })
}

//! Error functions and the surviving-polarization fraction `γ(x)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

const CF_SWITCH: f64 = 2.0;

/// Scaled complementary error function `e^{x²} erfc(x)`.
///
/// Below `x = 2` the product is formed directly. Above it the continued
/// fraction
/// `erfcx(x) = 1/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`
/// is evaluated with the modified Lentz method.
pub fn erfcx(x: f64) -> f64 {
    if x < CF_SWITCH {
        return (x * x).exp() * erfc(x);
    }
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (f * PI.sqrt())
}

/// `γ(x) = √π x e^{x²} erfc(x)`, the fraction of transverse polarization that
/// survives at long times when `x = Δ / (√2 s)`.
///
/// Monotone on `[0, ∞)` with `γ(0) = 0` and `γ(x) = 1 − 1/(2x²) + O(x⁻⁴)`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("gamma_fn needs x >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(PI.sqrt() * x * erfcx(x))
}

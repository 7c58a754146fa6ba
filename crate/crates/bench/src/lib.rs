//! Shared fixtures for the benchmarks.

use spinbath_core::numeric::linspace;
use spinbath_core::{sample_couplings, Couplings, DistributionKind, DistributionSpec, EnvProductState};

pub fn gaussian_bath(n: usize, seed: u64) -> (Couplings, EnvProductState) {
    let spec = DistributionSpec::new(DistributionKind::Gaussian, 0.0, 1.0, seed).expect("valid spec");
    let g = sample_couplings(&spec, n).expect("sampling succeeds");
    (g, EnvProductState::uniform(0.5, n).expect("valid weight"))
}

pub fn grid(stop: f64, count: usize) -> Vec<f64> {
    linspace(0.0, stop, count)
}

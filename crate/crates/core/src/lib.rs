//! Exact and asymptotic decoherence of a central spin coupled to a bath of
//! independent spins.
//!
//! The environment enters only through the distribution of the energies
//! `B_n = Σ_k ±g_k` seen by the central spin (the strength function). The
//! crate builds that distribution exactly or in its Gaussian limit, computes
//! the decoherence factor `r(t)` three independent ways, and follows the full
//! Bloch vector when the central spin also has a transverse field `Δ`.
//!
//! Units: `ħ = 1`; times are inverse energies.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod decoherence;
pub mod distributions;
pub mod dynamics;
mod enumerate;
pub mod error;
pub mod export;
pub mod fit;
pub mod numeric;
pub mod pointer;
pub mod polarization;
pub mod quadrature;
pub mod rng;
pub mod series;
pub mod special;
pub mod strength;

pub use asymptotics::{Regime, RegimeParams};
pub use decoherence::{
    ensemble, gaussian_approximant, loschmidt_overlap, r_from_eta, r_product, r_random_env, Ensemble,
};
pub use distributions::{
    eta_stats, lindeberg_ratio, sample_couplings, Couplings, DistributionKind, DistributionSpec, EnvProductState,
    EtaStats,
};
pub use dynamics::{kernel, omega, polarization_exact, polarization_quadrature, polarization_resolved};
pub use error::{Error, Result};
pub use fit::{decay_shape_fit, DecayShape, ShapeReport};
pub use pointer::{residual_polarization, two_field_toy, BasisThresholds, PointerBasis, PointerReport};
pub use polarization::{Polarization, PolarizationSeries};
pub use rng::RNG_ALGORITHM;
pub use series::{ComplexSeries, SeriesMeta};
pub use special::gamma_fn;
pub use strength::{
    binomial_eta, enumerate_eta, histogram_eta, random_state_eta, DiscreteEta, EnvGenericState, Histogram,
    StrengthFunction,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

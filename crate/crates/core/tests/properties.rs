use proptest::prelude::*;

use spinbath_core::asymptotics::{evaluate, Regime, RegimeParams};
use spinbath_core::decoherence::{loschmidt_overlap, r_from_eta, r_product};
use spinbath_core::dynamics::{kernel, polarization_quadrature};
use spinbath_core::export::{
    complex_series_csv, parse_complex_series, parse_polarization_series, polarization_series_csv,
};
use spinbath_core::numeric::linspace;
use spinbath_core::pointer::residual_polarization;
use spinbath_core::strength::{binomial_eta, enumerate_eta, histogram_eta};
use spinbath_core::{
    eta_stats, gamma_fn, lindeberg_ratio, sample_couplings, ComplexSeries, Couplings, DistributionKind,
    DistributionSpec, EnvProductState, Polarization, PolarizationSeries, SeriesMeta, StrengthFunction,
};

use num_complex::Complex64;
use std::path::Path;

fn bath(max_n: usize) -> impl Strategy<Value = (Couplings, EnvProductState)> {
    (1..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(-3.0..3.0f64, n), prop::collection::vec(0.0..=1.0f64, n))
            .prop_map(|(g, w)| (Couplings::new(g).unwrap(), EnvProductState::new(w).unwrap()))
    })
}

fn ball() -> impl Strategy<Value = Polarization> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..=1.0f64).prop_map(|(x, y, z, r)| {
        let n = (x * x + y * y + z * z).sqrt().max(1e-9);
        Polarization::new(x / n * r, y / n * r, z / n * r)
    })
}

fn kind() -> impl Strategy<Value = DistributionKind> {
    prop_oneof![Just(DistributionKind::Uniform), Just(DistributionKind::Gaussian), Just(DistributionKind::Lorentzian)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampling_is_reproducible(k in kind(), c in -2.0..2.0f64, w in 0.01..3.0f64, seed: u64, n in 1usize..200) {
        let spec = DistributionSpec::new(k, c, w, seed).unwrap();
        prop_assert_eq!(sample_couplings(&spec, n).unwrap(), sample_couplings(&spec, n).unwrap());
    }

    #[test]
    fn stats_equal_enumerated_moments((g, env) in bath(12)) {
        let stats = eta_stats(&g, &env).unwrap();
        let (mean, std) = enumerate_eta(&g, &env).unwrap().moments();
        prop_assert!((mean - stats.mean).abs() <= 1e-12 * stats.mean.abs().max(stats.std).max(1e-3));
        prop_assert!((std - stats.std).abs() <= 1e-12 * stats.std.max(1e-3) + 1e-13);
    }

    #[test]
    fn lindeberg_in_range((g, env) in bath(20)) {
        if let Ok(r) = lindeberg_ratio(&g, &env) {
            let n = g.len() as f64;
            prop_assert!(r >= 1.0 / n - 1e-15 && r <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn equal_bath_collapses_to_binomial(n in 1usize..=16, g in 0.1..2.0f64, w in 0.0..=1.0f64) {
        let eta = enumerate_eta(&Couplings::equal(g, n).unwrap(), &EnvProductState::uniform(w, n).unwrap()).unwrap();
        let merged = eta.merged();
        let binom = binomial_eta(g, w, n).unwrap();
        prop_assert_eq!(merged.len(), binom.len());
        for ((e1, w1), (e2, w2)) in merged.points().zip(binom.points()) {
            prop_assert!((e1 - e2).abs() < 1e-12 * g * n as f64);
            prop_assert!((w1 - w2).abs() < 1e-12);
        }
        prop_assert!((merged.total_mass() - eta.total_mass()).abs() < 1e-15);
    }

    #[test]
    fn half_weights_give_even_eta(g in prop::collection::vec(0.1..3.0f64, 1..12)) {
        let n = g.len();
        let eta = enumerate_eta(&Couplings::new(g).unwrap(), &EnvProductState::uniform(0.5, n).unwrap()).unwrap();
        let m = eta.merged();
        let k = m.len();
        for i in 0..k {
            prop_assert!((m.energies()[i] + m.energies()[k - 1 - i]).abs() < 1e-9);
            prop_assert!((m.weights()[i] - m.weights()[k - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn histogram_mass((g, env) in bath(10), bins in 1usize..50) {
        let h = histogram_eta(&enumerate_eta(&g, &env).unwrap(), bins).unwrap();
        prop_assert!((h.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decoherence_bounded_and_hermitian((g, env) in bath(16), t in 0.0..50.0f64) {
        let r = r_product(&g, &env, &[-t, t]).unwrap();
        let (a, b) = (r.values()[0], r.values()[1]);
        prop_assert!(b.norm() <= 1.0 + 1e-12);
        prop_assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn unbiased_bath_has_real_r(g in prop::collection::vec(-3.0..3.0f64, 1..16), t in 0.0..50.0f64) {
        let n = g.len();
        let r = r_product(&Couplings::new(g).unwrap(), &EnvProductState::uniform(0.5, n).unwrap(), &[t]).unwrap();
        prop_assert!(r.values()[0].im.abs() < 1e-12);
    }

    #[test]
    fn three_routes_agree((g, env) in bath(10), t in prop::collection::vec(0.0..30.0f64, 1..8)) {
        let mut t = t;
        t.sort_by(|a, b| a.total_cmp(b));
        t.dedup();
        let a = r_product(&g, &env, &t).unwrap();
        let b = r_from_eta(&enumerate_eta(&g, &env).unwrap().into(), &t).unwrap();
        let c = loschmidt_overlap(&g, &env, &t).unwrap();
        prop_assert!(a.max_component_diff(&b).unwrap() < 1e-12);
        prop_assert!(a.max_component_diff(&c).unwrap() < 1e-12);
    }

    #[test]
    fn kernel_preserves_norm(p0 in ball(), d in -5.0..5.0f64, b in -5.0..5.0f64, t in -20.0..20.0f64) {
        prop_assert!((kernel(p0, d, b, t).norm() - p0.norm()).abs() < 1e-12);
    }

    #[test]
    fn kernel_time_parity(px in -0.7..0.7f64, pz in -0.7..0.7f64, d in 0.0..5.0f64, b in -5.0..5.0f64, t in 0.0..20.0f64) {
        let p0 = Polarization::new(px, 0.0, pz);
        let f = kernel(p0, d, b, t);
        let r = kernel(p0, d, b, -t);
        prop_assert!((f.px - r.px).abs() < 1e-12);
        prop_assert!((f.pz - r.pz).abs() < 1e-12);
        prop_assert!((f.py + r.py).abs() < 1e-12);
    }

    #[test]
    fn quadrature_purity(p0 in ball(), d in 0.0..5.0f64, t in 0.0..3.0f64) {
        let q = polarization_quadrature(&StrengthFunction::gaussian(0.0, 1.0).unwrap(), p0, d, &[t], 64).unwrap();
        let purity = q.values()[0].purity().unwrap();
        prop_assert!((0.5..=1.0 + 1e-12).contains(&purity));
    }

    #[test]
    fn gamma_is_increasing(a in 0.0..40.0f64, b in 0.0..40.0f64) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(gamma_fn(hi).unwrap() > gamma_fn(lo).unwrap());
        prop_assert!(gamma_fn(hi).unwrap() < 1.0);
    }

    #[test]
    fn classification_is_scale_free(p0 in ball(), d in 0.0..10.0f64, s in 0.01..10.0f64, c in 0.01..100.0f64) {
        let a = residual_polarization(p0, d, s).unwrap();
        let b = residual_polarization(p0, c * d, c * s).unwrap();
        prop_assert_eq!(a.basis, b.basis);
        prop_assert!((a.gamma_value - b.gamma_value).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_norm_slack(p0 in ball(), small in 0.001..0.2f64, large in 5.0..50.0f64, t in 0.0..1.0f64) {
        let s = 1.0;
        let checks = [
            (RegimeParams::new(small * s, s, Regime::SmallDeltaShort).unwrap(), t * 0.3 / small),
            (RegimeParams::new(small * s, s, Regime::SmallDeltaLong).unwrap(), 3.0 / small + t * 1e4),
            (RegimeParams::new(large * s, s, Regime::LargeDeltaAllTime).unwrap(), t * 100.0),
        ];
        for (params, time) in checks {
            let v = evaluate(p0, &params, &[time]).unwrap().values()[0];
            prop_assert!(v.norm() <= p0.norm() + 0.05, "{:?} at t={}: {}", params.regime, time, v.norm());
        }
    }

    #[test]
    fn complex_csv_round_trip(raw in prop::collection::vec((-1e3..1e3f64, -1.0..1.0f64, -1.0..1.0f64), 0..40)) {
        let mut t: Vec<f64> = raw.iter().map(|r| r.0).collect();
        t.sort_by(|a, b| a.total_cmp(b));
        t.dedup();
        let values: Vec<Complex64> = raw.iter().take(t.len()).map(|r| Complex64::new(r.1, r.2)).collect();
        let series = ComplexSeries::new(t, values, SeriesMeta::new("prop").with_n(3).note("k", "v")).unwrap();
        let back = parse_complex_series(&complex_series_csv(&series), Path::new("mem")).unwrap();
        prop_assert_eq!(back, series);
    }

    #[test]
    fn polarization_csv_round_trip(raw in prop::collection::vec((-1e3..1e3f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, any::<bool>()), 0..40)) {
        let mut t: Vec<f64> = raw.iter().map(|r| r.0).collect();
        t.sort_by(|a, b| a.total_cmp(b));
        t.dedup();
        let k = t.len();
        let values = raw.iter().take(k).map(|r| Polarization::new(r.1, r.2, r.3)).collect();
        let flags = raw.iter().take(k).map(|r| r.4).collect();
        let series = PolarizationSeries::new(t, values, flags, SeriesMeta::new("prop").with_eta(0.0, 1.5)).unwrap();
        let back = parse_polarization_series(&polarization_series_csv(&series), Path::new("mem")).unwrap();
        prop_assert_eq!(back, series);
    }
}

#[test]
fn linspace_is_strictly_increasing() {
    let t = linspace(0.0, 1.0, 1000);
    assert!(t.windows(2).all(|w| w[1] > w[0]));
}

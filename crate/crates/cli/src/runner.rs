use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};
use spinbath_core::decoherence::gaussian_law_deviation;
use spinbath_core::dynamics::polarization_from_eta;
use spinbath_core::export;
use spinbath_core::fit::decay_shape_fit_abs;
use spinbath_core::numeric::linspace;
use spinbath_core::pointer::residual_polarization_with;
use spinbath_core::strength::enumerate_eta_capped;
use spinbath_core::{
    asymptotics, decay_shape_fit, ensemble, eta_stats, gaussian_approximant, lindeberg_ratio, loschmidt_overlap,
    polarization_quadrature, polarization_resolved, r_from_eta, r_product, sample_couplings, Couplings, DiscreteEta,
    EnvProductState, Error, EtaStats, PolarizationSeries, Regime, RegimeParams, SeriesMeta, StrengthFunction,
};

use crate::config::{ConfigError, EtaModel, Experiment, Format, QuadratureKind, RunConfig, TimeUnits, WeightsSpec};
use crate::report::{Comparison, EnergyUnit, FileEntry, RunReport, StageTiming, TimeSpan, REPORT_FORMAT, UNITS};

pub const REPORT_FILE: &str = "report.json";

pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CONVERGENCE: i32 = 3;
    pub const RESOURCE: i32 = 4;
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output.directory`.
    pub out: Option<PathBuf>,
    /// Overrides `numerics.threads`.
    pub threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => exit::CONFIG,
            RunError::Core(Error::ResourceLimit { .. }) => exit::RESOURCE,
            RunError::Core(Error::Io { .. } | Error::Parse { .. }) => exit::INTERNAL,
            RunError::Core(_) => exit::CONFIG,
            RunError::Io { .. } | RunError::Pool(_) => exit::INTERNAL,
        }
    }
}

/// A finished run. `report.exit_code` is [`exit::CONVERGENCE`] when any
/// sample failed its convergence check; all files are written regardless.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub directory: PathBuf,
}

struct Stages(Vec<StageTiming>);

impl Stages {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push(StageTiming { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }
}

struct Bath {
    g: Couplings,
    env: EnvProductState,
    stats: EtaStats,
}

/// Everything an experiment produces before files hit the disk.
struct Product {
    report: RunReport,
    files: Vec<(String, String)>,
}

impl Product {
    fn add(&mut self, cfg: &RunConfig, format: Format, name: &str, text: String) {
        if cfg.output.formats.contains(&format) {
            self.files.push((name.to_string(), text));
        }
    }

    fn flag_series(&mut self, name: &str, series: &PolarizationSeries) {
        let bad = series.flags().iter().filter(|f| !**f).count();
        if bad > 0 {
            self.report.flags.push(format!("{name}: {bad} of {} samples failed the convergence check", series.len()));
        }
    }
}

pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<Outcome, RunError> {
    let total = Instant::now();
    let mut stages = Stages(Vec::new());
    let (cfg, pool, threads) = stages.time("setup", || -> Result<_, RunError> {
        let mut cfg = config.clone();
        if let Some(dir) = &opts.out {
            cfg.output.directory = dir.clone();
        }
        if let Some(k) = opts.threads {
            cfg.numerics.threads = Some(k);
        }
        cfg.validate()?;
        let threads =
            cfg.numerics.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let pool =
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| RunError::Pool(e.to_string()))?;
        Ok((cfg, pool, threads))
    })?;
    let mut product = pool.install(|| compute(&cfg, threads, &mut stages))?;

    let dir = cfg.output.directory.clone();
    stages.time("write", || write_files(&dir, &mut product))?;
    let mut report = product.report;
    report.exit_code = if report.flags.is_empty() { exit::OK } else { exit::CONVERGENCE };
    report.timings = stages.0;
    // serializing the report itself is the only untimed work
    report.total_seconds = total.elapsed().as_secs_f64();
    let path = dir.join(REPORT_FILE);
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    fs::write(&path, json).map_err(|source| RunError::Io { path, source })?;
    Ok(Outcome { report, directory: dir })
}

fn write_files(dir: &Path, product: &mut Product) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    for (name, text) in &product.files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|source| RunError::Io { path: path.clone(), source })?;
        product.report.files.push(FileEntry {
            path: PathBuf::from(name),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
            bytes: text.len() as u64,
        });
    }
    Ok(())
}

fn empty_report(cfg: &RunConfig, threads: usize, span: TimeSpan) -> RunReport {
    RunReport {
        format: REPORT_FORMAT.into(),
        library_version: spinbath_core::VERSION.into(),
        rng_algorithm: spinbath_core::RNG_ALGORITHM.into(),
        units: UNITS.into(),
        energy_unit: EnergyUnit { reference: String::new(), value: 0.0 },
        threads,
        config: cfg.clone(),
        time_span: span,
        s: None,
        eta_stats: None,
        lindeberg_ratio: None,
        shape: None,
        shape_of_mean: None,
        gaussian_law_deviation: None,
        echo_max_deviation: None,
        pointer: None,
        pz_drift: None,
        comparisons: Vec::new(),
        flags: Vec::new(),
        warnings: Vec::new(),
        files: Vec::new(),
        timings: Vec::new(),
        total_seconds: 0.0,
        exit_code: exit::OK,
    }
}

fn draw_bath(cfg: &RunConfig) -> Result<Bath, RunError> {
    let m = &cfg.model;
    let g = sample_couplings(&m.couplings, m.n)?;
    let env = match &m.weights {
        WeightsSpec::Uniform(w) => EnvProductState::uniform(*w, m.n)?,
        WeightsSpec::PerSpin(ws) => EnvProductState::new(ws.clone())?,
    };
    let stats = eta_stats(&g, &env)?;
    Ok(Bath { g, env, stats })
}

fn grid(cfg: &RunConfig, s: Option<f64>) -> Result<Vec<f64>, RunError> {
    let t = &cfg.numerics.time;
    let scale = match t.units {
        TimeUnits::Absolute => 1.0,
        TimeUnits::InverseS => match s {
            Some(s) if s > 0.0 => 1.0 / s,
            _ => {
                return Err(ConfigError::Invalid(vec![
                    "numerics.time.units: inverse_s needs a positive s, and the drawn bath has s = 0".into(),
                ])
                .into())
            }
        },
    };
    Ok(linspace(t.start * scale, t.stop * scale, t.count))
}

fn positive_s(s: f64) -> Result<f64, RunError> {
    if s > 0.0 {
        Ok(s)
    } else {
        Err(ConfigError::Invalid(vec![
            "model.s: the drawn bath has s = 0; give model.s explicitly or use non-degenerate couplings".into(),
        ])
        .into())
    }
}

fn enumerated(cfg: &RunConfig, bath: &Bath) -> Result<DiscreteEta, RunError> {
    let eta = enumerate_eta_capped(&bath.g, &bath.env, cfg.numerics.enumeration_cap)?;
    Ok(if cfg.numerics.merge_degenerate { eta.merged() } else { eta })
}

fn compute(cfg: &RunConfig, threads: usize, stages: &mut Stages) -> Result<Product, RunError> {
    if cfg.experiment == Experiment::LorentzianEnsemble {
        let times = grid(cfg, None)?;
        let span = span_of(&times);
        let mut p = Product { report: empty_report(cfg, threads, span), files: Vec::new() };
        p.report.energy_unit = energy_unit(cfg, cfg.model.couplings.width, "couplings.width");
        return lorentzian(cfg, &times, &mut p, stages).map(|_| p);
    }
    let bath = stages.time("sample", || draw_bath(cfg))?;
    let s = cfg.model.s.unwrap_or(bath.stats.std);
    let times = grid(cfg, Some(s))?;
    let mut p = Product { report: empty_report(cfg, threads, span_of(&times)), files: Vec::new() };
    p.report.s = Some(s);
    p.report.energy_unit = energy_unit(cfg, s, "s");
    p.report.lindeberg_ratio = lindeberg_ratio(&bath.g, &bath.env).ok();
    p.report.eta_stats = Some(bath.stats.clone());
    stages.time("compute", || match cfg.experiment {
        Experiment::StrengthFunction => strength(cfg, &bath, &mut p),
        Experiment::DecoherenceFactor => decoherence(cfg, &bath, &times, &mut p),
        Experiment::Dynamics => dynamics(cfg, &bath, s, &times, &mut p),
        Experiment::AsymptoticsCompare => compare(cfg, &bath, s, &times, &mut p),
        Experiment::Pointer => pointer(cfg, &bath, s, &times, &mut p),
        Experiment::EchoIdentity => echo(cfg, &bath, &times, &mut p),
        Experiment::LorentzianEnsemble => unreachable!("handled above"),
    })?;
    Ok(p)
}

fn energy_unit(cfg: &RunConfig, fallback: f64, name: &str) -> EnergyUnit {
    let center = cfg.model.couplings.center;
    if center != 0.0 {
        EnergyUnit { reference: "couplings.center".into(), value: center.abs() }
    } else {
        EnergyUnit { reference: name.into(), value: fallback }
    }
}

fn span_of(times: &[f64]) -> TimeSpan {
    TimeSpan { start: times[0], stop: times[times.len() - 1], count: times.len() }
}

fn meta(cfg: &RunConfig, bath: &Bath, method: &str) -> SeriesMeta {
    SeriesMeta::new(method).with_n(cfg.model.n).with_spec(cfg.model.couplings).with_eta(bath.stats.mean, bath.stats.std)
}

fn strength(cfg: &RunConfig, bath: &Bath, p: &mut Product) -> Result<(), RunError> {
    let eta = enumerated(cfg, bath)?;
    let hist = spinbath_core::histogram_eta(&eta, cfg.numerics.histogram_bins)?;
    let m = meta(cfg, bath, "enumerate_eta").note("merged", cfg.numerics.merge_degenerate);
    p.add(cfg, Format::Csv, "eta_points.csv", export::discrete_eta_csv(&eta, &m));
    p.add(cfg, Format::Dat, "eta_histogram.dat", export::histogram_dat(&hist, Some(&bath.stats)));
    Ok(())
}

fn decoherence(cfg: &RunConfig, bath: &Bath, times: &[f64], p: &mut Product) -> Result<(), RunError> {
    let mut r = r_product(&bath.g, &bath.env, times)?;
    r.meta = meta(cfg, bath, &r.meta.method);
    let mut gauss = gaussian_approximant(bath.stats.mean, bath.stats.std, times)?;
    gauss.meta = meta(cfg, bath, &gauss.meta.method);
    p.report.shape = Some(decay_shape_fit(&r));
    p.report.gaussian_law_deviation = Some(gaussian_law_deviation(&r, bath.stats.std));
    p.add(cfg, Format::Csv, "r_product.csv", export::complex_series_csv(&r));
    p.add(cfg, Format::Csv, "r_gaussian.csv", export::complex_series_csv(&gauss));
    Ok(())
}

fn lorentzian(cfg: &RunConfig, times: &[f64], p: &mut Product, stages: &mut Stages) -> Result<(), RunError> {
    let WeightsSpec::Uniform(w) = cfg.model.weights else { unreachable!("validated") };
    let ens =
        stages.time("compute", || ensemble(&cfg.model.couplings, cfg.model.n, w, cfg.numerics.ensemble_size, times))?;
    p.report.shape = Some(decay_shape_fit_abs(times, &ens.mean_abs));
    p.report.shape_of_mean = Some(decay_shape_fit(&ens.mean));
    p.add(cfg, Format::Csv, "ensemble.csv", export::ensemble_csv(&ens));
    Ok(())
}

fn polarization_series(
    cfg: &RunConfig,
    bath: &Bath,
    s: f64,
    times: &[f64],
    p: &mut Product,
) -> Result<PolarizationSeries, RunError> {
    let (p0, delta) = (cfg.p0(), cfg.model.delta);
    let mut series = match cfg.model.eta {
        EtaModel::Exact => polarization_from_eta(&enumerated(cfg, bath)?, p0, delta, times)?,
        EtaModel::Gaussian => {
            let s = positive_s(s)?;
            if bath.stats.mean.abs() > 1e-12 * s {
                p.report.warnings.push(format!(
                    "eta_mean = {:.6e} is ignored: the Gaussian strength function is centered",
                    bath.stats.mean
                ));
            }
            let eta = StrengthFunction::gaussian(0.0, s)?;
            match cfg.numerics.quadrature {
                QuadratureKind::GaussHermite => {
                    polarization_quadrature(&eta, p0, delta, times, cfg.numerics.quadrature_nodes)?
                }
                QuadratureKind::Panels => polarization_resolved(&eta, p0, delta, times)?,
            }
        }
    };
    series.meta.n = Some(cfg.model.n);
    series.meta.spec = Some(cfg.model.couplings);
    series.meta.seed = Some(cfg.model.couplings.seed);
    p.flag_series("polarization.csv", &series);
    Ok(series)
}

fn dynamics(cfg: &RunConfig, bath: &Bath, s: f64, times: &[f64], p: &mut Product) -> Result<(), RunError> {
    let series = polarization_series(cfg, bath, s, times, p)?;
    if s > 0.0 {
        p.report.pointer =
            Some(residual_polarization_with(cfg.p0(), cfg.model.delta, s, &cfg.numerics.basis_thresholds)?);
    }
    p.add(cfg, Format::Csv, "polarization.csv", export::polarization_series_csv(&series));
    Ok(())
}

fn compare(cfg: &RunConfig, bath: &Bath, s: f64, times: &[f64], p: &mut Product) -> Result<(), RunError> {
    let s = positive_s(s)?;
    let numeric = polarization_series(cfg, bath, s, times, p)?;
    let delta = cfg.model.delta;
    let regimes: &[Regime] = if delta < s {
        &[Regime::SmallDeltaShort, Regime::SmallDeltaLong]
    } else if delta > s {
        &[Regime::LargeDeltaAllTime]
    } else {
        p.report.warnings.push("delta = s: no asymptotic regime applies".into());
        &[]
    };
    for &regime in regimes {
        let params = RegimeParams::new(delta, s, regime)?;
        p.report.warnings.extend(params.warnings());
        let formula = asymptotics::evaluate(cfg.p0(), &params, times)?;
        let mut worst: Option<f64> = None;
        let mut valid = 0;
        for i in 0..times.len() {
            if formula.flags()[i] && numeric.flags()[i] {
                valid += 1;
                let d = formula.values()[i].max_diff(&numeric.values()[i]);
                worst = Some(worst.map_or(d, |w| w.max(d)));
            }
        }
        let name = format!("asymptotic_{}.csv", regime.name());
        p.add(cfg, Format::Csv, &name, export::polarization_series_csv(&formula));
        p.report.comparisons.push(Comparison {
            regime: regime.name().into(),
            ratio: params.ratio(),
            max_abs_diff: worst,
            valid_samples: valid,
            file: cfg.output.formats.contains(&Format::Csv).then(|| PathBuf::from(name)),
        });
    }
    p.add(cfg, Format::Csv, "polarization.csv", export::polarization_series_csv(&numeric));
    Ok(())
}

fn pointer(cfg: &RunConfig, bath: &Bath, s: f64, times: &[f64], p: &mut Product) -> Result<(), RunError> {
    let s = positive_s(s)?;
    p.report.pointer = Some(residual_polarization_with(cfg.p0(), cfg.model.delta, s, &cfg.numerics.basis_thresholds)?);
    let series = polarization_series(cfg, bath, s, times, p)?;
    let pz = series.pz();
    p.report.pz_drift = Some(pz.iter().map(|z| (z - pz[0]).abs()).fold(0.0, f64::max));
    p.add(cfg, Format::Csv, "polarization.csv", export::polarization_series_csv(&series));
    Ok(())
}

fn echo(cfg: &RunConfig, bath: &Bath, times: &[f64], p: &mut Product) -> Result<(), RunError> {
    let n = cfg.model.n;
    let cap = cfg.numerics.enumeration_cap;
    if n > cap {
        return Err(Error::ResourceLimit { what: "state-vector spins", requested: n, cap }.into());
    }
    let mut r = r_product(&bath.g, &bath.env, times)?;
    r.meta = meta(cfg, bath, &r.meta.method);
    let mut echo = loschmidt_overlap(&bath.g, &bath.env, times)?;
    echo.meta = meta(cfg, bath, &echo.meta.method);
    let discrete = StrengthFunction::from(enumerate_eta_capped(&bath.g, &bath.env, cap)?);
    let mut from_eta = r_from_eta(&discrete, times)?;
    from_eta.meta = meta(cfg, bath, &from_eta.meta.method);
    let dev = r.max_component_diff(&echo)?.max(r.max_component_diff(&from_eta)?);
    p.report.echo_max_deviation = Some(dev);
    p.add(cfg, Format::Csv, "r_product.csv", export::complex_series_csv(&r));
    p.add(cfg, Format::Csv, "loschmidt.csv", export::complex_series_csv(&echo));
    p.add(cfg, Format::Csv, "r_enumerated.csv", export::complex_series_csv(&from_eta));
    Ok(())
}

//! Text output: comma-separated series and gnuplot-style histograms.
//!
//! Every file starts with `#`-prefixed `key: value` metadata lines followed by
//! a single column-name row. Numbers are written with 17 significant digits,
//! which round-trips every `f64` exactly. Lines end in `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::decoherence::Ensemble;
use crate::distributions::EtaStats;
use crate::error::{Error, Result};
use crate::polarization::{Polarization, PolarizationSeries};
use crate::series::{ComplexSeries, SeriesMeta};
use crate::strength::{DiscreteEta, Histogram};

pub const COMPLEX_COLUMNS: &str = "t,re_r,im_r,abs_r";
pub const ENSEMBLE_COLUMNS: &str = "t,re_r,im_r,abs_r,mean_abs_r";
pub const POLARIZATION_COLUMNS: &str = "t,px,py,pz,purity,flag";
pub const STRENGTH_COLUMNS: &str = "energy,weight";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(out: &mut String, format: &str, meta: &SeriesMeta) {
    let _ = writeln!(out, "# format: {format}");
    let _ = writeln!(out, "# method: {}", meta.method);
    if let Some(n) = meta.n {
        let _ = writeln!(out, "# n: {n}");
    }
    if let Some(seed) = meta.seed {
        let _ = writeln!(out, "# seed: {seed}");
    }
    if let Some(spec) = &meta.spec {
        let _ = writeln!(out, "# spec: {}", serde_json::to_string(spec).expect("serializable"));
    }
    if let Some(m) = meta.eta_mean {
        let _ = writeln!(out, "# eta_mean: {}", num(m));
    }
    if let Some(s) = meta.eta_std {
        let _ = writeln!(out, "# eta_std: {}", num(s));
    }
    for (k, v) in &meta.notes {
        let _ = writeln!(out, "# note.{k}: {}", v.replace('\n', " "));
    }
}

pub fn complex_series_csv(series: &ComplexSeries) -> String {
    let mut out = String::new();
    header(&mut out, "complex-series/1", &series.meta);
    out.push_str(COMPLEX_COLUMNS);
    out.push('\n');
    for (t, v) in series.times().iter().zip(series.values()) {
        let _ = writeln!(out, "{},{},{},{}", num(*t), num(v.re), num(v.im), num(v.norm()));
    }
    out
}

pub fn ensemble_csv(ens: &Ensemble) -> String {
    let mut out = String::new();
    header(&mut out, "ensemble-series/1", &ens.mean.meta);
    out.push_str(ENSEMBLE_COLUMNS);
    out.push('\n');
    for ((t, v), a) in ens.mean.times().iter().zip(ens.mean.values()).zip(&ens.mean_abs) {
        let _ = writeln!(out, "{},{},{},{},{}", num(*t), num(v.re), num(v.im), num(v.norm()), num(*a));
    }
    out
}

pub fn polarization_series_csv(series: &PolarizationSeries) -> String {
    let mut out = String::new();
    header(&mut out, "polarization-series/1", &series.meta);
    let regime = series.meta.notes.get("regime");
    out.push_str(POLARIZATION_COLUMNS);
    if regime.is_some() {
        out.push_str(",regime");
    }
    out.push('\n');
    for ((t, p), f) in series.times().iter().zip(series.values()).zip(series.flags()) {
        let purity = 0.5 * (1.0 + p.norm_sqr());
        let _ = write!(out, "{},{},{},{},{},{}", num(*t), num(p.px), num(p.py), num(p.pz), num(purity), u8::from(*f));
        if let Some(r) = regime {
            let _ = write!(out, ",{r}");
        }
        out.push('\n');
    }
    out
}

/// Points of a discrete strength function in energy order.
pub fn discrete_eta_csv(eta: &DiscreteEta, meta: &SeriesMeta) -> String {
    let mut out = String::new();
    header(&mut out, "strength-points/1", meta);
    out.push_str(STRENGTH_COLUMNS);
    out.push('\n');
    for (e, w) in eta.sorted().points() {
        let _ = writeln!(out, "{},{}", num(e), num(w));
    }
    out
}

/// Two columns, bin center and mass, separated by a space.
pub fn histogram_dat(hist: &Histogram, stats: Option<&EtaStats>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# format: histogram/1");
    let _ = writeln!(out, "# bins: {}", hist.masses().len());
    if let Some(s) = stats {
        let _ = writeln!(out, "# eta_mean: {}", num(s.mean));
        let _ = writeln!(out, "# eta_std: {}", num(s.std));
    }
    let _ = writeln!(out, "# bin_center mass");
    for (c, m) in hist.centers().iter().zip(hist.masses()) {
        let _ = writeln!(out, "{} {}", num(*c), num(*m));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn write_complex_series(series: &ComplexSeries, path: &Path) -> Result<()> {
    write_text(path, &complex_series_csv(series))
}

pub fn write_polarization_series(series: &PolarizationSeries, path: &Path) -> Result<()> {
    write_text(path, &polarization_series_csv(series))
}

pub fn write_histogram(hist: &Histogram, stats: Option<&EtaStats>, path: &Path) -> Result<()> {
    write_text(path, &histogram_dat(hist, stats))
}

struct Parsed {
    meta: SeriesMeta,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn parse_table(text: &str, path: &Path) -> Result<Parsed> {
    let bad = |message: String| Error::Parse { path: path.to_path_buf(), message };
    let mut meta = SeriesMeta::default();
    let mut columns = None;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            let Some((key, value)) = rest.trim().split_once(": ") else { continue };
            let number = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("line {}: {e}", lineno + 1)));
            match key {
                "method" => meta.method = value.to_string(),
                "n" => meta.n = Some(value.parse().map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?),
                "seed" => meta.seed = Some(value.parse().map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?),
                "spec" => {
                    meta.spec = Some(serde_json::from_str(value).map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?)
                }
                "eta_mean" => meta.eta_mean = Some(number(value)?),
                "eta_std" => meta.eta_std = Some(number(value)?),
                k => {
                    if let Some(note) = k.strip_prefix("note.") {
                        meta.notes.insert(note.to_string(), value.to_string());
                    }
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        match &columns {
            None => columns = Some(cells),
            Some(c) => {
                if cells.len() != c.len() {
                    return Err(bad(format!(
                        "line {}: expected {} fields, found {}",
                        lineno + 1,
                        c.len(),
                        cells.len()
                    )));
                }
                rows.push(cells);
            }
        }
    }
    let columns = columns.ok_or_else(|| bad("missing column row".into()))?;
    Ok(Parsed { meta, columns, rows })
}

fn float(cell: &str, path: &Path) -> Result<f64> {
    cell.parse().map_err(|e| Error::Parse { path: path.to_path_buf(), message: format!("bad number {cell:?}: {e}") })
}

pub fn parse_complex_series(text: &str, path: &Path) -> Result<ComplexSeries> {
    let table = parse_table(text, path)?;
    if !table.columns.join(",").starts_with(COMPLEX_COLUMNS) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected columns {:?}", table.columns),
        });
    }
    let mut times = Vec::with_capacity(table.rows.len());
    let mut values = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        times.push(float(&row[0], path)?);
        values.push(Complex64::new(float(&row[1], path)?, float(&row[2], path)?));
    }
    ComplexSeries::new(times, values, table.meta)
}

pub fn parse_polarization_series(text: &str, path: &Path) -> Result<PolarizationSeries> {
    let table = parse_table(text, path)?;
    if !table.columns.join(",").starts_with(POLARIZATION_COLUMNS) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected columns {:?}", table.columns),
        });
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut flags = Vec::new();
    for row in &table.rows {
        times.push(float(&row[0], path)?);
        values.push(Polarization::new(float(&row[1], path)?, float(&row[2], path)?, float(&row[3], path)?));
        flags.push(match row[5].as_str() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Parse { path: path.to_path_buf(), message: format!("bad flag {other:?}") });
            }
        });
    }
    PolarizationSeries::new(times, values, flags, table.meta)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_complex_series(path: &Path) -> Result<ComplexSeries> {
    parse_complex_series(&read(path)?, path)
}

pub fn read_polarization_series(path: &Path) -> Result<PolarizationSeries> {
    parse_polarization_series(&read(path)?, path)
}

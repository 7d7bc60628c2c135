use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::config::RunConfig;
use crate::boost::{AlgebraResiduals, SIGN_CONVENTION};
use crate::error::{LabError, Result};
use crate::evolution::{AmplitudeSeries, DecayFit};

/// One verification outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: value <= tolerance, value, tolerance, detail: String::new() }
    }

    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: false, value: f64::NAN, tolerance: f64::NAN, detail: detail.into() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Row of `fits.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub label: String,
    pub p_or_v: f64,
    pub m_eff: f64,
    pub gamma_rate: f64,
    pub t1: f64,
    pub t2: f64,
    pub r_squared: f64,
}

impl FitRow {
    pub fn new(label: &str, p_or_v: f64, fit: &DecayFit) -> Self {
        Self {
            label: label.to_string(),
            p_or_v,
            m_eff: fit.m_eff,
            gamma_rate: fit.gamma_rate,
            t1: fit.window[0],
            t2: fit.window[1],
            r_squared: fit.r_squared,
        }
    }
}

/// A named CSV table written beside the series files.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignConvention {
    pub convention: &'static str,
    /// Global sign of the interaction boost stencil.
    pub stencil_sign: f64,
}

/// Everything one subcommand produced.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub command: String,
    pub config_echo: RunConfig,
    /// Residuals of the boost generator used by the run.
    pub residuals: AlgebraResiduals,
    /// Residuals of the stencil seed, kept when a refined generator is used.
    pub residuals_seed: Option<AlgebraResiduals>,
    pub lsq_converged: Option<bool>,
    pub lsq_iterations: Option<usize>,
    pub sign_convention: SignConvention,
    pub results: Value,
    pub checks: Vec<CheckOutcome>,
    pub versions: BTreeMap<String, String>,
    pub timing: BTreeMap<String, f64>,
    #[serde(skip)]
    pub series: Vec<AmplitudeSeries>,
    #[serde(skip)]
    pub fits: Vec<FitRow>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn new(command: &str, config: &RunConfig, residuals: AlgebraResiduals, stencil_sign: f64) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert(env!("CARGO_PKG_NAME").to_string(), env!("CARGO_PKG_VERSION").to_string());
        Self {
            command: command.to_string(),
            config_echo: config.clone(),
            residuals,
            residuals_seed: None,
            lsq_converged: None,
            lsq_iterations: None,
            sign_convention: SignConvention { convention: SIGN_CONVENTION, stencil_sign },
            results: Value::Object(Default::default()),
            checks: Vec::new(),
            versions,
            timing: BTreeMap::new(),
            series: Vec::new(),
            fits: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if let Some(i) = n.as_i64() {
        out.push_str(&i.to_string());
    } else if let Some(u) = n.as_u64() {
        out.push_str(&u.to_string());
    } else {
        let x = n.as_f64().expect("json numbers are i64, u64 or f64");
        out.push_str(&format!("{x:.16e}"));
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &m[*k], indent + 2);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// JSON text with sorted keys and every float at 17 significant digits.
pub fn to_json_text<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

/// `t,re,im,abs2` rows of one series.
pub fn write_series_csv(series: &AmplitudeSeries, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "re", "im", "abs2"])?;
    for (t, z) in series.t_grid.iter().zip(&series.values) {
        w.serialize((t, z.re, z.im, z.norm_sqr()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_table(table: &Table, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_fits(fits: &[FitRow], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    for f in fits {
        w.serialize(f)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.json`, one `<label>.csv` per series, and `fits.csv` plus
/// extra tables when present. Returns the written paths in write order.
pub fn write_report(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut stems: Vec<&str> = report.series.iter().map(|s| s.label.as_str()).collect();
    stems.extend(report.tables.iter().map(|t| t.name.as_str()));
    if !report.fits.is_empty() {
        stems.push("fits");
    }
    let mut sorted = stems.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(LabError::Check(format!("two outputs share the file stem {}", w[0])));
    }
    let mut written = Vec::new();
    let json = out_dir.join("report.json");
    let mut f = fs::File::create(&json)?;
    f.write_all(to_json_text(report)?.as_bytes())?;
    written.push(json);
    for s in &report.series {
        let p = out_dir.join(format!("{}.csv", s.label));
        write_series_csv(s, &p)?;
        written.push(p);
    }
    if !report.fits.is_empty() {
        let p = out_dir.join("fits.csv");
        write_fits(&report.fits, &p)?;
        written.push(p);
    }
    for t in &report.tables {
        let p = out_dir.join(format!("{}.csv", t.name));
        write_table(t, &p)?;
        written.push(p);
    }
    Ok(written)
}

//! Parameter sweeps driven by TOML configs, with CSV and JSON output.
//!
//! A config names one axis, its values, the fixed parameters and the
//! truncation:
//!
//! ```toml
//! name = "detuning"
//! axis = "delta"
//! axis_values = { start = -0.5, stop = 0.5, count = 101 }
//! truncation = [5, 5]
//!
//! [base_params]
//! j_coupling = 0.1
//! ```

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::HilbertSpace;
use crate::model::SystemParams;
use crate::observables::{NamedElements, ObservableRecord, DEFAULT_FLOOR};
use crate::steady::{check_truncation_detailed, evaluate_point, SolveReport, DEFAULT_TRUNCATION_TOL};

pub const CSV_HEADER: &str = "axis,mean_n,mean_m,g2_n,g2_m,g2_nm,log_neg,\
rho11,rho22,rho33,rho44,rho55,abs_rho14,abs_rho15,abs_rho25,residual,converged";

const CSV_COLUMNS: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Delta,
    JCoupling,
    GammaM,
    MTh,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Delta => "delta",
            Axis::JCoupling => "j_coupling",
            Axis::GammaM => "gamma_m",
            Axis::MTh => "m_th",
        }
    }

    fn set(self, params: &mut SystemParams, value: f64) {
        let slot = match self {
            Axis::Delta => &mut params.delta,
            Axis::JCoupling => &mut params.j_coupling,
            Axis::GammaM => &mut params.gamma_m,
            Axis::MTh => &mut params.m_th,
        };
        *slot = value;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Either an explicit list or an evenly spaced range (inclusive of both ends).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValues {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl AxisValues {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let values = match *self {
            AxisValues::List(ref v) => v.clone(),
            AxisValues::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                if count == 0 {
                    return Err(Error::config("axis_values.count", "must be at least 1"));
                }
                let (a, b) = match spacing {
                    Spacing::Linear => (start, stop),
                    Spacing::Log => {
                        if !(start > 0.0 && stop > 0.0) {
                            return Err(Error::config(
                                "axis_values",
                                "log spacing needs positive start and stop",
                            ));
                        }
                        (start.log10(), stop.log10())
                    }
                };
                (0..count)
                    .map(|k| {
                        let t = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
                        let x = a + (b - a) * t;
                        match spacing {
                            Spacing::Linear => x,
                            Spacing::Log => 10f64.powf(x),
                        }
                    })
                    .collect()
            }
        };
        if values.is_empty() {
            return Err(Error::config("axis_values", "no sweep points"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::config("axis_values", format!("non-finite value {bad}")));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::config("axis_values", "must be strictly monotone"));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DeltaSign {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

fn default_truncation() -> (usize, usize) {
    (5, 5)
}

fn yes() -> bool {
    true
}

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

fn default_tolerance() -> f64 {
    DEFAULT_TRUNCATION_TOL
}

/// A sweep description. The JSON echo written next to each CSV parses back
/// into the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: String,
    pub axis: Axis,
    pub axis_values: AxisValues,
    #[serde(default)]
    pub base_params: SystemParams,
    /// Sets `Δ = ±J` at every point.
    #[serde(default)]
    pub couple_delta_to_j: bool,
    #[serde(default)]
    pub delta_sign: DeltaSign,
    #[serde(default = "default_truncation")]
    pub truncation: (usize, usize),
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Include the named density-matrix elements in the JSON output.
    #[serde(default = "yes")]
    pub emit_elements: bool,
    /// Abort when any point fails the truncation check.
    #[serde(default = "yes")]
    pub strict_truncation: bool,
    #[serde(default = "yes")]
    pub check_truncation: bool,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default = "default_tolerance")]
    pub truncation_tolerance: f64,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .map(str::to_owned)
                .unwrap_or_else(|| "<document>".to_owned());
            Error::config(field, e.to_string().trim_end())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.base_params.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::config(format!("base_params.{name}"), reason),
            other => other,
        })?;
        if self.couple_delta_to_j && self.axis == Axis::Delta {
            return Err(Error::config(
                "couple_delta_to_j",
                "cannot couple detuning to J while sweeping detuning",
            ));
        }
        if self.truncation.0 < 2 || self.truncation.1 < 2 {
            return Err(Error::config("truncation", "levels must be at least [2, 2]"));
        }
        if !(self.floor > 0.0) {
            return Err(Error::config("floor", "must be positive"));
        }
        if !(self.truncation_tolerance > 0.0) {
            return Err(Error::config("truncation_tolerance", "must be positive"));
        }
        for (k, p) in self.points()?.iter().enumerate() {
            p.validate().map_err(|e| match e {
                Error::InvalidParameter { name, reason } => {
                    Error::config(format!("axis_values[{k}]"), format!("gives invalid {name}: {reason}"))
                }
                other => other,
            })?;
        }
        Ok(())
    }

    /// Parameters at every sweep point, in axis order.
    pub fn points(&self) -> Result<Vec<SystemParams>> {
        let sign = match self.delta_sign {
            DeltaSign::Plus => 1.0,
            DeltaSign::Minus => -1.0,
        };
        Ok(self
            .axis_values
            .resolve()?
            .into_iter()
            .map(|x| {
                let mut p = self.base_params;
                self.axis.set(&mut p, x);
                if self.couple_delta_to_j {
                    p.delta = sign * p.j_coupling;
                }
                p
            })
            .collect())
    }

    /// Output path, defaulting to `<name>.csv`.
    pub fn output_path(&self) -> PathBuf {
        self.output_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.name)))
    }
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SweepConfig::from_toml_str(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub params: SystemParams,
    pub record: Option<ObservableRecord>,
    pub report: Option<SolveReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub config: SweepConfig,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn evaluate_row(config: &SweepConfig, space: &HilbertSpace, axis_value: f64, params: SystemParams) -> SweepRow {
    let outcome = if config.check_truncation {
        check_truncation_detailed(&params, config.truncation, config.truncation_tolerance, config.floor).map(|c| {
            let report = c.report();
            (c.base.record, report, Some((c.max_change, c.worst_observable)))
        })
    } else {
        evaluate_point(&params, space, config.floor).map(|p| (p.record, p.report, None))
    };
    match outcome {
        Ok((record, report, _)) => SweepRow {
            axis_value,
            params,
            record: Some(record),
            report: Some(report),
            error: None,
        },
        Err(e) => SweepRow {
            axis_value,
            params,
            record: None,
            report: None,
            error: Some(e.to_string()),
        },
    }
}

/// Evaluates every point in parallel. Failed solves become rows carrying the
/// error; in strict mode an unconverged truncation aborts the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let space = HilbertSpace::new(config.truncation.0, config.truncation.1)?;
    let values = config.axis_values.resolve()?;
    let points = config.points()?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .zip(points.par_iter())
        .map(|(&x, &p)| evaluate_row(config, &space, x, p))
        .collect();

    if config.strict_truncation {
        if let Some(row) = rows
            .iter()
            .find(|r| r.report.is_some_and(|rep| rep.truncation_converged == Some(false)))
        {
            return Err(Error::TruncationFailed {
                axis: config.axis.name(),
                value: row.axis_value,
                detail: format!(
                    "observables change by more than {:e} between {:?} and twice those levels",
                    config.truncation_tolerance, config.truncation
                ),
            });
        }
    }

    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(SweepResult {
        rows,
        metadata: SweepMetadata {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp,
        },
    })
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undef".to_owned(), fmt_num)
}

pub fn render_csv(result: &SweepResult) -> String {
    let meta = &result.metadata;
    let comment = format!(
        "# pairblock {} axis={} points={} timestamp={}\n",
        meta.version,
        meta.config.axis.name(),
        result.rows.len(),
        meta.timestamp
    );
    let mut writer = csv::Writer::from_writer(comment.into_bytes());
    let mut write = |fields: &[String]| writer.write_record(fields).expect("writing to memory");
    write(&CSV_HEADER.split(',').map(str::to_owned).collect::<Vec<_>>());
    for row in &result.rows {
        let mut fields = vec![fmt_num(row.axis_value)];
        match (&row.record, &row.report) {
            (Some(r), Some(rep)) => {
                fields.extend([
                    fmt_num(r.mean_n),
                    fmt_num(r.mean_m),
                    fmt_opt(r.g2_n),
                    fmt_opt(r.g2_m),
                    fmt_opt(r.g2_nm),
                    fmt_num(r.log_neg),
                ]);
                fields.extend(r.elements.values().iter().map(|&v| fmt_num(v)));
                fields.push(fmt_num(rep.residual_norm));
                fields.push(
                    match rep.truncation_converged {
                        Some(true) => "true",
                        Some(false) => "false",
                        None => "unchecked",
                    }
                    .to_owned(),
                );
            }
            _ => fields.extend(std::iter::repeat_n("error".to_owned(), CSV_COLUMNS - 1)),
        }
        write(&fields);
    }
    let bytes = writer.into_inner().expect("flushing to memory");
    String::from_utf8(bytes).expect("ascii output")
}

/// JSON form of the result; with `emit_elements = false` the named
/// elements are dropped from each record.
pub fn render_json(result: &SweepResult) -> Result<String> {
    let mut value = serde_json::to_value(result).map_err(|e| Error::Consistency(e.to_string()))?;
    if !result.metadata.config.emit_elements {
        if let Some(rows) = value.get_mut("rows").and_then(|r| r.as_array_mut()) {
            for row in rows {
                if let Some(rec) = row.get_mut("record").and_then(|r| r.as_object_mut()) {
                    rec.remove("elements");
                }
            }
        }
    }
    serde_json::to_string_pretty(&value).map_err(|e| Error::Consistency(e.to_string()))
}

/// Writes the CSV to `path` and the JSON companion next to it.
pub fn write_outputs(result: &SweepResult, path: &Path) -> Result<(PathBuf, PathBuf)> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, render_csv(result)).map_err(|e| Error::io(path, e))?;
    let json_path = path.with_extension("json");
    std::fs::write(&json_path, render_json(result)?).map_err(|e| Error::io(&json_path, e))?;
    Ok((path.to_path_buf(), json_path))
}

/// One parsed CSV data line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub axis_value: f64,
    /// `None` for rows whose solve failed.
    pub record: Option<ObservableRecord>,
    pub residual: Option<f64>,
    pub converged: Option<bool>,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let bad = |line: usize, reason: String| Error::config(format!("csv line {line}"), reason);
    let header = reader.headers().map_err(|e| bad(0, e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::config("csv header", format!("unexpected header {header:?}")));
    }
    let num =
        |s: &str, line: usize| -> Result<f64> { s.parse::<f64>().map_err(|_| bad(line, format!("bad number `{s}`"))) };
    let opt = |s: &str, line: usize| -> Result<Option<f64>> {
        if s == "undef" {
            Ok(None)
        } else {
            num(s, line).map(Some)
        }
    };
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let f = record.map_err(|e| bad(k, e.to_string()))?;
        if f.len() != CSV_COLUMNS {
            return Err(bad(k, format!("expected {CSV_COLUMNS} fields, got {}", f.len())));
        }
        let axis_value = num(&f[0], k)?;
        if &f[1] == "error" {
            rows.push(CsvRow {
                axis_value,
                record: None,
                residual: None,
                converged: None,
            });
            continue;
        }
        let el: Vec<f64> = (7..15).map(|i| num(&f[i], k)).collect::<Result<_>>()?;
        let elements = NamedElements {
            rho11: el[0],
            rho22: el[1],
            rho33: el[2],
            rho44: el[3],
            rho55: el[4],
            abs_rho14: el[5],
            abs_rho15: el[6],
            abs_rho25: el[7],
        };
        rows.push(CsvRow {
            axis_value,
            record: Some(ObservableRecord {
                mean_n: num(&f[1], k)?,
                mean_m: num(&f[2], k)?,
                g2_n: opt(&f[3], k)?,
                g2_m: opt(&f[4], k)?,
                g2_nm: opt(&f[5], k)?,
                log_neg: num(&f[6], k)?,
                elements,
            }),
            residual: Some(num(&f[15], k)?),
            converged: match &f[16] {
                "true" => Some(true),
                "false" => Some(false),
                "unchecked" => None,
                other => return Err(bad(k, format!("bad converged flag `{other}`"))),
            },
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

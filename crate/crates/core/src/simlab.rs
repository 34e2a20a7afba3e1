//! Experiment orchestration: configs, sweeps and the shared output row.
//!
//! Config files are flat `key = value` text. `#` starts a comment. Recognized keys are `scheme`,
//! `source`, `delta`, `levels`, `offsets`, `lambda`, `samples`, `seed`, `chunk_size`, `out`,
//! `literal_paper_indexing` and `sweep`. A sweep is written `sweep = axis:v1,v2,...` with axis
//! one of `levels`, `offsets`, `delta`, `lambda`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::circle::{simulate_circle, CircleScheme, FrontierPoint, Provenance};
use crate::error::{Error, Result};
use crate::frontier::rdp_point;
use crate::mc::{McPlan, DEFAULT_CHUNK};
use crate::metrics::ExperimentResult;
use crate::sources::SourceModel;
use crate::stagger::{simulate_pipeline, StaggeredSpec};

pub const CSV_HEADER: [&str; 8] =
    ["scheme", "params", "rate_bits", "distortion", "perception_ks", "provenance", "seed", "n_samples"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    CircleStaggered,
    CircleDithered,
    ScalarStaggered,
    Frontier,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::CircleStaggered => "circle-staggered",
            Scheme::CircleDithered => "circle-dithered",
            Scheme::ScalarStaggered => "scalar-staggered",
            Scheme::Frontier => "frontier",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle-staggered" => Ok(Scheme::CircleStaggered),
            "circle-dithered" => Ok(Scheme::CircleDithered),
            "scalar-staggered" => Ok(Scheme::ScalarStaggered),
            "frontier" => Ok(Scheme::Frontier),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Levels,
    Offsets,
    Delta,
    Lambda,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "levels" => Ok(Axis::Levels),
            "offsets" => Ok(Axis::Offsets),
            "delta" => Ok(Axis::Delta),
            "lambda" => Ok(Axis::Lambda),
            other => Err(Error::Config(format!("'{other}' is not a sweepable parameter"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub source: Option<SourceModel>,
    pub delta: Option<f64>,
    pub levels: u32,
    pub offsets: u32,
    pub lambda: Option<f64>,
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: usize,
    pub out: Option<PathBuf>,
    pub literal_paper_indexing: bool,
    pub sweep: Option<Sweep>,
}

impl ExperimentConfig {
    pub fn new(scheme: Scheme) -> Self {
        ExperimentConfig {
            scheme,
            source: None,
            delta: None,
            levels: 2,
            offsets: 1,
            lambda: None,
            samples: 1_000_000,
            seed: 0,
            chunk_size: DEFAULT_CHUNK,
            out: None,
            literal_paper_indexing: false,
            sweep: None,
        }
    }

    pub fn plan(&self) -> McPlan {
        McPlan::new(self.samples, self.seed).with_chunk_size(self.chunk_size)
    }

    /// Copy of `self` with one parameter replaced.
    pub fn with_axis(&self, axis: Axis, value: f64) -> Result<Self> {
        let mut c = self.clone();
        c.sweep = None;
        match axis {
            Axis::Levels => c.levels = as_count(value, "levels")?,
            Axis::Offsets => c.offsets = as_count(value, "offsets")?,
            Axis::Delta => c.delta = Some(value),
            Axis::Lambda => c.lambda = Some(value),
        }
        Ok(c)
    }
}

fn as_count(v: f64, name: &str) -> Result<u32> {
    if v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(Error::Config(format!("{name} must be a positive integer, got {v}")))
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Config(format!("bad value for {key}: '{raw}'")))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value", lineno + 1)));
        };
        let key = k.trim().to_string();
        if pairs.iter().any(|(_, seen, _)| *seen == key) {
            return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
        pairs.push((lineno + 1, key, v.trim().to_string()));
    }
    let Some((_, _, scheme)) = pairs.iter().find(|(_, k, _)| k == "scheme") else {
        return Err(Error::Config("missing key 'scheme'".into()));
    };
    let mut cfg = ExperimentConfig::new(scheme.parse()?);
    for (lineno, key, raw) in &pairs {
        let at = |e: Error| match e {
            Error::Config(m) => Error::Config(format!("line {lineno}: {m}")),
            other => Error::Config(format!("line {lineno}: {other}")),
        };
        let k = key.as_str();
        match k {
            "scheme" => {}
            "source" => cfg.source = Some(raw.parse().map_err(at)?),
            "delta" => cfg.delta = Some(parse_value(k, raw).map_err(at)?),
            "levels" => cfg.levels = parse_value(k, raw).map_err(at)?,
            "offsets" => cfg.offsets = parse_value(k, raw).map_err(at)?,
            "lambda" => cfg.lambda = Some(parse_value(k, raw).map_err(at)?),
            "samples" => cfg.samples = parse_value(k, raw).map_err(at)?,
            "seed" => cfg.seed = parse_value(k, raw).map_err(at)?,
            "chunk_size" => cfg.chunk_size = parse_value(k, raw).map_err(at)?,
            "out" => cfg.out = Some(PathBuf::from(raw)),
            "literal_paper_indexing" => cfg.literal_paper_indexing = parse_value(k, raw).map_err(at)?,
            "sweep" => cfg.sweep = Some(parse_sweep(raw).map_err(at)?),
            other => return Err(Error::Config(format!("line {lineno}: unknown key '{other}'"))),
        }
    }
    Ok(cfg)
}

fn parse_sweep(raw: &str) -> Result<Sweep> {
    let Some((axis, list)) = raw.split_once(':') else {
        return Err(Error::Config(format!("sweep must be axis:v1,v2,... got '{raw}'")));
    };
    let values = list.split(',').map(|v| parse_value::<f64>("sweep", v.trim())).collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Config("sweep has no values".into()));
    }
    Ok(Sweep { axis: axis.trim().parse()?, values })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputRow {
    pub scheme: String,
    /// `key=value` pairs joined by `;`.
    pub params: String,
    pub rate_bits: f64,
    pub distortion: f64,
    pub perception_ks: f64,
    pub provenance: String,
    pub seed: u64,
    pub n_samples: u64,
}

impl OutputRow {
    pub fn from_point(scheme: &str, params: String, p: &FrontierPoint) -> Self {
        OutputRow {
            scheme: scheme.into(),
            params,
            rate_bits: p.rate_bits,
            distortion: p.distortion,
            perception_ks: f64::NAN,
            provenance: p.provenance.as_str().into(),
            seed: 0,
            n_samples: 0,
        }
    }

    pub fn from_result(scheme: &str, params: String, r: &ExperimentResult) -> Self {
        OutputRow {
            scheme: scheme.into(),
            params,
            rate_bits: r.rate_bits,
            distortion: r.mse,
            perception_ks: r.perception_ks,
            provenance: Provenance::MonteCarlo.as_str().into(),
            seed: r.seed,
            n_samples: r.n_samples,
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<OutputRow>> {
    match &config.sweep {
        Some(s) => sweep(config, s.axis, &s.values),
        None => Ok(vec![run_single(config)?]),
    }
}

/// One run per value, rows in ascending axis order.
pub fn sweep(base: &ExperimentConfig, axis: Axis, values: &[f64]) -> Result<Vec<OutputRow>> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().map(|&v| run_single(&base.with_axis(axis, v)?)).collect()
}

fn require<T>(v: Option<T>, key: &str, scheme: Scheme) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("scheme {} needs '{key}'", scheme.as_str())))
}

fn run_single(c: &ExperimentConfig) -> Result<OutputRow> {
    let name = c.scheme.as_str();
    match c.scheme {
        Scheme::CircleStaggered => {
            let scheme = CircleScheme::staggered(c.levels, c.offsets)?;
            let r = simulate_circle(&scheme, &c.plan())?;
            Ok(OutputRow::from_result(name, format!("L={};N={}", c.levels, c.offsets), &r))
        }
        Scheme::CircleDithered => {
            let scheme = CircleScheme::dithered(c.levels)?;
            let r = simulate_circle(&scheme, &c.plan())?;
            Ok(OutputRow::from_result(name, format!("L={}", c.levels), &r))
        }
        Scheme::ScalarStaggered => {
            let source = require(c.source, "source", c.scheme)?;
            let delta = require(c.delta, "delta", c.scheme)?;
            let spec = StaggeredSpec::new(source, delta, c.offsets)?.with_literal_paper_indexing(c.literal_paper_indexing);
            let r = simulate_pipeline(&spec, &c.plan())?;
            Ok(OutputRow::from_result(name, scalar_params(&spec), &r))
        }
        Scheme::Frontier => {
            let lambda = require(c.lambda, "lambda", c.scheme)?;
            let p = rdp_point(lambda)?;
            Ok(OutputRow::from_point(name, format!("lambda={}", fmt_g9(lambda)), &p))
        }
    }
}

pub fn scalar_params(spec: &StaggeredSpec) -> String {
    let mut s = format!("source={};delta={};N={}", spec.source, fmt_g9(spec.step), spec.offsets);
    if spec.literal_paper_indexing {
        s.push_str(";literal_paper_indexing=true");
    }
    s
}

/// `printf("%.9g")`.
pub fn fmt_g9(x: f64) -> String {
    const P: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(rows: &[OutputRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            r.params.clone(),
            fmt_g9(r.rate_bits),
            fmt_g9(r.distortion),
            fmt_g9(r.perception_ks),
            r.provenance.clone(),
            r.seed.to_string(),
            r.n_samples.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON array of rows. Non-finite numbers become `null`.
pub fn write_json<W: Write>(rows: &[OutputRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writeln!(out)?;
    Ok(())
}

pub fn render(rows: &[OutputRow], json: bool) -> Result<String> {
    let mut buf = Vec::new();
    if json {
        write_json(rows, &mut buf)?;
    } else {
        write_csv(rows, &mut buf)?;
    }
    Ok(String::from_utf8(buf).expect("rows are utf-8"))
}

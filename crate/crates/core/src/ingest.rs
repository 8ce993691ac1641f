//! File-format layer: sample CSVs, FICO-style CDF tables, and canonical
//! emitters. Parsing is strict; every rejection names the offending line.
//!
//! All formats are UTF-8, comma-separated, header-required. Lines starting
//! with `#` are comments. Numbers are plain decimal floats; NaN and
//! negative probabilities are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::distributions::binary::estimate_binary_pmf_smoothed;
use crate::distributions::{
    estimate_binary_pmf, estimate_counterfactual_model_smoothed, estimate_score_model,
    score_model_from_cdf_table, BinaryJointPmf, CdfRow, CounterfactualModel, ScoreModel,
};
use crate::error::{Error, Result};
use crate::real::Real;

/// The four input schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// `a,y,rhat` with binary classifier outputs.
    BinarySamples,
    /// `a,y,r0,r1`: classifier output under both counterfactual inputs.
    DpSamples,
    /// `a,y,r` with qualification scores.
    ScoreSamples,
    /// `score,cdf_a0,cdf_a1,nondefault_a0,nondefault_a1`.
    FicoCdf,
}

impl DataFormat {
    pub fn header(&self) -> &'static str {
        match self {
            DataFormat::BinarySamples => "a,y,rhat",
            DataFormat::DpSamples => "a,y,r0,r1",
            DataFormat::ScoreSamples => "a,y,r",
            DataFormat::FicoCdf => "score,cdf_a0,cdf_a1,nondefault_a0,nondefault_a1",
        }
    }
}

impl FromStr for DataFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary_samples" => Ok(DataFormat::BinarySamples),
            "dp_samples" => Ok(DataFormat::DpSamples),
            "score_samples" => Ok(DataFormat::ScoreSamples),
            "fico_cdf" => Ok(DataFormat::FicoCdf),
            other => Err(Error::InputFormat(format!("unknown data format {other:?}"))),
        }
    }
}

/// What to load and how to interpret it.
#[derive(Debug, Clone)]
pub struct DatasetManifest<T> {
    pub path: PathBuf,
    pub format: DataFormat,
    /// Declared score support for the score formats; inferred from the data
    /// when absent.
    pub support: Option<Vec<T>>,
    /// Group prior Pr{A=0}; required by the CDF-table format.
    pub group_prior: Option<T>,
    /// Additive pseudo-count for the frequency estimators.
    pub smoothing: Option<T>,
}

impl<T> DatasetManifest<T> {
    pub fn new(path: impl Into<PathBuf>, format: DataFormat) -> Self {
        Self {
            path: path.into(),
            format,
            support: None,
            group_prior: None,
            smoothing: None,
        }
    }
}

/// A successfully loaded population model.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedModel<T> {
    Binary(BinaryJointPmf<T>),
    Counterfactual(CounterfactualModel<T>),
    Score(ScoreModel<T>),
}

fn bad_line(line: usize, message: impl Into<String>) -> Error {
    Error::InputRow {
        row: line,
        message: message.into(),
    }
}

/// Iterates data lines with their 1-based file line numbers, skipping
/// comments and blanks, after checking the header.
fn data_lines(text: &str, format: DataFormat) -> Result<Vec<(usize, &str)>> {
    let mut lines = Vec::new();
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != format.header() {
                return Err(Error::InputFormat(format!(
                    "expected header {:?}, found {line:?}",
                    format.header()
                )));
            }
            header_seen = true;
            continue;
        }
        lines.push((i + 1, line));
    }
    if !header_seen {
        return Err(Error::InputFormat("missing header line".into()));
    }
    Ok(lines)
}

fn split_fields(line: usize, text: &str, expect: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != expect {
        return Err(bad_line(
            line,
            format!(
                "expected {expect} comma-separated fields, found {}",
                fields.len()
            ),
        ));
    }
    Ok(fields)
}

fn parse_bit(line: usize, field: &str, name: &str) -> Result<u8> {
    match field {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(bad_line(line, format!("{name} = {other:?} is not 0 or 1"))),
    }
}

fn parse_number<T: Real>(line: usize, field: &str, name: &str) -> Result<T> {
    let value: f64 = field
        .parse()
        .map_err(|_| bad_line(line, format!("{name} = {field:?} is not a number")))?;
    if value.is_nan() {
        return Err(bad_line(line, format!("{name} must not be NaN")));
    }
    Ok(T::of(value))
}

fn parse_probability<T: Real>(line: usize, field: &str, name: &str) -> Result<T> {
    let v: T = parse_number(line, field, name)?;
    if v < T::zero() {
        return Err(bad_line(line, format!("{name} = {field} is negative")));
    }
    Ok(v)
}

/// Parses `a,y,rhat` rows into a joint PMF.
pub fn parse_binary_samples<T: Real>(
    text: &str,
    smoothing: Option<T>,
) -> Result<BinaryJointPmf<T>> {
    let mut samples = Vec::new();
    for (line, row) in data_lines(text, DataFormat::BinarySamples)? {
        let f = split_fields(line, row, 3)?;
        let a = parse_bit(line, f[0], "a")?;
        let y = parse_bit(line, f[1], "y")?;
        let rhat = parse_bit(line, f[2], "rhat")?;
        samples.push((a, rhat, y));
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    match smoothing {
        Some(s) => estimate_binary_pmf_smoothed(&samples, s),
        None => estimate_binary_pmf(&samples),
    }
}

fn resolve_support<T: Real>(declared: &Option<Vec<T>>, observed: &mut Vec<T>) -> Result<Vec<T>> {
    match declared {
        Some(s) => Ok(s.clone()),
        None => {
            observed.sort_by(|a, b| a.partial_cmp(b).unwrap());
            observed.dedup();
            Ok(std::mem::take(observed))
        }
    }
}

/// Parses `a,y,r` rows into a score model.
pub fn parse_score_samples<T: Real>(
    text: &str,
    declared_support: &Option<Vec<T>>,
) -> Result<ScoreModel<T>> {
    let mut samples = Vec::new();
    let mut observed = Vec::new();
    for (line, row) in data_lines(text, DataFormat::ScoreSamples)? {
        let f = split_fields(line, row, 3)?;
        let a = parse_bit(line, f[0], "a")?;
        let y = parse_bit(line, f[1], "y")?;
        let r: T = parse_number(line, f[2], "r")?;
        if let Some(s) = declared_support {
            if !s.contains(&r) {
                return Err(bad_line(
                    line,
                    format!("score {r} is not in the declared support"),
                ));
            }
        }
        observed.push(r);
        samples.push((a, y, r));
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let support = resolve_support(declared_support, &mut observed)?;
    estimate_score_model(&samples, &support)
}

/// Parses `a,y,r0,r1` rows into a counterfactual model.
pub fn parse_dp_samples<T: Real>(
    text: &str,
    declared_support: &Option<Vec<T>>,
    smoothing: Option<T>,
) -> Result<CounterfactualModel<T>> {
    let mut samples = Vec::new();
    let mut observed = Vec::new();
    for (line, row) in data_lines(text, DataFormat::DpSamples)? {
        let f = split_fields(line, row, 4)?;
        let a = parse_bit(line, f[0], "a")?;
        let y = parse_bit(line, f[1], "y")?;
        let r0: T = parse_number(line, f[2], "r0")?;
        let r1: T = parse_number(line, f[3], "r1")?;
        if let Some(s) = declared_support {
            for r in [r0, r1] {
                if !s.contains(&r) {
                    return Err(bad_line(
                        line,
                        format!("classifier output {r} is not in the declared support"),
                    ));
                }
            }
        }
        observed.push(r0);
        observed.push(r1);
        samples.push((a, y, r0, r1));
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let support = resolve_support(declared_support, &mut observed)?;
    estimate_counterfactual_model_smoothed(&samples, &support, smoothing.unwrap_or_else(T::zero))
}

/// Parses a FICO-style CDF table into a score model; `group_prior` is
/// Pr{A=0}.
pub fn parse_fico_cdf<T: Real>(text: &str, group_prior: T) -> Result<ScoreModel<T>> {
    let mut rows = Vec::new();
    for (line, row) in data_lines(text, DataFormat::FicoCdf)? {
        let f = split_fields(line, row, 5)?;
        let score: T = parse_number(line, f[0], "score")?;
        let cdf = [
            parse_probability(line, f[1], "cdf_a0")?,
            parse_probability(line, f[2], "cdf_a1")?,
        ];
        let nondefault = [
            parse_probability(line, f[3], "nondefault_a0")?,
            parse_probability(line, f[4], "nondefault_a1")?,
        ];
        rows.push((
            line,
            CdfRow {
                score,
                cdf,
                nondefault,
            },
        ));
    }
    if rows.is_empty() {
        return Err(Error::InputFormat("CDF table has no data rows".into()));
    }
    let table: Vec<CdfRow<T>> = rows.iter().map(|(_, r)| *r).collect();
    // Re-map estimator row indices to file line numbers on error.
    score_model_from_cdf_table(&table, group_prior).map_err(|e| match e {
        Error::InputRow { row, message } => Error::InputRow {
            row: rows[row].0,
            message,
        },
        other => other,
    })
}

/// Canonical FICO-style CSV for a score model: fixed field order, decimal
/// floats in shortest round-trip form.
pub fn emit_fico_cdf(model: &ScoreModel<f64>) -> String {
    let mut out = String::from(DataFormat::FicoCdf.header());
    out.push('\n');
    for row in model.to_cdf_rows() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.score, row.cdf[0], row.cdf[1], row.nondefault[0], row.nondefault[1]
        ));
    }
    out
}

/// Loads the model a manifest describes.
pub fn load<T: Real>(manifest: &DatasetManifest<T>) -> Result<LoadedModel<T>> {
    let text = read_file(&manifest.path)?;
    match manifest.format {
        DataFormat::BinarySamples => Ok(LoadedModel::Binary(parse_binary_samples(
            &text,
            manifest.smoothing,
        )?)),
        DataFormat::ScoreSamples => Ok(LoadedModel::Score(parse_score_samples(
            &text,
            &manifest.support,
        )?)),
        DataFormat::DpSamples => Ok(LoadedModel::Counterfactual(parse_dp_samples(
            &text,
            &manifest.support,
            manifest.smoothing,
        )?)),
        DataFormat::FicoCdf => {
            let prior = manifest.group_prior.ok_or_else(|| {
                Error::InputFormat(
                    "the CDF-table format needs an explicit group prior Pr{A=0}".into(),
                )
            })?;
            Ok(LoadedModel::Score(parse_fico_cdf(&text, prior)?))
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InputFormat(format!("cannot read {}: {e}", path.display())))
}

//! Experimental asymmetry-data ingestion.
//!
//! Data files are plain delimited text: one row per time point with two or
//! three numeric columns — time (µs), asymmetry, and optionally its
//! standard error. Columns are separated by commas and/or whitespace;
//! `#` starts a comment. Comment lines of the form `# key = value` carry
//! optional header metadata (initial guesses for the asymmetry scale `a0`
//! and background `a_bg`). Every parse failure names the offending line.

use crate::error::{Error, Result};
use crate::fit::AsymmetrySeries;
use std::path::Path;

/// A validated experimental dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentalDataset {
    /// Decay times, µs; strictly increasing.
    pub times: Vec<f64>,
    /// Measured asymmetry per time.
    pub asymmetries: Vec<f64>,
    /// Per-point standard errors; `None` when the file has no third
    /// column.
    pub sigmas: Option<Vec<f64>>,
    /// Header guess for the asymmetry scale, from `# a0 = …`.
    pub a0_guess: Option<f64>,
    /// Header guess for the background, from `# a_bg = …`.
    pub a_bg_guess: Option<f64>,
}

impl ExperimentalDataset {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Convert to a fit-ready series. Missing uncertainties become 1.0 —
    /// the loss then reduces to an unweighted sum of squares — and the
    /// returned flag says whether that fallback was taken so callers can
    /// warn.
    pub fn to_series(&self) -> Result<(AsymmetrySeries, bool)> {
        let (sigmas, defaulted) = match &self.sigmas {
            Some(s) => (s.clone(), false),
            None => (vec![1.0; self.len()], true),
        };
        let series =
            AsymmetrySeries::new(self.times.clone(), self.asymmetries.clone(), sigmas)?;
        Ok((series, defaulted))
    }
}

/// Parse dataset text. See the module docs for the format.
pub fn parse_dataset(text: &str) -> Result<ExperimentalDataset> {
    let mut times = Vec::new();
    let mut asymmetries = Vec::new();
    let mut sigmas: Vec<f64> = Vec::new();
    let mut n_columns: Option<usize> = None;
    let mut a0_guess = None;
    let mut a_bg_guess = None;

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let data = match raw.find('#') {
            Some(pos) => {
                if let Some((key, value)) = parse_metadata(&raw[pos + 1..]) {
                    match key.as_str() {
                        "a0" => a0_guess = Some(value),
                        "a_bg" => a_bg_guess = Some(value),
                        _ => {} // Unrecognized metadata is a plain comment.
                    }
                }
                &raw[..pos]
            }
            None => raw,
        };
        let fields: Vec<&str> = data
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Data(format!(
                "line {line_no}: expected 2 or 3 columns (time, asymmetry[, sigma]), got {}",
                fields.len()
            )));
        }
        match n_columns {
            None => n_columns = Some(fields.len()),
            Some(n) if n != fields.len() => {
                return Err(Error::Data(format!(
                    "line {line_no}: {} columns, but earlier rows have {n}",
                    fields.len()
                )))
            }
            Some(_) => {}
        }

        let mut parsed = [0.0f64; 3];
        for (k, field) in fields.iter().enumerate() {
            parsed[k] = field.parse().map_err(|_| {
                Error::Data(format!(
                    "line {line_no}: column {} is not a number: '{field}'",
                    k + 1
                ))
            })?;
        }
        let (t, a) = (parsed[0], parsed[1]);
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Data(format!(
                "line {line_no}: time must be finite and non-negative, got {t}"
            )));
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::Data(format!(
                    "line {line_no}: time {t} does not increase past {prev}"
                )));
            }
        }
        if !a.is_finite() {
            return Err(Error::Data(format!(
                "line {line_no}: asymmetry must be finite, got {a}"
            )));
        }
        if fields.len() == 3 {
            let s = parsed[2];
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Data(format!(
                    "line {line_no}: sigma must be positive and finite, got {s}"
                )));
            }
            sigmas.push(s);
        }
        times.push(t);
        asymmetries.push(a);
    }

    if times.len() < 2 {
        return Err(Error::Data(format!(
            "dataset needs at least 2 rows, got {}",
            times.len()
        )));
    }
    Ok(ExperimentalDataset {
        times,
        asymmetries,
        sigmas: (n_columns == Some(3)).then_some(sigmas),
        a0_guess,
        a_bg_guess,
    })
}

/// Read and parse a dataset file.
pub fn ingest_dataset(path: &Path) -> Result<ExperimentalDataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read data {}: {e}", path.display())))?;
    parse_dataset(&text)
}

/// `key = value` (or `key: value`) with a numeric value, else None.
fn parse_metadata(comment: &str) -> Option<(String, f64)> {
    let (key, value) = comment.split_once(['=', ':'])?;
    let value: f64 = value.trim().parse().ok()?;
    Some((key.trim().to_ascii_lowercase(), value))
}

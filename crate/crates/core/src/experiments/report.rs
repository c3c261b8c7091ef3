use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Warning};

/// A measured quantity compared with a declared threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, threshold, pass: value <= threshold }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, threshold, pass: value >= threshold }
    }

    /// `value ∈ [lo, hi]`; `threshold` records `lo` and the name carries the range.
    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Check {
        Check { name: format!("{name} in [{lo}, {hi}]"), value, threshold: lo, pass: value >= lo && value <= hi }
    }

    pub fn flag(name: &str, ok: bool) -> Check {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, threshold: 1.0, pass: ok }
    }
}

/// Tabular result of a study with its checks; rows hold one value per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: String,
    pub params: serde_json::Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub checks: Vec<Check>,
    pub warnings: Vec<Warning>,
}

impl StudyReport {
    pub fn new(study: &str, params: serde_json::Value, columns: &[&str]) -> StudyReport {
        StudyReport {
            study: study.into(),
            params,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
            checks: vec![],
            warnings: vec![],
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Invalid(format!("row has {} values for {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Non-finite metrics in a row or check.
    pub fn all_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite()) && self.checks.iter().all(|c| c.value.is_finite())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(f64::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Every consecutive pair strictly decreasing.
pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

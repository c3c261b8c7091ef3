use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::Result;

/// One diagnostics record; `NaN` marks quantities a method does not provide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub omega_l1: f64,
    pub omega_l2: f64,
    pub omega_linf: f64,
    /// `γ` (bounded) or `α` (exterior).
    pub circulation: Vec<f64>,
    /// `αⁱ = ∫φⁱω + γⁱ` (bounded only).
    pub alpha: Vec<f64>,
    pub support_radius: f64,
    /// Backtraces resolved by the nearest fluid value during the step that produced this row.
    pub clamped: usize,
}

/// CSV header for rows with `n_circ` circulations and `n_alpha` harmonic coefficients.
pub fn csv_header(n_circ: usize, n_alpha: usize) -> String {
    let mut cols: Vec<String> = ["step", "t", "energy", "omega_l1", "omega_l2", "omega_linf"].iter().map(|s| s.to_string()).collect();
    cols.extend((0..n_circ).map(|i| format!("circ_{i}")));
    cols.extend((0..n_alpha).map(|i| format!("alpha_{i}")));
    cols.push("support_radius".into());
    cols.push("clamped".into());
    cols.join(",")
}

impl DiagnosticsRow {
    pub fn csv_header(&self) -> String {
        csv_header(self.circulation.len(), self.alpha.len())
    }

    /// Values in header order; floats use the shortest round-trip form.
    pub fn csv_line(&self) -> String {
        let mut cols = vec![self.step.to_string()];
        cols.extend([self.t, self.energy, self.omega_l1, self.omega_l2, self.omega_linf].iter().map(f64::to_string));
        cols.extend(self.circulation.iter().chain(&self.alpha).map(f64::to_string));
        cols.push(self.support_radius.to_string());
        cols.push(self.clamped.to_string());
        cols.join(",")
    }
}

/// Writes a header and one line per row.
pub fn write_csv<W: Write>(mut w: W, rows: &[DiagnosticsRow]) -> Result<()> {
    if let Some(first) = rows.first() {
        writeln!(w, "{}", first.csv_header())?;
    }
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

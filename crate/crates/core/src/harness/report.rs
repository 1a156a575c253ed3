use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::euler_data::{EulerianSolution, Side};
use crate::metrics::eoc;

/// Errors at or below this are round-off and get no EOC.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EocRow {
    pub k: u32,
    pub dx: f64,
    pub err: f64,
    pub eoc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EocReport {
    pub example: String,
    pub metric: String,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub time_samples: usize,
    pub rows: Vec<EocRow>,
    pub wall_time_s: f64,
    /// Notes such as the absolute-error fallback.
    pub flags: Vec<String>,
}

impl EocReport {
    pub fn new(example: String, metric: String, alpha: f64, t_end: f64, time_samples: usize) -> Self {
        Self {
            example,
            metric,
            alpha,
            t_end,
            time_samples,
            rows: Vec::new(),
            wall_time_s: 0.0,
            flags: Vec::new(),
        }
    }

    /// Appends a row, computing its EOC from the previous one.
    pub fn push(&mut self, k: u32, dx: f64, err: f64) {
        let eoc = self.rows.last().and_then(|p| row_eoc(p.err, err, p.dx, dx));
        self.rows.push(EocRow { k, dx, err, eoc });
    }

    pub fn err(&self, k: u32) -> Option<f64> {
        self.rows.iter().find(|r| r.k == k).map(|r| r.err)
    }

    pub fn eoc(&self, k: u32) -> Option<f64> {
        self.rows.iter().find(|r| r.k == k).and_then(|r| r.eoc)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["k", "dx", "err", "eoc"])?;
        for r in &self.rows {
            let eoc = r.eoc.map(|v| format!("{v:.16e}")).unwrap_or_default();
            w.write_record([r.k.to_string(), format!("{:.16e}", r.dx), format!("{:.16e}", r.err), eoc])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

pub fn row_eoc(e_prev: f64, e: f64, dx_prev: f64, dx: f64) -> Option<f64> {
    if e_prev <= 0.0 || e <= 0.0 || (e_prev <= ROUNDOFF_FLOOR && e <= ROUNDOFF_FLOOR) {
        None
    } else {
        Some(eoc(e_prev, e, dx_prev, dx))
    }
}

/// Writes `x,u,F` at every node of `u`, with `F` left-continuous. A node that
/// carries an atom gets a second row holding the right limit.
pub fn write_solution_csv(path: &Path, sol: &EulerianSolution) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["x", "u", "F"])?;
    let atoms = sol.mu.atoms();
    let mut xs: Vec<f64> = sol.u.nodes().to_vec();
    xs.extend(atoms.iter().map(|a| a.position));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let u = format!("{:.16e}", sol.u.eval(x));
        w.write_record([format!("{x:.16e}"), u.clone(), format!("{:.16e}", sol.mu.eval_cumulative(x, Side::Left))])?;
        if atoms.iter().any(|a| a.position == x) {
            w.write_record([format!("{x:.16e}"), u, format!("{:.16e}", sol.mu.eval_cumulative(x, Side::Right))])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes any serializable metadata as pretty JSON.
pub fn write_metadata<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

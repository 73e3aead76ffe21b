//! CSV and JSON artifacts. Every float is written with 17 significant
//! digits so that downstream readers recover the exact `f64`.

use std::io::Write;

use serde::Serialize;

use crate::dynamics::DensitySample;
use crate::error::{Error, Result};
use crate::family::SigmaFit;
use crate::quantizer::OperatorMatrix;

pub const OPERATOR_HEADER: [&str; 4] = ["row", "col", "re", "im"];
pub const SPECTRUM_HEADER: [&str; 3] = ["epsilon", "index", "eigenvalue"];
pub const DENSITY_HEADER: [&str; 4] = ["t", "J_tilde", "gamma", "rho"];
pub const LOWER_SYMBOL_HEADER: [&str; 4] = ["epsilon", "gamma", "J_tilde", "value"];
pub const FIT_HEADER: [&str; 5] = ["level", "J_cl", "sigma", "residual", "cst"];

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("write failed: {e}"))
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(header).map_err(io_err)?;
    Ok(w)
}

/// One line per matrix entry, rows and columns labelled by level.
pub fn write_operator_csv<W: Write>(out: W, op: &OperatorMatrix) -> Result<()> {
    let mut w = writer(out, &OPERATOR_HEADER)?;
    for n in op.levels() {
        for m in op.levels() {
            let z = op.get(n, m);
            w.write_record([n.to_string(), m.to_string(), fmt_f64(z.re), fmt_f64(z.im)])
                .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorJson {
    pub offset: i64,
    pub dim: usize,
    /// Row-major real and imaginary parts.
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&OperatorMatrix> for OperatorJson {
    fn from(op: &OperatorMatrix) -> Self {
        let rows = |part: fn(&num_complex::Complex64) -> f64| {
            op.levels()
                .map(|n| op.levels().map(|m| part(&op.get(n, m))).collect())
                .collect()
        };
        Self {
            offset: op.offset,
            dim: op.dim(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

pub fn write_operator_json<W: Write>(out: W, op: &OperatorMatrix) -> Result<()> {
    serde_json::to_writer_pretty(out, &OperatorJson::from(op)).map_err(io_err)
}

/// Sorted eigenvalues, one block per parameter value.
pub fn write_spectrum_csv<W: Write>(out: W, blocks: &[(f64, Vec<f64>)]) -> Result<()> {
    let mut w = writer(out, &SPECTRUM_HEADER)?;
    for (eps, values) in blocks {
        for (i, v) in values.iter().enumerate() {
            w.write_record([fmt_f64(*eps), i.to_string(), fmt_f64(*v)])
                .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn write_density_csv<W: Write>(out: W, samples: &[DensitySample]) -> Result<()> {
    let mut w = writer(out, &DENSITY_HEADER)?;
    for s in samples {
        w.write_record([fmt_f64(s.t), fmt_f64(s.j_tilde), fmt_f64(s.gamma), fmt_f64(s.rho)])
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerSymbolRow {
    pub epsilon: f64,
    pub gamma: f64,
    pub j_tilde: f64,
    pub value: f64,
}

pub fn write_lower_symbol_csv<W: Write>(out: W, rows: &[LowerSymbolRow]) -> Result<()> {
    let mut w = writer(out, &LOWER_SYMBOL_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.epsilon),
            fmt_f64(r.gamma),
            fmt_f64(r.j_tilde),
            fmt_f64(r.value),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_fit_csv<W: Write>(out: W, fit: &SigmaFit) -> Result<()> {
    let mut w = writer(out, &FIT_HEADER)?;
    for (i, level) in fit.levels.iter().enumerate() {
        w.write_record([
            level.to_string(),
            fmt_f64(fit.centers[i]),
            fmt_f64(fit.sigmas[i]),
            fmt_f64(fit.residuals[i]),
            fmt_f64(fit.cst),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_json<W: Write, T: Serialize>(out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(out, value).map_err(io_err)
}

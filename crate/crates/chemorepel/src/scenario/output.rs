//! Serialization of runs: the diagnostics CSV, ODE trajectory CSV, sweep
//! region map, field snapshots, and the check report.
//!
//! Every floating-point value is written with 17 significant digits, so
//! parsing a file back reproduces the exact bit pattern and regression
//! comparisons can diff files byte for byte.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::{CumulativeIntegrals, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::model::Grid;
use crate::ode::OdeState;

/// Frozen column schema of the diagnostics CSV.
pub const SERIES_HEADER: &str = "t,mass_u,mass_v,k1,k2,k3,F1,F2,grad_u_sq,grad_v_sq,lap_v_sq,\
                                 l2_u_err_sq,l2_v_err_sq,f_inhom_sq,int_k1,int_k2,int_k3,\
                                 int_grad_u,int_grad_v,int_lap_v";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Write the per-sample diagnostics CSV. `records` and `cumulative` are
/// parallel arrays (one running-integral snapshot per record). A missing F1
/// (positivity floor hit) serializes as an empty field; F2 likewise.
pub fn write_series(
    records: &[DiagnosticsRecord],
    cumulative: &[CumulativeIntegrals],
    path: &Path,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::domain("write_series needs at least one record"));
    }
    if records.len() != cumulative.len() {
        return Err(Error::shape(format!(
            "{} records but {} cumulative snapshots",
            records.len(),
            cumulative.len()
        )));
    }
    for pair in records.windows(2) {
        if !(pair[1].t > pair[0].t) {
            return Err(Error::domain(format!(
                "records must be strictly time-sorted: {} then {}",
                pair[0].t, pair[1].t
            )));
        }
    }
    let mut out = String::with_capacity(records.len() * 400);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for (rec, cum) in records.iter().zip(cumulative) {
        let cols = [
            fmt(rec.t),
            fmt(rec.mass_u),
            fmt(rec.mass_v),
            fmt(rec.k1),
            fmt(rec.k2),
            fmt(rec.k3),
            fmt_opt(rec.f1),
            fmt_opt(rec.f2),
            fmt(rec.grad_u_sq),
            fmt(rec.grad_v_sq),
            fmt(rec.lap_v_sq),
            fmt(rec.l2_u_err_sq),
            fmt(rec.l2_v_err_sq),
            fmt(rec.f_inhomogeneity_sq),
            fmt(cum.int_k1),
            fmt(cum.int_k2),
            fmt(cum.int_k3),
            fmt(cum.int_grad_u),
            fmt(cum.int_grad_v),
            fmt(cum.int_lap_v),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write a homogeneous trajectory as t,u_tilde,v_tilde rows.
pub fn write_ode_series(samples: &[OdeState], path: &Path) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::domain("write_ode_series needs at least one sample"));
    }
    let mut out = String::with_capacity(samples.len() * 70);
    out.push_str("t,u_tilde,v_tilde\n");
    for s in samples {
        out.push_str(&format!("{},{},{}\n", fmt(s.t), fmt(s.u_tilde), fmt(s.v_tilde)));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Dump one field: a `t=<time> n=<cells> dim=<d>` header line, then cell
/// values in row-major order, one per line.
pub fn write_snapshot(values: &[f64], grid: &Grid, t: f64, path: &Path) -> Result<()> {
    if values.len() != grid.cell_count() {
        return Err(Error::shape(format!(
            "snapshot has {} values but the grid has {} cells",
            values.len(),
            grid.cell_count()
        )));
    }
    let mut file = fs::File::create(path)?;
    writeln!(file, "t={} n={} dim={}", fmt(t), grid.cell_count(), grid.dimension())?;
    let mut body = String::with_capacity(values.len() * 25);
    for v in values {
        body.push_str(&fmt(*v));
        body.push('\n');
    }
    file.write_all(body.as_bytes())?;
    Ok(())
}

/// Load a snapshot written by [`write_snapshot`]: returns (t, values).
pub fn read_snapshot(path: &Path) -> Result<(f64, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::validation(format!("{}: empty snapshot", path.display())))?;
    let mut t = None;
    let mut n = None;
    for part in header.split_whitespace() {
        if let Some(v) = part.strip_prefix("t=") {
            t = v.parse::<f64>().ok();
        } else if let Some(v) = part.strip_prefix("n=") {
            n = v.parse::<usize>().ok();
        }
    }
    let (Some(t), Some(n)) = (t, n) else {
        return Err(Error::validation(format!("{}: malformed snapshot header", path.display())));
    };
    let values = lines
        .map(|l| {
            l.trim().parse::<f64>().map_err(|_| {
                Error::validation(format!("{}: bad snapshot value '{l}'", path.display()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != n {
        return Err(Error::validation(format!(
            "{}: header says {n} cells, body has {}",
            path.display(),
            values.len()
        )));
    }
    Ok((t, values))
}

//! Report tables, macro snapshots and the binary distribution dump.
//!
//! Dump layout, all little-endian:
//!
//! ```text
//! bytes 0..8    magic  b"VPBGKF64"
//! bytes 8..16   n_x    u64
//! bytes 16..24  n_v    u64   (half-count; rows hold 2 n_v + 1 values)
//! bytes 24..    f_{i,j} as f64, i-major, j ascending from -n_v, ghosts omitted
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, StabilityFlags};
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::harness::ConvergenceReport;
use crate::solver::{SimulationState, StepRecord};
use crate::transport::DistributionField;

pub const DUMP_MAGIC: &[u8; 8] = b"VPBGKF64";
pub const DUMP_HEADER_LEN: usize = 24;

pub const REPORT_HEADER: &str = "n_x,n_v,metric,error,order";
pub const SNAPSHOT_HEADER: &str = "x,rho,u,temp,e";

/// Scientific notation with 5 significant digits and a signed two-digit
/// exponent, e.g. `8.4656e-04`.
pub fn format_sci5(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Full-precision value for machine-readable tables.
fn format_full(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_report(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for row in &report.rows {
        for (k, metric) in report.metrics.iter().enumerate() {
            let order = row.orders[k].map(format_sci5).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.n_x,
                row.n_v,
                metric,
                format_sci5(row.errors[k]),
                order
            );
        }
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn emit_report(report: &ConvergenceReport, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &render_report(report))
}

pub fn render_snapshot(state: &SimulationState, grid: &PhaseGrid) -> String {
    let mut out = String::new();
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    let m = &state.macro_fields;
    for i in 0..grid.n_x() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_full(grid.x(i)),
            format_full(m.rho[i]),
            format_full(m.u[i]),
            format_full(m.temp[i]),
            format_full(state.e[i])
        );
    }
    out
}

/// Writes the macro table to `path`; with `f_dump` also the full
/// distribution in dump format.
pub fn emit_snapshot(
    state: &SimulationState,
    grid: &PhaseGrid,
    path: impl AsRef<Path>,
    f_dump: Option<&Path>,
) -> Result<()> {
    write_text(path.as_ref(), &render_snapshot(state, grid))?;
    if let Some(p) = f_dump {
        write_field_dump(&state.f, p)?;
    }
    Ok(())
}

pub fn encode_field_dump(f: &DistributionField) -> Vec<u8> {
    let mut buf = Vec::with_capacity(DUMP_HEADER_LEN + 8 * f.n_x() * f.n_vel());
    buf.extend_from_slice(DUMP_MAGIC);
    buf.extend_from_slice(&(f.n_x() as u64).to_le_bytes());
    buf.extend_from_slice(&(f.n_v() as u64).to_le_bytes());
    for v in f.interior() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_field_dump(bytes: &[u8]) -> Result<DistributionField> {
    if bytes.len() < DUMP_HEADER_LEN {
        return Err(Error::Format(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..8] != DUMP_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
    let n_x = usize::try_from(word(8)).map_err(|_| Error::Format("n_x overflows".into()))?;
    let n_v = usize::try_from(word(16)).map_err(|_| Error::Format("n_v overflows".into()))?;
    let count = n_v
        .checked_mul(2)
        .and_then(|w| w.checked_add(1))
        .and_then(|w| w.checked_mul(n_x))
        .ok_or_else(|| Error::Format("shape overflows".into()))?;
    let body = &bytes[DUMP_HEADER_LEN..];
    if body.len() != 8 * count {
        return Err(Error::Format(format!(
            "payload has {} bytes, shape ({n_x}, {n_v}) needs {}",
            body.len(),
            8 * count
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    DistributionField::from_interior(n_x, n_v, &values)
}

pub fn write_field_dump(f: &DistributionField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_field_dump(f)).map_err(|e| Error::io(path, e))
}

pub fn read_field_dump(path: impl AsRef<Path>) -> Result<DistributionField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_field_dump(&bytes)
}

pub fn render_diagnostics(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::from("step,t,mass,momentum,kinetic_energy,field_energy,total_energy,entropy,min_f,e_inf");
    if let Some(first) = records.first() {
        for (q, _) in &first.weighted_norms {
            let _ = write!(out, ",f_linf_q{q}");
        }
    }
    out.push('\n');
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.step,
            format_full(r.t),
            format_full(r.mass),
            format_full(r.momentum),
            format_full(r.kinetic_energy),
            format_full(r.field_energy),
            format_full(r.total_energy()),
            format_full(r.entropy),
            format_full(r.min_f),
            format_full(r.e_inf)
        );
        for (_, n) in &r.weighted_norms {
            let _ = write!(out, ",{}", format_full(*n));
        }
        out.push('\n');
    }
    out
}

pub fn render_stability(flags: &[StabilityFlags]) -> String {
    let mut out =
        String::from("step,t,mass,a1_bound,a1_pass,e_inf,a2_bound,a2_pass,min_f,positivity_pass,lower_bound_profile\n");
    for s in flags {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.step,
            format_full(s.t),
            format_full(s.a1_mass.value),
            format_full(s.a1_mass.bound),
            s.a1_mass.pass,
            format_full(s.a2_field.value),
            format_full(s.a2_field.bound),
            s.a2_field.pass,
            format_full(s.positivity.value),
            s.positivity.pass,
            format_full(s.lower_bound_profile)
        );
    }
    out
}

pub fn render_steps(steps: &[StepRecord]) -> String {
    let mut out = String::from("step,t,dt,courant,e_inf,min_f,mass\n");
    for s in steps {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.step,
            format_full(s.t),
            format_full(s.dt),
            format_full(s.courant),
            format_full(s.e_inf),
            format_full(s.min_f),
            format_full(s.mass)
        );
    }
    out
}

pub(crate) fn write_rendered(path: &Path, text: &str) -> Result<()> {
    write_text(path, text)
}

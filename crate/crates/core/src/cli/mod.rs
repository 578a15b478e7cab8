//! File-level interface: configuration parsing, run and study orchestration,
//! and the output files each produces.
//!
//! Every numeric file is a pure function of the configuration; only the
//! manifest carries a wall-clock time.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{run_study, StudyConfig, StudyOutcome, ERROR_CONVENTION, VELOCITY_RULE};
use crate::solver::{DtPolicy, SimulationState, SolverConfig};

pub use config::{parse_config, parse_config_str, render_config, ParsedConfig};
pub use output::{emit_report, emit_snapshot, format_sci5, read_field_dump, render_report, write_field_dump};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    /// Canonical `key = value` echo of the configuration.
    pub config: String,
    pub dt_policy: String,
    pub error_convention: Option<String>,
    pub velocity_rule: Option<String>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Write a snapshot and a distribution dump at every diagnostics record.
    pub snapshots: bool,
    /// Override the configured step-size policy with [`DtPolicy::Fixed`].
    pub fixed_dt: bool,
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs one simulation and writes its outputs into `out_dir`.
pub fn execute_run(config: &SolverConfig, out_dir: &Path, opts: &RunOptions) -> Result<(SimulationState, RunManifest)> {
    let start = Instant::now();
    let mut config = config.clone();
    if opts.fixed_dt {
        config.dt_policy = DtPolicy::Fixed;
    }
    if opts.snapshots {
        config.snapshot_f = true;
    }
    prepare_dir(out_dir)?;
    let grid = config.grid()?;
    let (state, log) = crate::solver::run(&config)?;

    let mut outputs = Vec::new();
    let put = |outputs: &mut Vec<PathBuf>, name: String, text: String| -> Result<()> {
        let p = out_dir.join(name);
        output::write_rendered(&p, &text)?;
        outputs.push(p);
        Ok(())
    };
    put(
        &mut outputs,
        "diagnostics.csv".into(),
        output::render_diagnostics(&log.records),
    )?;
    put(
        &mut outputs,
        "stability.csv".into(),
        output::render_stability(&log.stability),
    )?;
    put(&mut outputs, "steps.csv".into(), output::render_steps(&log.steps))?;
    put(
        &mut outputs,
        "snapshot_final.csv".into(),
        output::render_snapshot(&state, &grid),
    )?;
    if opts.snapshots {
        for snap in &log.snapshots {
            let snap_state = SimulationState {
                t: snap.t,
                step: snap.step,
                f: snap.f.clone().expect("snapshots keep f"),
                e: snap.e.clone(),
                macro_fields: snap.macro_fields.clone(),
            };
            put(
                &mut outputs,
                format!("snapshot_{:06}.csv", snap.step),
                output::render_snapshot(&snap_state, &grid),
            )?;
            let dump = out_dir.join(format!("f_{:06}.bin", snap.step));
            write_field_dump(&snap_state.f, &dump)?;
            outputs.push(dump);
        }
    }
    let dump = out_dir.join("f_final.bin");
    write_field_dump(&state.f, &dump)?;
    outputs.push(dump);

    let manifest_path = out_dir.join("manifest.json");
    outputs.push(manifest_path.clone());
    let manifest = RunManifest {
        command: "run".into(),
        code_version: CODE_VERSION.into(),
        config: render_config(&config, None),
        dt_policy: config.dt_policy.label().into(),
        error_convention: None,
        velocity_rule: None,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs,
    };
    manifest.write(&manifest_path)?;
    Ok((state, manifest))
}

/// Per-level summary of a study: step count and the extremes of the
/// per-step monitors.
pub fn render_level_summary(outcome: &StudyOutcome) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("n_x,n_v,steps,min_f,max_mass,max_e_inf,a1_pass,a2_pass,positivity_pass\n");
    for lvl in &outcome.levels {
        let steps = &lvl.log.steps;
        let min_f = lvl.log.min_f();
        let max_mass = steps.iter().map(|s| s.mass).fold(f64::NEG_INFINITY, f64::max);
        let max_e = steps.iter().map(|s| s.e_inf).fold(0.0, f64::max);
        let pass = |f: &dyn Fn(&crate::diagnostics::StabilityFlags) -> bool| lvl.log.stability.iter().all(f);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            lvl.grid.n_x(),
            lvl.grid.n_v(),
            steps.len(),
            format_sci5(min_f),
            format_sci5(max_mass),
            format_sci5(max_e),
            pass(&|s| s.a1_mass.pass),
            pass(&|s| s.a2_field.pass),
            pass(&|s| s.positivity.pass),
        );
    }
    out
}

/// Runs a convergence study and writes `report.csv`, `levels.csv` and the
/// manifest into `out_dir`.
pub fn execute_study(study: &StudyConfig, out_dir: &Path, opts: &RunOptions) -> Result<(StudyOutcome, RunManifest)> {
    let start = Instant::now();
    let mut study = study.clone();
    if opts.fixed_dt {
        study.base.dt_policy = DtPolicy::Fixed;
    }
    prepare_dir(out_dir)?;
    let outcome = run_study(&study)?;
    let report_path = out_dir.join("report.csv");
    emit_report(&outcome.report, &report_path)?;
    let levels_path = out_dir.join("levels.csv");
    output::write_rendered(&levels_path, &render_level_summary(&outcome))?;
    let manifest_path = out_dir.join("manifest.json");
    let manifest = RunManifest {
        command: "study".into(),
        code_version: CODE_VERSION.into(),
        config: render_config(&study.base, Some(study.levels)),
        dt_policy: study.base.dt_policy.label().into(),
        error_convention: Some(ERROR_CONVENTION.into()),
        velocity_rule: Some(VELOCITY_RULE.into()),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: vec![report_path, levels_path, manifest_path.clone()],
    };
    manifest.write(&manifest_path)?;
    Ok((outcome, manifest))
}

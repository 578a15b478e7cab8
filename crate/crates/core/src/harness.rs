//! Nested-grid self-convergence studies.
//!
//! Level `k` runs on `(n_x 2^k, n_v 2^k)` with the velocity box fixed. The
//! error of level `k` is measured against level `k + 1` at the shared nodes
//! (coarse `x_i = ` fine `x_{2i}`, coarse `v_j = ` fine `v_{2j}`) and the
//! shared final time; no external reference solution is involved.

use std::fmt;

use rayon::prelude::*;

use crate::diagnostics::weighted_linf_norm;
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::solver::{run, DiagnosticsLog, DtPolicy, SimulationState, SolverConfig};
use crate::transport::DistributionField;

/// How errors are measured; written into every run manifest.
pub const ERROR_CONVENTION: &str = "self-convergence: level k vs level k+1 restricted to shared nodes at t_final";
/// How the velocity count follows the spatial count across levels.
pub const VELOCITY_RULE: &str = "n_v doubles with n_x; v_max fixed";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// `||f_c - R f_f||_{L^inf_q}`
    WeightedF(f64),
    /// `max_i |E_c - R E_f|`
    FieldSup,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::WeightedF(q) => write!(f, "f_linf_q{q}"),
            Metric::FieldSup => write!(f, "e_linf"),
        }
    }
}

pub fn default_metrics(q_list: &[f64]) -> Vec<Metric> {
    q_list
        .iter()
        .map(|&q| Metric::WeightedF(q))
        .chain(std::iter::once(Metric::FieldSup))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n_x: usize,
    pub n_v: usize,
    pub dt_policy: DtPolicy,
    /// One entry per metric, in report metric order.
    pub errors: Vec<f64>,
    /// `log2(e_k / e_{k+1})`; `None` on the last row.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub metrics: Vec<Metric>,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    pub fn metric_index(&self, metric: Metric) -> Option<usize> {
        self.metrics.iter().position(|m| *m == metric)
    }

    pub fn errors_for(&self, metric: Metric) -> Vec<f64> {
        let k = self.metric_index(metric).expect("metric in report");
        self.rows.iter().map(|r| r.errors[k]).collect()
    }

    pub fn orders_for(&self, metric: Metric) -> Vec<f64> {
        let k = self.metric_index(metric).expect("metric in report");
        self.rows.iter().filter_map(|r| r.orders[k]).collect()
    }

    /// Order between the two finest error rows.
    pub fn final_order(&self, metric: Metric) -> Option<f64> {
        self.orders_for(metric).last().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub base: SolverConfig,
    pub levels: usize,
}

/// One resolution of a study.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub grid: PhaseGrid,
    pub state: SimulationState,
    pub log: DiagnosticsLog,
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub report: ConvergenceReport,
    pub levels: Vec<LevelRun>,
}

fn check_nested(fine: &PhaseGrid, coarse: &PhaseGrid) -> Result<()> {
    if !fine.is_refinement_of(coarse) {
        return Err(Error::NotNested(format!(
            "fine ({}, {}, v_max {}) is not a 2x refinement of coarse ({}, {}, v_max {})",
            fine.n_x(),
            fine.n_v(),
            fine.v_max(),
            coarse.n_x(),
            coarse.n_v(),
            coarse.v_max()
        )));
    }
    Ok(())
}

/// Samples the fine field at the coarse nodes, ghosts refreshed.
pub fn restrict_fine_to_coarse(
    f_fine: &DistributionField,
    grid_fine: &PhaseGrid,
    grid_coarse: &PhaseGrid,
) -> Result<DistributionField> {
    check_nested(grid_fine, grid_coarse)?;
    f_fine.check_shape(grid_fine)?;
    let mut out = DistributionField::zeros(grid_coarse);
    for i in 0..grid_coarse.n_x() {
        for j in grid_coarse.j_range() {
            out.set(i, j, f_fine.get(2 * i, 2 * j));
        }
    }
    out.refresh_ghosts();
    Ok(out)
}

pub fn restrict_nodes(values_fine: &[f64], n_coarse: usize) -> Result<Vec<f64>> {
    if values_fine.len() != 2 * n_coarse {
        return Err(Error::NotNested(format!(
            "{} fine nodes do not refine {} coarse nodes by 2",
            values_fine.len(),
            n_coarse
        )));
    }
    Ok((0..n_coarse).map(|i| values_fine[2 * i]).collect())
}

/// `||f_coarse - f_fine_restricted||_{L^inf_q}`.
pub fn pairwise_error(
    f_coarse: &DistributionField,
    f_fine_restricted: &DistributionField,
    grid_coarse: &PhaseGrid,
    q: f64,
) -> Result<f64> {
    f_coarse.check_shape(grid_coarse)?;
    f_fine_restricted.check_shape(grid_coarse)?;
    let diff = DistributionField::from_interior(
        grid_coarse.n_x(),
        grid_coarse.n_v(),
        &f_coarse
            .interior()
            .zip(f_fine_restricted.interior())
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    )?;
    Ok(weighted_linf_norm(&diff, grid_coarse, q))
}

/// `log2(e_coarse / e_fine)`.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0) {
        return Err(Error::NonPositive {
            name: "e_coarse",
            value: e_coarse,
        });
    }
    if !(e_fine > 0.0) {
        return Err(Error::NonPositive {
            name: "e_fine",
            value: e_fine,
        });
    }
    Ok((e_coarse / e_fine).log2())
}

fn level_config(base: &SolverConfig, level: usize) -> SolverConfig {
    base.clone().with_grid(base.n_x << level, base.n_v << level)
}

fn pair_errors(coarse: &LevelRun, fine: &LevelRun, metrics: &[Metric]) -> Result<Vec<f64>> {
    let restricted = restrict_fine_to_coarse(&fine.state.f, &fine.grid, &coarse.grid)?;
    let e_fine = restrict_nodes(fine.state.e.values(), coarse.grid.n_x())?;
    metrics
        .iter()
        .map(|m| match *m {
            Metric::WeightedF(q) => pairwise_error(&coarse.state.f, &restricted, &coarse.grid, q),
            Metric::FieldSup => Ok(coarse
                .state
                .e
                .values()
                .iter()
                .zip(&e_fine)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)),
        })
        .collect()
}

/// Assembles the error table from completed level runs (coarsest first).
pub fn build_report(levels: &[LevelRun], metrics: &[Metric], dt_policy: DtPolicy) -> Result<ConvergenceReport> {
    if levels.len() < 2 {
        return Err(Error::Config(format!(
            "a study needs at least 2 levels, got {}",
            levels.len()
        )));
    }
    let errors: Vec<Vec<f64>> = levels
        .windows(2)
        .map(|w| pair_errors(&w[0], &w[1], metrics))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(errors.len());
    for (k, errs) in errors.iter().enumerate() {
        let orders = match errors.get(k + 1) {
            Some(next) => errs
                .iter()
                .zip(next)
                .map(|(&a, &b)| observed_order(a, b).map(Some))
                .collect::<Result<Vec<_>>>()?,
            None => vec![None; metrics.len()],
        };
        rows.push(ReportRow {
            n_x: levels[k].grid.n_x(),
            n_v: levels[k].grid.n_v(),
            dt_policy,
            errors: errs.clone(),
            orders,
        });
    }
    Ok(ConvergenceReport {
        metrics: metrics.to_vec(),
        rows,
    })
}

/// Runs every level to `t_final` and assembles the report.
pub fn run_study(study: &StudyConfig) -> Result<StudyOutcome> {
    if study.levels < 2 {
        return Err(Error::Config(format!(
            "levels must be at least 2, got {}",
            study.levels
        )));
    }
    study.base.validate()?;
    let configs: Vec<SolverConfig> = (0..study.levels).map(|k| level_config(&study.base, k)).collect();
    let levels: Vec<LevelRun> = configs
        .par_iter()
        .enumerate()
        .map(|(level, cfg)| {
            let annotate = |source: Error| Error::AtLevel {
                level,
                n_x: cfg.n_x,
                n_v: cfg.n_v,
                source: Box::new(source),
            };
            let grid = cfg.grid().map_err(annotate)?;
            let (state, log) = run(cfg).map_err(annotate)?;
            Ok(LevelRun { grid, state, log })
        })
        .collect::<Result<_>>()?;
    let report = build_report(&levels, &default_metrics(&study.base.q_list), study.base.dt_policy)?;
    Ok(StudyOutcome { report, levels })
}

pub fn convergence_study(base: &SolverConfig, levels: usize) -> Result<ConvergenceReport> {
    run_study(&StudyConfig {
        base: base.clone(),
        levels,
    })
    .map(|o| o.report)
}

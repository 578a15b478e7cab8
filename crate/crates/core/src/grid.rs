//! Uniform node-centred phase-space mesh on `[0, 1) x [-V_M, V_M]` and the
//! CFL time-step rule.
//!
//! Spatial nodes are `x_i = i dx` for `i = 0..n_x` on the unit torus;
//! velocity nodes are `v_j = j dv` for `j = -n_v..=n_v`. Refining both
//! directions by two keeps every coarse node on the fine mesh, which is what
//! the convergence harness relies on.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    n_x: usize,
    dx: f64,
    n_v: usize,
    dv: f64,
    v_max: f64,
}

impl PhaseGrid {
    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Velocity half-count: nodes run over `j = -n_v..=n_v`.
    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Number of velocity nodes, `2 n_v + 1`.
    pub fn n_vel(&self) -> usize {
        2 * self.n_v + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn v(&self, j: isize) -> f64 {
        j as f64 * self.dv
    }

    /// Velocity nodes in ascending order, `v_{-n_v}, ..., v_{n_v}`.
    pub fn velocities(&self) -> Vec<f64> {
        self.j_range().map(|j| self.v(j)).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<isize> {
        let n = self.n_v as isize;
        -n..=n
    }

    /// Grid with both node counts doubled and the same velocity box.
    pub fn refined(&self) -> PhaseGrid {
        build_grid(2 * self.n_x, 2 * self.n_v, self.v_max).expect("refinement of a valid grid")
    }

    pub fn is_refinement_of(&self, coarse: &PhaseGrid) -> bool {
        self.n_x == 2 * coarse.n_x && self.n_v == 2 * coarse.n_v && self.v_max == coarse.v_max
    }
}

pub fn build_grid(n_x: usize, n_v: usize, v_max: f64) -> Result<PhaseGrid> {
    if n_x < 2 {
        return Err(Error::InvalidGrid(format!("n_x must be at least 2, got {n_x}")));
    }
    if n_v < 1 {
        return Err(Error::InvalidGrid(format!("n_v must be at least 1, got {n_v}")));
    }
    if !(v_max.is_finite() && v_max > 0.0) {
        return Err(Error::InvalidGrid(format!("v_max must be positive, got {v_max}")));
    }
    Ok(PhaseGrid {
        n_x,
        dx: 1.0 / n_x as f64,
        n_v,
        dv: v_max / n_v as f64,
        v_max,
    })
}

/// Truncation velocity `c / dv^gamma` tied to the velocity spacing.
///
/// Only for experiments with a mesh-coupled velocity box; the solver and the
/// harness always take `v_max` as given.
pub fn coupled_truncation_velocity(c: f64, dv: f64, gamma: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::NonPositive { name: "c", value: c });
    }
    if !(dv > 0.0) {
        return Err(Error::NonPositive { name: "dv", value: dv });
    }
    if !(0.5..1.0).contains(&gamma) {
        return Err(Error::Config(format!("gamma must lie in [1/2, 1), got {gamma}")));
    }
    Ok(c / dv.powf(gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepPlan {
    pub sigma: f64,
    pub dt: f64,
    pub t_final: f64,
}

impl TimeStepPlan {
    pub fn new(grid: &PhaseGrid, e_max: f64, sigma: f64, t_final: f64) -> Result<Self> {
        let dt = cfl_dt(grid, e_max, sigma)?;
        Ok(Self { sigma, dt, t_final })
    }
}

/// Largest admissible step: `sigma / (v_max / dx + e_max / dv)`.
pub fn cfl_dt(grid: &PhaseGrid, e_max: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidSigma(sigma));
    }
    if !(e_max.is_finite() && e_max >= 0.0) {
        return Err(Error::Config(format!(
            "e_max must be finite and nonnegative, got {e_max}"
        )));
    }
    Ok(sigma / (grid.v_max / grid.dx + e_max / grid.dv))
}

/// Worst-case Courant sum `dt |v| / dx + dt |E| / dv` over the velocity box.
pub fn courant_number(grid: &PhaseGrid, e_max: f64, dt: f64) -> f64 {
    dt / grid.dx * grid.v_max + dt / grid.dv * e_max
}

//! Discrete moments, the discrete local Maxwellian, and the BGK relaxation
//! step.
//!
//! The relaxation is implicit in form,
//! `f^{n+1} = f~ + dt/eps (M(f^{n+1}) - f^{n+1})`, but the Maxwellian of
//! `f^{n+1}` shares its moments with `f~`, so it is evaluated from the moments
//! of `f~` and the update reduces to the pointwise convex combination
//! `(eps f~ + dt M(f~)) / (eps + dt)`.
//!
//! The Maxwellian's discrete moments are not projected back onto `(rho, U, T)`;
//! the quadrature defect is left in place and measured by the diagnostics.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::transport::{refresh_row_ghosts, DistributionField};

/// Densities at or below this are rejected as degenerate.
pub const RHO_FLOOR: f64 = 1e-300;
/// Temperatures at or below this are rejected.
pub const TEMP_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct MacroFields {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub temp: Vec<f64>,
}

impl MacroFields {
    pub fn uniform(n_x: usize, rho: f64, u: f64, temp: f64) -> Self {
        Self {
            rho: vec![rho; n_x],
            u: vec![u; n_x],
            temp: vec![temp; n_x],
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Fails on the first node with a non-positive density or temperature.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.len() {
            check_node(i, self.rho[i], self.u[i], self.temp[i])?;
        }
        Ok(())
    }
}

/// Summation mode for the velocity reductions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MomentOptions {
    /// Neumaier-compensated sums instead of plain ascending-`j` accumulation.
    pub compensated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NodeMoments {
    pub rho: f64,
    pub u: f64,
    pub temp: f64,
}

fn check_node(i: usize, rho: f64, u: f64, temp: f64) -> Result<()> {
    if !(rho > RHO_FLOOR) {
        return Err(Error::DegenerateDensity { i, rho });
    }
    if !u.is_finite() {
        return Err(Error::NonFinite { i, j: 0 });
    }
    if !(temp > TEMP_FLOOR) {
        return Err(Error::NegativeTemperature { i, temp });
    }
    Ok(())
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Moments of one velocity row (ghosts excluded).
pub(crate) fn row_moments(
    i: usize,
    row: &[f64],
    velocities: &[f64],
    dv: f64,
    opts: MomentOptions,
) -> Result<NodeMoments> {
    let (s0, s1, s2) = if opts.compensated {
        let (mut a, mut b, mut c) = (Neumaier::default(), Neumaier::default(), Neumaier::default());
        for (&f, &v) in row.iter().zip(velocities) {
            a.add(f);
            b.add(v * f);
            c.add(v * v * f);
        }
        (a.total(), b.total(), c.total())
    } else {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (&f, &v) in row.iter().zip(velocities) {
            a += f;
            b += v * f;
            c += v * v * f;
        }
        (a, b, c)
    };
    let m0 = s0 * dv;
    let m1 = s1 * dv;
    let m2 = s2 * dv;
    if !(m0 > RHO_FLOOR) {
        return Err(Error::DegenerateDensity { i, rho: m0 });
    }
    let u = m1 / m0;
    let temp = (m2 - m0 * u * u) / m0;
    check_node(i, m0, u, temp)?;
    Ok(NodeMoments { rho: m0, u, temp })
}

pub fn discrete_moments(f: &DistributionField, grid: &PhaseGrid) -> Result<MacroFields> {
    discrete_moments_with(f, grid, MomentOptions::default())
}

/// `(rho, rho U, rho T + rho U^2) = sum_j f_{i,j} (1, v_j, v_j^2) dv`.
pub fn discrete_moments_with(f: &DistributionField, grid: &PhaseGrid, opts: MomentOptions) -> Result<MacroFields> {
    f.check_shape(grid)?;
    let vs = grid.velocities();
    let nodes: Vec<NodeMoments> = (0..grid.n_x())
        .into_par_iter()
        .map(|i| row_moments(i, f.row(i), &vs, grid.dv(), opts))
        .collect::<Result<_>>()?;
    Ok(MacroFields {
        rho: nodes.iter().map(|m| m.rho).collect(),
        u: nodes.iter().map(|m| m.u).collect(),
        temp: nodes.iter().map(|m| m.temp).collect(),
    })
}

/// Density only, `rho_i = sum_j f_{i,j} dv`. Does not validate.
pub fn density(f: &DistributionField, grid: &PhaseGrid) -> Vec<f64> {
    (0..grid.n_x())
        .map(|i| f.row(i).iter().sum::<f64>() * grid.dv())
        .collect()
}

#[inline]
pub fn maxwellian(rho: f64, u: f64, temp: f64, v: f64) -> f64 {
    let d = v - u;
    rho / (2.0 * PI * temp).sqrt() * (-(d * d) / (2.0 * temp)).exp()
}

#[inline]
fn fill_maxwellian_row(dst: &mut [f64], m: NodeMoments, velocities: &[f64]) {
    let amp = m.rho / (2.0 * PI * m.temp).sqrt();
    let inv_two_t = 1.0 / (2.0 * m.temp);
    for (d, &v) in dst.iter_mut().zip(velocities) {
        let c = v - m.u;
        *d = amp * (-(c * c) * inv_two_t).exp();
    }
}

/// Node-wise Gaussian; ghost rows carry the formula at `±(v_max + dv)`.
pub fn discrete_maxwellian(m: &MacroFields, grid: &PhaseGrid) -> Result<DistributionField> {
    if m.len() != grid.n_x() {
        return Err(Error::LengthMismatch {
            expected: grid.n_x(),
            actual: m.len(),
        });
    }
    m.validate()?;
    let mut padded_v = Vec::with_capacity(grid.n_vel() + 2);
    padded_v.push(-(grid.v_max() + grid.dv()));
    padded_v.extend(grid.velocities());
    padded_v.push(grid.v_max() + grid.dv());

    let mut out = DistributionField::zeros(grid);
    out.par_padded_rows_mut().enumerate().for_each(|(i, dst)| {
        let node = NodeMoments {
            rho: m.rho[i],
            u: m.u[i],
            temp: m.temp[i],
        };
        fill_maxwellian_row(dst, node, &padded_v);
    });
    Ok(out)
}

/// Per-row summary produced while relaxing in place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RowStats {
    pub min: f64,
    pub sum: f64,
}

fn relaxation_weights(eps: f64, dt: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::NonPositive {
            name: "eps",
            value: eps,
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonPositive { name: "dt", value: dt });
    }
    let denom = eps + dt;
    Ok((eps / denom, dt / denom))
}

/// Relaxes `f` toward the Maxwellian of its own moments, in place.
pub(crate) fn imex_in_place(
    f: &mut DistributionField,
    grid: &PhaseGrid,
    eps: f64,
    dt: f64,
    opts: MomentOptions,
) -> Result<Vec<RowStats>> {
    f.check_shape(grid)?;
    let (w_keep, w_eq) = relaxation_weights(eps, dt)?;
    let vs = grid.velocities();
    let dv = grid.dv();
    f.par_padded_rows_mut()
        .enumerate()
        .map_init(
            || vec![0.0; vs.len()],
            |scratch, (i, row)| {
                let n = row.len();
                let interior = &mut row[1..n - 1];
                let m = row_moments(i, interior, &vs, dv, opts)?;
                fill_maxwellian_row(scratch, m, &vs);
                let mut min = f64::INFINITY;
                let mut sum = 0.0;
                for (f, &eq) in interior.iter_mut().zip(scratch.iter()) {
                    *f = w_keep * *f + w_eq * eq;
                    min = min.min(*f);
                    sum += *f;
                }
                refresh_row_ghosts(row);
                Ok(RowStats { min, sum })
            },
        )
        .collect()
}

/// `f^{n+1} = (eps f~ + dt M(f~)) / (eps + dt)` with ghost rows refreshed.
pub fn imex_step(f_tilde: &DistributionField, grid: &PhaseGrid, eps: f64, dt: f64) -> Result<DistributionField> {
    imex_step_with(f_tilde, grid, eps, dt, MomentOptions::default())
}

pub fn imex_step_with(
    f_tilde: &DistributionField,
    grid: &PhaseGrid,
    eps: f64,
    dt: f64,
    opts: MomentOptions,
) -> Result<DistributionField> {
    let mut out = f_tilde.clone();
    imex_in_place(&mut out, grid, eps, dt, opts)?;
    Ok(out)
}

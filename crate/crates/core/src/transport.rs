//! Explicit upwind transport in `x` and force step in `v`.
//!
//! The step is evaluated in convex-combination form, where each new value is
//! a weighted average of the five-point stencil with nonnegative weights
//! whenever the Courant sum stays below one. Periodic wrap in `x`; velocity
//! neighbours beyond `±n_v` come from the ghost rows.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldVector;
use crate::grid::PhaseGrid;

/// Values `f_{i,j}` on every node plus one ghost node at each end of every
/// velocity row.
///
/// Stored row-major with `i` outer and `j` inner; row `i` holds
/// `[ghost_lo, f_{i,-n_v}, ..., f_{i,n_v}, ghost_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    n_x: usize,
    n_v: usize,
    data: Vec<f64>,
}

impl DistributionField {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        Self::zeros_with(grid.n_x(), grid.n_v())
    }

    fn zeros_with(n_x: usize, n_v: usize) -> Self {
        Self {
            n_x,
            n_v,
            data: vec![0.0; n_x * (2 * n_v + 3)],
        }
    }

    /// Samples `f(x_i, v_j)` on the grid; ghost rows take `f(x_i, ±v_max)`.
    pub fn from_fn(grid: &PhaseGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        let n = grid.n_v() as isize;
        for i in 0..grid.n_x() {
            let x = grid.x(i);
            for j in grid.j_range() {
                out.set(i, j, f(x, grid.v(j)));
            }
            let row = out.padded_row_mut(i);
            row[0] = f(x, -grid.v_max());
            row[2 * n as usize + 2] = f(x, grid.v_max());
        }
        out
    }

    /// Builds a field from `n_x * (2 n_v + 1)` values in `i`-major order.
    /// Ghost rows copy the boundary rows.
    pub fn from_interior(n_x: usize, n_v: usize, values: &[f64]) -> Result<Self> {
        let width = 2 * n_v + 1;
        if values.len() != n_x * width {
            return Err(Error::LengthMismatch {
                expected: n_x * width,
                actual: values.len(),
            });
        }
        let mut out = Self::zeros_with(n_x, n_v);
        for (i, chunk) in values.chunks_exact(width).enumerate() {
            out.row_mut(i).copy_from_slice(chunk);
        }
        out.refresh_ghosts();
        Ok(out)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn n_vel(&self) -> usize {
        2 * self.n_v + 1
    }

    fn stride(&self) -> usize {
        2 * self.n_v + 3
    }

    #[inline]
    fn index(&self, i: usize, j: isize) -> usize {
        debug_assert!(i < self.n_x);
        debug_assert!(j.unsigned_abs() <= self.n_v + 1);
        i * self.stride() + (j + self.n_v as isize + 1) as usize
    }

    /// `f_{i,j}` for `|j| <= n_v + 1` (ghosts included).
    #[inline]
    pub fn get(&self, i: usize, j: isize) -> f64 {
        self.data[self.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: isize, value: f64) {
        let k = self.index(i, j);
        self.data[k] = value;
    }

    pub fn ghost_lo(&self, i: usize) -> f64 {
        self.get(i, -(self.n_v as isize) - 1)
    }

    pub fn ghost_hi(&self, i: usize) -> f64 {
        self.get(i, self.n_v as isize + 1)
    }

    /// Velocity row `i` without ghosts, ascending in `j`.
    pub fn row(&self, i: usize) -> &[f64] {
        let s = self.stride();
        &self.data[i * s + 1..(i + 1) * s - 1]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.data[i * s + 1..(i + 1) * s - 1]
    }

    pub(crate) fn padded_row(&self, i: usize) -> &[f64] {
        let s = self.stride();
        &self.data[i * s..(i + 1) * s]
    }

    pub(crate) fn padded_row_mut(&mut self, i: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.data[i * s..(i + 1) * s]
    }

    pub(crate) fn padded_rows_mut(&mut self) -> std::slice::ChunksExactMut<'_, f64> {
        let s = self.stride();
        self.data.chunks_exact_mut(s)
    }

    pub(crate) fn par_padded_rows_mut(&mut self) -> rayon::slice::ChunksExactMut<'_, f64> {
        let s = self.stride();
        self.data.par_chunks_exact_mut(s)
    }

    /// All non-ghost values in `i`-major, `j`-minor order.
    pub fn interior(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_x).flat_map(move |i| self.row(i).iter().copied())
    }

    pub fn to_interior_vec(&self) -> Vec<f64> {
        self.interior().collect()
    }

    /// Copies each boundary row into its adjacent ghost row.
    pub fn refresh_ghosts(&mut self) {
        for row in self.padded_rows_mut() {
            refresh_row_ghosts(row);
        }
    }

    pub fn has_consistent_ghosts(&self) -> bool {
        (0..self.n_x).all(|i| {
            let r = self.padded_row(i);
            r[0] == r[1] && r[r.len() - 1] == r[r.len() - 2]
        })
    }

    pub fn min_interior(&self) -> f64 {
        self.interior().fold(f64::INFINITY, f64::min)
    }

    pub fn check_finite(&self) -> Result<()> {
        for i in 0..self.n_x {
            if let Some(k) = self.padded_row(i).iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    i,
                    j: k as isize - self.n_v as isize - 1,
                });
            }
        }
        Ok(())
    }

    pub fn check_shape(&self, grid: &PhaseGrid) -> Result<()> {
        if self.n_x != grid.n_x() || self.n_v != grid.n_v() {
            return Err(Error::ShapeMismatch {
                expected_x: grid.n_x(),
                expected_v: grid.n_v(),
                actual_x: self.n_x,
                actual_v: self.n_v,
            });
        }
        Ok(())
    }

    /// Cyclic shift by `k` cells in `x`: `out_{i+k} = f_i`.
    pub fn shifted_x(&self, k: usize) -> Self {
        let mut out = self.clone();
        for i in 0..self.n_x {
            let dst = (i + k) % self.n_x;
            out.padded_row_mut(dst).copy_from_slice(self.padded_row(i));
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n_x: self.n_x,
            n_v: self.n_v,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
}

#[inline]
pub(crate) fn refresh_row_ghosts(row: &mut [f64]) {
    let n = row.len();
    row[0] = row[1];
    row[n - 1] = row[n - 2];
}

/// Upwind interface value in `x`: `max(v,0) f_left + (-min(v,0)) f_right`.
///
/// Both weights are nonnegative, so for `v < 0` this is the magnitude of the
/// flux leaving through the left face; [`signed_flux_x`] carries the sign.
#[inline]
pub fn upwind_flux_x(v: f64, f_left: f64, f_right: f64) -> f64 {
    v.max(0.0) * f_left + (-v.min(0.0)) * f_right
}

/// Upwind interface value in `v`: `max(e,0) f_down + (-min(e,0)) f_up`.
#[inline]
pub fn upwind_flux_v(e: f64, f_down: f64, f_up: f64) -> f64 {
    e.max(0.0) * f_down + (-e.min(0.0)) * f_up
}

/// Physical upwind flux `v f` at an `x` interface.
#[inline]
pub fn signed_flux_x(v: f64, f_left: f64, f_right: f64) -> f64 {
    if v < 0.0 {
        -upwind_flux_x(v, f_left, f_right)
    } else {
        upwind_flux_x(v, f_left, f_right)
    }
}

/// Physical upwind flux `E f` at a `v` interface.
#[inline]
pub fn signed_flux_v(e: f64, f_down: f64, f_up: f64) -> f64 {
    if e < 0.0 {
        -upwind_flux_v(e, f_down, f_up)
    } else {
        upwind_flux_v(e, f_down, f_up)
    }
}

/// Returns the first spatial node whose Courant sum reaches one.
pub fn check_cfl(e: &FieldVector, grid: &PhaseGrid, dt: f64) -> Result<()> {
    let vx = dt / grid.dx() * grid.v(grid.n_v() as isize);
    for (i, ei) in e.values().iter().enumerate() {
        let courant = vx + dt / grid.dv() * ei.abs();
        if !(courant < 1.0) {
            return Err(Error::CflViolation {
                i,
                j: grid.n_v() as isize,
                courant,
            });
        }
    }
    Ok(())
}

fn check_inputs(f: &DistributionField, e: &FieldVector, grid: &PhaseGrid, dt: f64) -> Result<()> {
    f.check_shape(grid)?;
    if e.len() != grid.n_x() {
        return Err(Error::LengthMismatch {
            expected: grid.n_x(),
            actual: e.len(),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonPositive { name: "dt", value: dt });
    }
    check_cfl(e, grid, dt)
}

/// One explicit transport + force step, `f -> f~`.
pub fn transport_step(f: &DistributionField, e: &FieldVector, grid: &PhaseGrid, dt: f64) -> Result<DistributionField> {
    let mut out = DistributionField::zeros(grid);
    transport_step_into(f, e, grid, dt, &mut out)?;
    Ok(out)
}

/// [`transport_step`] writing into a preallocated field of the same shape.
pub fn transport_step_into(
    f: &DistributionField,
    e: &FieldVector,
    grid: &PhaseGrid,
    dt: f64,
    out: &mut DistributionField,
) -> Result<()> {
    check_inputs(f, e, grid, dt)?;
    out.check_shape(grid)?;

    let n_x = grid.n_x();
    let n_v = grid.n_v() as isize;
    let lam_x = dt / grid.dx();
    let lam_v = dt / grid.dv();
    // Courant weights per velocity node, identical for every row.
    let cx: Vec<f64> = grid.j_range().map(|j| lam_x * grid.v(j).abs()).collect();
    let cx_plus: Vec<f64> = grid.j_range().map(|j| lam_x * grid.v(j).max(0.0)).collect();
    let cx_minus: Vec<f64> = grid.j_range().map(|j| lam_x * (-grid.v(j).min(0.0))).collect();
    let width = (2 * n_v + 1) as usize;

    out.par_padded_rows_mut().enumerate().for_each(|(i, dst)| {
        let west = f.padded_row((i + n_x - 1) % n_x);
        let here = f.padded_row(i);
        let east = f.padded_row((i + 1) % n_x);
        let ei = e[i];
        let ce = lam_v * ei.abs();
        let ce_plus = lam_v * ei.max(0.0);
        let ce_minus = lam_v * (-ei.min(0.0));
        // padded index p = k + 1 for interior position k
        for k in 0..width {
            let p = k + 1;
            dst[p] = (1.0 - cx[k] - ce) * here[p]
                + cx_plus[k] * west[p]
                + cx_minus[k] * east[p]
                + ce_plus * here[p - 1]
                + ce_minus * here[p + 1];
        }
        refresh_row_ghosts(dst);
    });
    Ok(())
}

/// The same step written as a conservative flux difference,
/// `f - dt/dx (F_{i+1/2} - F_{i-1/2}) - dt/dv (G_{j+1/2} - G_{j-1/2})`.
///
/// Reference route for checking [`transport_step`]; not used by the solver.
pub fn transport_step_flux_form(
    f: &DistributionField,
    e: &FieldVector,
    grid: &PhaseGrid,
    dt: f64,
) -> Result<DistributionField> {
    check_inputs(f, e, grid, dt)?;
    let n_x = grid.n_x();
    let lam_x = dt / grid.dx();
    let lam_v = dt / grid.dv();
    let mut out = DistributionField::zeros(grid);
    for i in 0..n_x {
        let im = (i + n_x - 1) % n_x;
        let ip = (i + 1) % n_x;
        let ei = e[i];
        for j in grid.j_range() {
            let v = grid.v(j);
            let fx_right = signed_flux_x(v, f.get(i, j), f.get(ip, j));
            let fx_left = signed_flux_x(v, f.get(im, j), f.get(i, j));
            let gv_up = signed_flux_v(ei, f.get(i, j), f.get(i, j + 1));
            let gv_down = signed_flux_v(ei, f.get(i, j - 1), f.get(i, j));
            out.set(
                i,
                j,
                f.get(i, j) - lam_x * (fx_right - fx_left) - lam_v * (gv_up - gv_down),
            );
        }
    }
    out.refresh_ghosts();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, cfl_dt};
    use proptest::prelude::*;

    fn pseudo_random_field(grid: &PhaseGrid, seed: u64) -> DistributionField {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut f = DistributionField::from_fn(grid, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        });
        f.refresh_ghosts();
        f
    }

    #[test]
    fn flux_examples() {
        assert_eq!(upwind_flux_x(2.0, 3.0, 5.0), 6.0);
        assert_eq!(upwind_flux_x(-2.0, 3.0, 5.0), 10.0);
        assert_eq!(upwind_flux_x(0.0, 3.0, 5.0), 0.0);
        assert_eq!(upwind_flux_v(1.5, 2.0, 4.0), 3.0);
        assert_eq!(upwind_flux_v(-1.5, 2.0, 4.0), 6.0);
        assert_eq!(upwind_flux_v(0.0, 2.0, 4.0), 0.0);
        assert_eq!(signed_flux_x(-2.0, 3.0, 5.0), -10.0);
        assert_eq!(signed_flux_v(1.5, 2.0, 4.0), 3.0);
    }

    #[test]
    fn hand_evaluated_stencil() {
        // Same Courant weights as dx = dv = 1, v = 1, dt = 0.25:
        // dt/dx * v = 0.25 and dt/dv * |E| = 0.125 for E = -0.5.
        let g = build_grid(4, 1, 0.5).unwrap();
        let dt = 0.125;
        assert_eq!(dt / g.dx() * g.v(1), 0.25);
        let mut f = DistributionField::zeros(&g);
        // row j = 1 has v > 0; j = 0 below it and the ghost j = 2 above.
        let (west, north, center, east, south) = (3.0, 7.0, 5.0, 11.0, 13.0);
        f.set(0, 1, west);
        f.set(1, 1, center);
        f.set(2, 1, east);
        f.set(1, 0, south);
        f.set(1, 2, north);
        let e = FieldVector::from_values(vec![0.0, -0.5, 0.0, 0.0]).unwrap();
        let out = transport_step(&f, &e, &g, dt).unwrap();
        // 1 - 0.25 - 0.125 on the centre, 0.25 west, 0.125 north
        let want = 0.625 * center + 0.25 * west + 0.125 * north;
        assert!((out.get(1, 1) - want).abs() < 1e-14, "{} vs {want}", out.get(1, 1));

        let e = FieldVector::from_values(vec![0.0, -1.0, 0.0, 0.0]).unwrap();
        let out = transport_step(&f, &e, &g, dt).unwrap();
        let want = 0.25 * west + 0.25 * north + 0.5 * center;
        assert!((out.get(1, 1) - want).abs() < 1e-14);
    }

    #[test]
    fn constant_in_x_without_field_is_fixed() {
        let g = build_grid(10, 6, 3.0).unwrap();
        let f = DistributionField::from_fn(&g, |_, v| (-v * v / 2.0).exp());
        let e = FieldVector::zeros(10);
        let dt = cfl_dt(&g, 0.0, 0.9).unwrap();
        let out = transport_step(&f, &e, &g, dt).unwrap();
        for i in 0..10 {
            for j in g.j_range() {
                assert!((out.get(i, j) - f.get(i, j)).abs() <= 1e-16);
            }
        }
    }

    #[test]
    fn zero_field_conserves_mass() {
        let g = build_grid(17, 9, 4.0).unwrap();
        let f = pseudo_random_field(&g, 7);
        let e = FieldVector::zeros(17);
        let dt = cfl_dt(&g, 0.0, 0.9).unwrap();
        let out = transport_step(&f, &e, &g, dt).unwrap();
        let before: f64 = f.interior().sum();
        let after: f64 = out.interior().sum();
        assert!((before - after).abs() <= 1e-13 * before);
    }

    #[test]
    fn cfl_violation_reports_node() {
        let g = build_grid(8, 4, 2.0).unwrap();
        let f = DistributionField::zeros(&g);
        let mut e = vec![0.0; 8];
        e[3] = 50.0;
        let e = FieldVector::from_values(e).unwrap();
        let dt = cfl_dt(&g, 0.0, 0.9).unwrap();
        match transport_step(&f, &e, &g, dt) {
            Err(Error::CflViolation { i, j, courant }) => {
                assert_eq!(i, 3);
                assert_eq!(j, 4);
                assert!(courant >= 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_velocity_pair_grid() {
        let g = build_grid(3, 1, 1.0).unwrap();
        let f = pseudo_random_field(&g, 3);
        let e = FieldVector::from_values(vec![0.3, -0.2, 0.0]).unwrap();
        let dt = cfl_dt(&g, 0.3, 0.5).unwrap();
        let a = transport_step(&f, &e, &g, dt).unwrap();
        let b = transport_step_flux_form(&f, &e, &g, dt).unwrap();
        for (x, y) in a.interior().zip(b.interior()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(a.has_consistent_ghosts());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn convex_and_flux_forms_agree(seed in any::<u64>(), n_x in 2usize..12, n_v in 1usize..8,
                                       amp in 0.0f64..3.0, sigma in 0.05f64..0.99) {
            let g = build_grid(n_x, n_v, 2.5).unwrap();
            let f = pseudo_random_field(&g, seed);
            let e: Vec<f64> = (0..n_x).map(|i| amp * ((i as f64 + seed as f64 % 7.0).sin())).collect();
            let e = FieldVector::from_values(e).unwrap();
            let dt = cfl_dt(&g, e.max_abs(), sigma).unwrap();
            let a = transport_step(&f, &e, &g, dt).unwrap();
            let b = transport_step_flux_form(&f, &e, &g, dt).unwrap();
            for (x, y) in a.interior().zip(b.interior()) {
                prop_assert!((x - y).abs() <= 1e-15, "{} vs {}", x, y);
            }
        }

        #[test]
        fn output_within_stencil_bounds(seed in any::<u64>(), n_x in 2usize..10, n_v in 1usize..6,
                                        amp in 0.0f64..5.0) {
            let g = build_grid(n_x, n_v, 3.0).unwrap();
            let f = pseudo_random_field(&g, seed);
            let e: Vec<f64> = (0..n_x).map(|i| amp * (1.3 * i as f64 + 0.7).cos()).collect();
            let e = FieldVector::from_values(e).unwrap();
            let dt = cfl_dt(&g, e.max_abs(), 0.9).unwrap();
            let out = transport_step(&f, &e, &g, dt).unwrap();
            for i in 0..n_x {
                let im = (i + n_x - 1) % n_x;
                let ip = (i + 1) % n_x;
                for j in g.j_range() {
                    let stencil = [f.get(i, j), f.get(im, j), f.get(ip, j), f.get(i, j - 1), f.get(i, j + 1)];
                    let lo = stencil.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = stencil.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let v = out.get(i, j);
                    prop_assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
                }
            }
            prop_assert!(out.min_interior() >= 0.0);
        }

        #[test]
        fn shift_equivariance(seed in any::<u64>(), n_x in 2usize..10, shift in 0usize..10) {
            let g = build_grid(n_x, 4, 3.0).unwrap();
            let f = pseudo_random_field(&g, seed);
            let e: Vec<f64> = (0..n_x).map(|i| 0.4 * (2.1 * i as f64).sin()).collect();
            let mut e_shift = vec![0.0; n_x];
            for i in 0..n_x {
                e_shift[(i + shift) % n_x] = e[i];
            }
            let e = FieldVector::from_values(e).unwrap();
            let e_shift = FieldVector::from_values(e_shift).unwrap();
            let dt = cfl_dt(&g, e.max_abs(), 0.9).unwrap();
            let a = transport_step(&f, &e, &g, dt).unwrap().shifted_x(shift);
            let b = transport_step(&f.shifted_x(shift), &e_shift, &g, dt).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn rows_decouple_without_field(seed in any::<u64>(), row in 0usize..9, bump in 0.1f64..10.0) {
            let g = build_grid(6, 4, 3.0).unwrap();
            let f = pseudo_random_field(&g, seed);
            let j_bump = row as isize - 4;
            let mut perturbed = f.clone();
            for i in 0..6 {
                perturbed.set(i, j_bump, f.get(i, j_bump) + bump);
            }
            perturbed.refresh_ghosts();
            let e = FieldVector::zeros(6);
            let dt = cfl_dt(&g, 0.0, 0.9).unwrap();
            let a = transport_step(&f, &e, &g, dt).unwrap();
            let b = transport_step(&perturbed, &e, &g, dt).unwrap();
            for i in 0..6 {
                for j in g.j_range() {
                    if j != j_bump {
                        prop_assert_eq!(a.get(i, j), b.get(i, j));
                    }
                }
            }
        }

        #[test]
        fn mass_change_is_boundary_outflow(seed in any::<u64>(), n_x in 2usize..10, n_v in 1usize..6,
                                           amp in 0.0f64..4.0) {
            let g = build_grid(n_x, n_v, 3.0).unwrap();
            let f = pseudo_random_field(&g, seed);
            let e: Vec<f64> = (0..n_x).map(|i| amp * (0.9 * i as f64 - 1.0).sin()).collect();
            let e = FieldVector::from_values(e).unwrap();
            let dt = cfl_dt(&g, e.max_abs(), 0.9).unwrap();
            let out = transport_step(&f, &e, &g, dt).unwrap();
            let cell = g.dx() * g.dv();
            let before: f64 = f.interior().sum::<f64>() * cell;
            let after: f64 = out.interior().sum::<f64>() * cell;
            let n = n_v as isize;
            let predicted: f64 = (0..n_x)
                .map(|i| e[i] * (f.get(i, -n) - f.get(i, n)) * dt * g.dx())
                .sum();
            prop_assert!(((after - before) - predicted).abs() <= 1e-13 * before.max(1.0));
        }
    }
}

//! Electric field on the unit torus from the density, through the explicit
//! Green kernel of `-phi'' = rho - 1`, `E = -phi'`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    values: Vec<f64>,
}

impl FieldVector {
    pub fn zeros(n_x: usize) -> Self {
        Self { values: vec![0.0; n_x] }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|e| !e.is_finite()) {
            return Err(Error::NonFinite { i, j: 0 });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `max_i |E_i|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

impl std::ops::Index<usize> for FieldVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// How the kernel sum is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMethod {
    /// `O(n_x^2)` sum over `k` in ascending order for each node.
    #[default]
    Direct,
    /// `O(n_x)` evaluation through running sums of the source.
    PrefixSum,
}

/// `K(x, y) = y` for `y <= x`, `y - 1` otherwise.
pub fn green_kernel(x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain { name: "x", value: x });
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::OutOfDomain { name: "y", value: y });
    }
    Ok(kernel(x, y))
}

#[inline]
fn kernel(x: f64, y: f64) -> f64 {
    if y <= x {
        y
    } else {
        y - 1.0
    }
}

/// `E_i = sum_k K(x_i, x_k) (rho_k - 1) dx`.
pub fn electric_field(grid: &PhaseGrid, rho: &[f64]) -> Result<FieldVector> {
    electric_field_with(grid, rho, FieldMethod::Direct)
}

pub fn electric_field_with(grid: &PhaseGrid, rho: &[f64], method: FieldMethod) -> Result<FieldVector> {
    let n = grid.n_x();
    if rho.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: rho.len(),
        });
    }
    if let Some(i) = rho.iter().position(|r| !r.is_finite()) {
        return Err(Error::NonFinite { i, j: 0 });
    }
    let dx = grid.dx();
    let xs = grid.positions();
    let source: Vec<f64> = rho.iter().map(|r| r - 1.0).collect();

    let values = match method {
        FieldMethod::Direct => (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = xs[i];
                let mut acc = 0.0;
                for k in 0..n {
                    acc += kernel(xi, xs[k]) * source[k] * dx;
                }
                acc
            })
            .collect(),
        FieldMethod::PrefixSum => {
            // E_i = sum_k x_k s_k dx - sum_{k > i} s_k dx
            let first_moment: f64 = xs.iter().zip(&source).map(|(x, s)| x * s * dx).sum();
            let mut tail = vec![0.0; n];
            let mut acc = 0.0;
            for k in (0..n).rev() {
                tail[k] = acc;
                acc += source[k] * dx;
            }
            tail.iter().map(|t| first_moment - t).collect()
        }
    };
    Ok(FieldVector { values })
}

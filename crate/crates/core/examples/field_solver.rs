//! Electric field from a density through the periodic Green kernel.
//!
//! Compares both summation methods with the exact field of a cosine
//! perturbation, `E = a sin(2 pi k x) / (2 pi k)`, and shows the first-order
//! error decay under refinement.
//!
//! ```text
//! cargo run --release --example field_solver
//! ```

use std::f64::consts::PI;

use vpbgk::field::{electric_field_with, green_kernel, FieldMethod};
use vpbgk::grid::build_grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "K(0.25, 0.1) = {}, K(0.25, 0.6) = {}",
        green_kernel(0.25, 0.1)?,
        green_kernel(0.25, 0.6)?
    );

    let (a, k) = (0.01, 1.0);
    println!(
        "{:>6} {:>12} {:>8} {:>12}",
        "n_x", "max error", "order", "|direct - prefix|"
    );
    let mut prev: Option<f64> = None;
    for n_x in [40, 80, 160, 320, 640, 1280] {
        let grid = build_grid(n_x, 1, 1.0)?;
        let xs = grid.positions();
        let rho: Vec<f64> = xs.iter().map(|x| 1.0 + a * (2.0 * PI * k * x).cos()).collect();
        let direct = electric_field_with(&grid, &rho, FieldMethod::Direct)?;
        let prefix = electric_field_with(&grid, &rho, FieldMethod::PrefixSum)?;
        let err = xs
            .iter()
            .zip(direct.values())
            .map(|(x, e)| (e - a * (2.0 * PI * k * x).sin() / (2.0 * PI * k)).abs())
            .fold(0.0, f64::max);
        let gap = direct
            .values()
            .iter()
            .zip(prefix.values())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        let order = prev.map(|p| format!("{:.3}", (p / err).log2())).unwrap_or_default();
        println!("{n_x:>6} {err:>12.4e} {order:>8} {gap:>12.2e}");
        prev = Some(err);
    }
    Ok(())
}

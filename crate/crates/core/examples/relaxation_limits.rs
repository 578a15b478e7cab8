//! The IMEX relaxation step across Knudsen numbers.
//!
//! Starting from a two-bump distribution, one step of size `dt` blends it
//! with its own discrete Maxwellian. The distances to both end states show
//! the free-streaming (`eps` large) and equilibrium (`eps` small) limits,
//! and the moments are unchanged throughout.
//!
//! ```text
//! cargo run --release --example relaxation_limits
//! ```

use vpbgk::grid::build_grid;
use vpbgk::relaxation::{discrete_maxwellian, discrete_moments, imex_step, maxwellian};
use vpbgk::transport::DistributionField;

fn rel_linf(a: &DistributionField, b: &DistributionField) -> f64 {
    let scale = b.interior().fold(0.0f64, |m, x| m.max(x.abs()));
    a.interior()
        .zip(b.interior())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = build_grid(16, 80, 15.0)?;
    let f = DistributionField::from_fn(&grid, |x, v| {
        let w = 0.5 + 0.1 * (2.0 * std::f64::consts::PI * x).sin();
        w * maxwellian(1.0, -2.0, 0.5, v) + (1.0 - w) * maxwellian(1.0, 1.5, 1.0, v)
    });
    let m0 = discrete_moments(&f, &grid)?;
    let eq = discrete_maxwellian(&m0, &grid)?;
    let dt = 1e-3;

    println!("dt = {dt}; distance to f~ and to M(f~), relative L-inf");
    println!("{:>8} {:>12} {:>12} {:>12}", "eps", "to f~", "to M(f~)", "moment drift");
    for eps in [1e12, 1e3, 1.0, 1e-3, 1e-6, 1e-12] {
        let g = imex_step(&f, &grid, eps, dt)?;
        let m = discrete_moments(&g, &grid)?;
        let drift = (0..grid.n_x())
            .map(|i| {
                (m.rho[i] - m0.rho[i])
                    .abs()
                    .max((m.u[i] - m0.u[i]).abs())
                    .max((m.temp[i] - m0.temp[i]).abs())
            })
            .fold(0.0, f64::max);
        println!(
            "{eps:>8.0e} {:>12.3e} {:>12.3e} {drift:>12.2e}",
            rel_linf(&g, &f),
            rel_linf(&g, &eq)
        );
    }
    Ok(())
}

//! Linear Landau damping from tabulated initial data.
//!
//! `f0 = (1 + a cos(k x)) M(v)` with `k = 2 pi` on the unit torus, run
//! collisionless and with strong collisions. The field energy decays in the
//! first case; in the second the near-equilibrium gas oscillates like a
//! fluid plasma and the energy keeps returning.
//!
//! ```text
//! cargo run --release --example landau_damping -- [n_x]
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use vpbgk::relaxation::maxwellian;
use vpbgk::solver::{InitialCondition, Simulation, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_x: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(64);
    let n_v = 2 * n_x;
    let v_max = 8.0;
    let a = 0.05;

    let grid = vpbgk::build_grid(n_x, n_v, v_max)?;
    let mut table = Vec::with_capacity(n_x * grid.n_vel());
    for i in 0..n_x {
        for j in grid.j_range() {
            table.push((1.0 + a * (2.0 * PI * grid.x(i)).cos()) * maxwellian(1.0, 0.0, 0.05, grid.v(j)));
        }
    }
    let table = Arc::new(table);

    for (label, eps, collisionless) in [("collisionless", 1.0, true), ("eps = 1e-3", 1e-3, false)] {
        let config = SolverConfig {
            n_x,
            n_v,
            v_max,
            eps,
            t_final: 3.0,
            sigma: 0.9,
            initial_condition: InitialCondition::Tabulated(table.clone()),
            collisionless,
            ..SolverConfig::paper_test(eps)
        };
        let mut sim = Simulation::new(config)?;
        println!("{label}");
        let mut next = 0.0;
        while !sim.is_finished() {
            let st = sim.state();
            if st.t >= next {
                let energy: f64 = st.e.values().iter().map(|e| e * e).sum::<f64>() * grid.dx();
                println!("  t = {:>6.3}  field energy {:.4e}", st.t, energy);
                next += 0.25;
            }
            sim.step()?;
        }
    }
    Ok(())
}

//! Stability monitors along runs at several Knudsen numbers: the mass and
//! field bounds, strict positivity and the recorded lower-bound profile
//! `min f e^{|v|^2}`.
//!
//! ```text
//! cargo run --release --example stability_ledger -- [n_x]
//! ```

use vpbgk::solver::{run, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_x: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(40);
    for eps in [1.0, 0.01, 0.0001] {
        let config = SolverConfig {
            diagnostics_every: 67,
            ..SolverConfig::paper_test(eps).with_grid(n_x, 2 * n_x)
        };
        let (_, log) = run(&config)?;
        println!("eps = {eps}");
        println!(
            "  {:>5} {:>7} {:>15} {:>10} {:>11} {:>10} {:>10} {:>11}",
            "step", "t", "mass", "A1 bound", "max |E|", "A2 bound", "min f", "min f e^v2"
        );
        for s in &log.stability {
            println!(
                "  {:>5} {:>7.4} {:>15.12} {:>10.3e} {:>11.4e} {:>10.3e} {:>10.3e} {:>11.3e}",
                s.step,
                s.t,
                s.a1_mass.value,
                s.a1_mass.bound,
                s.a2_field.value,
                s.a2_field.bound,
                s.positivity.value,
                s.lower_bound_profile
            );
        }
        let all = log.stability.iter().all(|s| s.all_pass());
        println!(
            "  all recorded checks pass: {all}; min f over every step {:.3e}",
            log.min_f()
        );
    }
    Ok(())
}

//! One run of the perturbed-Maxwellian test with periodic diagnostics.
//!
//! ```text
//! cargo run --release --example single_run -- [eps] [n_x]
//! ```

use vpbgk::solver::{run, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.01);
    let n_x: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(80);

    let config = SolverConfig {
        diagnostics_every: 40,
        ..SolverConfig::paper_test(eps).with_grid(n_x, 2 * n_x)
    };
    let (state, log) = run(&config)?;

    println!(
        "{:>6} {:>8} {:>16} {:>12} {:>16} {:>14} {:>11} {:>11}",
        "step", "t", "mass", "momentum", "energy", "entropy", "min f", "max |E|"
    );
    for r in &log.records {
        println!(
            "{:>6} {:>8.5} {:>16.13} {:>12.3e} {:>16.13} {:>14.10} {:>11.3e} {:>11.4e}",
            r.step,
            r.t,
            r.mass,
            r.momentum,
            r.total_energy(),
            r.entropy,
            r.min_f,
            r.e_inf
        );
    }
    let last = log.records.last().expect("final record");
    for (q, norm) in &last.weighted_norms {
        println!("||f||_(L^inf, q = {q}) = {norm:.6}");
    }
    let dts: Vec<f64> = log.steps.iter().map(|s| s.dt).collect();
    println!(
        "{} steps to t = {}, dt in [{:.4e}, {:.4e}], max Courant sum {:.4}",
        state.step,
        state.t,
        dts.iter().cloned().fold(f64::INFINITY, f64::min),
        dts.iter().cloned().fold(0.0, f64::max),
        log.steps.iter().map(|s| s.courant).fold(0.0, f64::max)
    );
    Ok(())
}

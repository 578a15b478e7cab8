//! Nested-grid convergence table for the smooth perturbed-Maxwellian test.
//!
//! ```text
//! cargo run --release --example convergence_table -- [eps] [levels]
//! ```
//!
//! Defaults to `eps = 1` and 5 levels, `(40, 80)` through `(640, 1280)`.

use std::time::Instant;

use vpbgk::harness::{run_study, Metric, StudyConfig};
use vpbgk::solver::SolverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    let levels: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);

    let start = Instant::now();
    let outcome = run_study(&StudyConfig {
        base: SolverConfig::paper_test(eps),
        levels,
    })?;
    let report = &outcome.report;

    println!("eps = {eps}, {levels} levels, {:.1} s", start.elapsed().as_secs_f64());
    print!("{:>12}", "(n_x, n_v)");
    for m in &report.metrics {
        print!("  {:>22}", m.to_string());
    }
    println!();
    for row in &report.rows {
        print!("{:>12}", format!("({}, {})", row.n_x, row.n_v));
        for (e, o) in row.errors.iter().zip(&row.orders) {
            let o = o.map(|o| format!("{o:.3}")).unwrap_or_default();
            print!("  {:>14.4e} {:>7}", e, o);
        }
        println!();
    }
    for lvl in &outcome.levels {
        println!(
            "level ({}, {}): {} steps, min f = {:.3e}",
            lvl.grid.n_x(),
            lvl.grid.n_v(),
            lvl.log.steps.len(),
            lvl.log.min_f()
        );
    }
    if let Some(o) = report.final_order(Metric::FieldSup) {
        println!("final-pair order for E: {o:.3}");
    }
    Ok(())
}

//! First-order IMEX finite-difference solver for the one-dimensional
//! Vlasov-Poisson-BGK model
//!
//! ```text
//! f_t + v f_x + E f_v = (M(f) - f) / eps,   E_x = rho - 1,   x in T = [0, 1)
//! ```
//!
//! on a uniform node-centred phase-space grid with a truncated velocity box.
//! Transport and force are upwinded explicitly; the BGK relaxation is treated
//! implicitly and solved in closed form from the moments of the transported
//! distribution.
//!
//! The crate is organised by stage of the scheme:
//!
//! - [`grid`]: mesh construction and the CFL step rule
//! - [`field`]: electric field from the density through the torus Green kernel
//! - [`transport`]: the distribution storage and the upwind step
//! - [`relaxation`]: discrete moments, the discrete Maxwellian and the IMEX step
//! - [`solver`]: the time loop
//! - [`diagnostics`]: conservation, entropy and stability monitors
//! - [`harness`]: nested-grid convergence studies
//! - [`cli`]: config files, report and snapshot output

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod relaxation;
pub mod solver;
pub mod transport;

pub use error::{Error, Result};
pub use field::{electric_field, green_kernel, FieldMethod, FieldVector};
pub use grid::{build_grid, cfl_dt, PhaseGrid, TimeStepPlan};
pub use harness::{convergence_study, observed_order, ConvergenceReport, Metric, StudyConfig};
pub use relaxation::{discrete_maxwellian, discrete_moments, imex_step, MacroFields};
pub use solver::{
    advance_step, initialize, run, DiagnosticsLog, DtPolicy, InitialCondition, Simulation, SimulationState,
    SolverConfig,
};
pub use transport::{transport_step, DistributionField};

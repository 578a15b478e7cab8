//! Time loop: density, field, transport, relaxation.
//!
//! Each step reads the field computed from `f^n`, picks a step size from the
//! CFL rule, forms `f~ = T(f^n, E^n)` and relaxes it to `f^{n+1}`. The last
//! step is shortened so every run ends exactly at `t_final`.

use std::sync::Arc;

use crate::diagnostics::{stability_report, DiagnosticsRecord, StabilityFlags};
use crate::error::{Error, Result};
use crate::field::{electric_field_with, FieldMethod, FieldVector};
use crate::grid::{build_grid, cfl_dt, courant_number, PhaseGrid};
use crate::relaxation::{discrete_moments_with, imex_in_place, maxwellian, MacroFields, MomentOptions};
use crate::transport::{transport_step_into, DistributionField};

/// Relative overshoot of the CFL step accepted on the final step.
pub const FINAL_STEP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `(1 + 0.01 cos 2 pi x) exp(-v^2 / 2) / sqrt(2 pi)`.
    PaperTest,
    UniformMaxwellian {
        rho: f64,
        u: f64,
        temp: f64,
    },
    /// `n_x * (2 n_v + 1)` values, `i`-major.
    Tabulated(Arc<Vec<f64>>),
}

impl InitialCondition {
    pub fn label(&self) -> &'static str {
        match self {
            InitialCondition::PaperTest => "paper_test",
            InitialCondition::UniformMaxwellian { .. } => "uniform_maxwellian",
            InitialCondition::Tabulated(_) => "tabulated",
        }
    }
}

/// Initial profile of the convergence test.
pub fn paper_test_profile(x: f64, v: f64) -> f64 {
    use std::f64::consts::PI;
    (1.0 + 0.01 * (2.0 * PI * x).cos()) * (-v * v / 2.0).exp() / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DtPolicy {
    /// Step recomputed from `max |E^n|` before every step.
    #[default]
    Adaptive,
    /// One step size from the initial field, `t_final / ceil(t_final / dt_0)`;
    /// any later step that would break the CFL bound is an error.
    Fixed,
}

impl DtPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            DtPolicy::Adaptive => "adaptive",
            DtPolicy::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub n_x: usize,
    pub n_v: usize,
    pub v_max: f64,
    /// Knudsen number.
    pub eps: f64,
    pub t_final: f64,
    /// CFL safety factor in `(0, 1)`.
    pub sigma: f64,
    pub initial_condition: InitialCondition,
    /// Diagnostics cadence in steps; 0 records only the first and last state.
    pub diagnostics_every: usize,
    /// Exponents of the weighted sup norms, each `> 3`.
    pub q_list: Vec<f64>,
    pub dt_policy: DtPolicy,
    pub field_method: FieldMethod,
    pub compensated_moments: bool,
    /// Keep full distribution copies in the snapshots.
    pub snapshot_f: bool,
    /// Force `E = 0` (pure phase-space transport).
    pub zero_field: bool,
    /// Skip the BGK step (collisionless transport).
    pub collisionless: bool,
}

impl SolverConfig {
    /// The convergence-test setup on the coarsest grid: `(40, 80)`,
    /// `v_max = 15`, `t_final = 0.4`, `sigma = 0.9`.
    pub fn paper_test(eps: f64) -> Self {
        Self {
            n_x: 40,
            n_v: 80,
            v_max: 15.0,
            eps,
            t_final: 0.4,
            sigma: 0.9,
            initial_condition: InitialCondition::PaperTest,
            diagnostics_every: 0,
            q_list: vec![4.0, 5.0],
            dt_policy: DtPolicy::Adaptive,
            field_method: FieldMethod::Direct,
            compensated_moments: false,
            snapshot_f: false,
            zero_field: false,
            collisionless: false,
        }
    }

    pub fn with_grid(mut self, n_x: usize, n_v: usize) -> Self {
        self.n_x = n_x;
        self.n_v = n_v;
        self
    }

    pub fn grid(&self) -> Result<PhaseGrid> {
        build_grid(self.n_x, self.n_v, self.v_max)
    }

    pub fn moment_options(&self) -> MomentOptions {
        MomentOptions {
            compensated: self.compensated_moments,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "t_final must be finite and nonnegative, got {}",
                self.t_final
            )));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::InvalidSigma(self.sigma));
        }
        if let Some(q) = self.q_list.iter().find(|q| !(**q > 3.0 && q.is_finite())) {
            return Err(Error::Config(format!(
                "weighted-norm exponent q = {q} must satisfy q > 3"
            )));
        }
        match &self.initial_condition {
            InitialCondition::UniformMaxwellian { rho, u, temp } => {
                if !(*rho > 0.0 && *temp > 0.0 && u.is_finite()) {
                    return Err(Error::Config(format!(
                        "uniform Maxwellian needs rho > 0 and temp > 0, got ({rho}, {u}, {temp})"
                    )));
                }
            }
            InitialCondition::Tabulated(values) => {
                let expected = self.n_x * (2 * self.n_v + 1);
                if values.len() != expected {
                    return Err(Error::LengthMismatch {
                        expected,
                        actual: values.len(),
                    });
                }
            }
            InitialCondition::PaperTest => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub step: usize,
    pub f: DistributionField,
    /// Field of the density of `f`.
    pub e: FieldVector,
    pub macro_fields: MacroFields,
}

/// Cheap per-step record, kept for every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Time after the step.
    pub t: f64,
    pub dt: f64,
    /// Worst-case Courant sum of the step.
    pub courant: f64,
    /// `max |E^n|` used by the step.
    pub e_inf: f64,
    /// `min f^{n+1}` over non-ghost nodes.
    pub min_f: f64,
    /// `sum f^{n+1} dx dv`.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub macro_fields: MacroFields,
    pub e: FieldVector,
    pub f: Option<DistributionField>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsLog {
    pub dt_policy: DtPolicy,
    pub records: Vec<DiagnosticsRecord>,
    pub stability: Vec<StabilityFlags>,
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
}

impl DiagnosticsLog {
    pub fn min_f(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.min_f)
            .chain(self.records.iter().map(|r| r.min_f))
            .fold(f64::INFINITY, f64::min)
    }
}

fn field_of(f: &DistributionField, grid: &PhaseGrid, config: &SolverConfig) -> Result<(MacroFields, FieldVector)> {
    let macro_fields = discrete_moments_with(f, grid, config.moment_options())?;
    let e = if config.zero_field {
        FieldVector::zeros(grid.n_x())
    } else {
        electric_field_with(grid, &macro_fields.rho, config.field_method)?
    };
    Ok((macro_fields, e))
}

pub fn initialize(config: &SolverConfig, grid: &PhaseGrid) -> Result<SimulationState> {
    config.validate()?;
    let f = match &config.initial_condition {
        InitialCondition::PaperTest => DistributionField::from_fn(grid, paper_test_profile),
        InitialCondition::UniformMaxwellian { rho, u, temp } => {
            DistributionField::from_fn(grid, |_, v| maxwellian(*rho, *u, *temp, v))
        }
        InitialCondition::Tabulated(values) => DistributionField::from_interior(grid.n_x(), grid.n_v(), values)?,
    };
    f.check_shape(grid)?;
    f.check_finite()?;
    let (macro_fields, e) = field_of(&f, grid, config)?;
    Ok(SimulationState {
        t: 0.0,
        step: 0,
        f,
        e,
        macro_fields,
    })
}

/// Stateful driver that reuses its work buffer across steps.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SolverConfig,
    grid: PhaseGrid,
    state: SimulationState,
    scratch: DistributionField,
    fixed_dt: Option<f64>,
    /// `(t, step)` the fixed-step clock counts from.
    origin: (f64, usize),
}

impl Simulation {
    pub fn new(config: SolverConfig) -> Result<Self> {
        let grid = config.grid()?;
        let state = initialize(&config, &grid)?;
        Self::from_state(config, grid, state)
    }

    pub fn from_state(config: SolverConfig, grid: PhaseGrid, state: SimulationState) -> Result<Self> {
        config.validate()?;
        state.f.check_shape(&grid)?;
        let fixed_dt = match config.dt_policy {
            DtPolicy::Adaptive => None,
            DtPolicy::Fixed => {
                let dt0 = cfl_dt(&grid, state.e.max_abs(), config.sigma)?;
                let remaining = config.t_final - state.t;
                if remaining > 0.0 {
                    Some(remaining / (remaining / dt0).ceil())
                } else {
                    Some(dt0)
                }
            }
        };
        Ok(Self {
            scratch: DistributionField::zeros(&grid),
            origin: (state.t, state.step),
            config,
            grid,
            state,
            fixed_dt,
        })
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn into_state(self) -> SimulationState {
        self.state
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn is_finished(&self) -> bool {
        self.state.t >= self.config.t_final
    }

    /// Step size the next call to [`Simulation::step`] will use. A remainder
    /// within `FINAL_STEP_SLACK` of a full step is taken whole, so rounding
    /// in the accumulated time never leaves a sliver step at the end.
    pub fn next_dt(&self) -> Result<f64> {
        let remaining = self.config.t_final - self.state.t;
        let dt = match self.fixed_dt {
            Some(dt) => dt,
            None => cfl_dt(&self.grid, self.state.e.max_abs(), self.config.sigma)?,
        };
        if remaining <= dt * (1.0 + FINAL_STEP_SLACK) {
            Ok(remaining)
        } else {
            Ok(dt)
        }
    }

    pub fn step(&mut self) -> Result<StepRecord> {
        let step = self.state.step;
        let t = self.state.t;
        self.step_inner().map_err(|source| Error::AtStep {
            step,
            t,
            source: Box::new(source),
        })
    }

    fn step_inner(&mut self) -> Result<StepRecord> {
        if self.is_finished() {
            return Err(Error::Config(format!("already at t_final = {}", self.config.t_final)));
        }
        let grid = self.grid;
        let remaining = self.config.t_final - self.state.t;
        let dt = self.next_dt()?;
        let e_inf = self.state.e.max_abs();

        transport_step_into(&self.state.f, &self.state.e, &grid, dt, &mut self.scratch)?;
        let (min_f, sum) = if self.config.collisionless {
            let min = self.scratch.min_interior();
            (min, self.scratch.interior().sum::<f64>())
        } else {
            let rows = imex_in_place(
                &mut self.scratch,
                &grid,
                self.config.eps,
                dt,
                self.config.moment_options(),
            )?;
            rows.iter()
                .fold((f64::INFINITY, 0.0), |(m, s), r| (m.min(r.min), s + r.sum))
        };
        self.scratch.check_finite()?;

        std::mem::swap(&mut self.state.f, &mut self.scratch);
        let (macro_fields, e) = field_of(&self.state.f, &grid, &self.config)?;
        self.state.macro_fields = macro_fields;
        self.state.e = e;
        self.state.step += 1;
        self.state.t = match self.fixed_dt {
            _ if dt >= remaining => self.config.t_final,
            // t = t0 + n dt, so a fixed run does not accumulate rounding
            Some(fixed) => self.origin.0 + (self.state.step - self.origin.1) as f64 * fixed,
            None => self.state.t + dt,
        };

        Ok(StepRecord {
            step: self.state.step,
            t: self.state.t,
            dt,
            courant: courant_number(&grid, e_inf, dt),
            e_inf,
            min_f,
            mass: sum * grid.dx() * grid.dv(),
        })
    }

    fn record(&self, log: &mut DiagnosticsLog) {
        let st = &self.state;
        log.records
            .push(DiagnosticsRecord::compute(st, &self.grid, &self.config.q_list));
        log.stability.push(stability_report(st, &self.config, &self.grid));
        log.snapshots.push(Snapshot {
            t: st.t,
            step: st.step,
            macro_fields: st.macro_fields.clone(),
            e: st.e.clone(),
            f: self.config.snapshot_f.then(|| st.f.clone()),
        });
    }

    /// Steps to `t_final`, recording diagnostics at the configured cadence
    /// and at both ends.
    pub fn run_to_end(&mut self) -> Result<DiagnosticsLog> {
        let mut log = DiagnosticsLog {
            dt_policy: self.config.dt_policy,
            ..Default::default()
        };
        self.record(&mut log);
        while !self.is_finished() {
            let rec = self.step()?;
            log.steps.push(rec);
            let every = self.config.diagnostics_every;
            let due = every > 0 && self.state.step.is_multiple_of(every);
            if due || self.is_finished() {
                self.record(&mut log);
            }
        }
        Ok(log)
    }
}

/// Single step from `state`; allocates. See [`Simulation`] for repeated use.
pub fn advance_step(
    state: &SimulationState,
    grid: &PhaseGrid,
    config: &SolverConfig,
) -> Result<(SimulationState, StepRecord)> {
    let mut sim = Simulation::from_state(config.clone(), *grid, state.clone())?;
    let rec = sim.step()?;
    Ok((sim.into_state(), rec))
}

pub fn run(config: &SolverConfig) -> Result<(SimulationState, DiagnosticsLog)> {
    let mut sim = Simulation::new(config.clone())?;
    let log = sim.run_to_end()?;
    Ok((sim.into_state(), log))
}

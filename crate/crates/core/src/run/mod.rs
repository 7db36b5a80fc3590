//! Run orchestration: configuration, flow presets, fixed and adaptive
//! drivers, and result artifacts.

mod config;
mod output;
mod setup;

pub use config::{CustomFlow, Mode, OutputSpec, Preset, RunConfig, Scheme, VesicleSpec};
pub use output::{
    convergence_table, least_squares_order, output_root, ConvergenceRow, ConvergenceTable,
    OUTPUT_ROOT_ENV,
};
pub use setup::{preset_scale, Setup};

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::adaptive::{step_errors, StepController, StepErrors};
use crate::dynamics::{BackgroundFlow, SuspensionState};
use crate::error::{Error, Result};
use crate::linalg::{Solver, SolverStats};
use crate::sdc::sdc_step;
use crate::stepper::{bdf2_bootstrap, global_errors, provisional_step, ImexScheme};
use output::Artifacts;

/// One attempted step, accepted or not. Field order is the CSV column
/// order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    pub step: usize,
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    /// Global relative area error after the step.
    pub area_error: f64,
    pub length_error: f64,
    pub step_area_change: f64,
    pub step_length_change: f64,
    pub gmres_iterations: usize,
    /// `max ‖r‖_∞` before each sweep, `;`-separated.
    pub sweep_residuals: String,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub status: String,
    pub final_time: f64,
    pub area_error: f64,
    pub length_error: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub wall_clock_seconds: f64,
    pub stats: SolverStats,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub rows: Vec<StepRow>,
    pub final_state: SuspensionState,
}

impl RunOutcome {
    pub fn accepted_rows(&self) -> impl Iterator<Item = &StepRow> {
        self.rows.iter().filter(|r| r.accepted)
    }
}

/// Runs `config`, writing artifacts under the resolved output directory.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let dir = output::run_dir(config);
    simulate(config, Some(&dir))
}

/// Runs `config`; artifacts are written to `out` when given. On a failed
/// run the artifacts written so far are kept and the summary records the
/// error.
pub fn simulate(config: &RunConfig, out: Option<&Path>) -> Result<RunOutcome> {
    let setup = Setup::build(config)?;
    let mut artifacts = match out {
        Some(dir) => Some(Artifacts::create(dir, config)?),
        None => None,
    };
    let start = Instant::now();
    let mut solver = Solver::new(config.solver);
    let mut driver = Driver {
        config,
        flow: &setup.flow,
        reference: setup.initial.areas_lengths()?,
        rows: Vec::new(),
        accepted: 0,
        artifacts: artifacts.as_mut(),
    };
    let result = driver.drive(setup.initial.clone(), &mut solver);
    let (rows, accepted) = (driver.rows, driver.accepted);
    let rejected = rows.len() - accepted;
    let last = rows.iter().rev().find(|r| r.accepted);
    let mut summary = RunSummary {
        name: config.name.clone(),
        status: "ok".into(),
        final_time: last.map_or(0.0, |r| r.t),
        area_error: last.map_or(0.0, |r| r.area_error),
        length_error: last.map_or(0.0, |r| r.length_error),
        accepted,
        rejected,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        stats: solver.stats.clone(),
    };
    match result {
        Ok(final_state) => {
            if let Some(a) = artifacts.as_mut() {
                a.snapshot(&final_state, true)?;
                a.summary(&summary)?;
            }
            Ok(RunOutcome {
                summary,
                rows,
                final_state,
            })
        }
        Err(e) => {
            summary.status = format!("failed: {e}");
            if let Some(a) = artifacts.as_mut() {
                a.summary(&summary)?;
            }
            Err(e)
        }
    }
}

struct Driver<'a> {
    config: &'a RunConfig,
    flow: &'a BackgroundFlow,
    reference: Vec<(f64, f64)>,
    rows: Vec<StepRow>,
    accepted: usize,
    artifacts: Option<&'a mut Artifacts>,
}

/// A completed step before the accept/reject decision.
struct Attempt {
    state: SuspensionState,
    residuals: Vec<f64>,
    iterations: usize,
}

impl Driver<'_> {
    fn drive(&mut self, initial: SuspensionState, solver: &mut Solver) -> Result<SuspensionState> {
        let state = initial;
        if let Some(a) = self.artifacts.as_deref_mut() {
            a.snapshot(&state, false)?;
        }
        match self.config.mode {
            crate::run::Mode::Fixed { steps } => self.fixed(state, steps, solver),
            crate::run::Mode::Adaptive {
                tolerance,
                initial_dt,
                budget,
            } => {
                let horizon = self.config.horizon;
                let mut ctrl =
                    StepController::new(tolerance, horizon, self.config.scheme.order(), budget)?;
                self.adaptive(
                    state,
                    initial_dt.unwrap_or(horizon / 100.0),
                    &mut ctrl,
                    solver,
                )
            }
        }
    }

    fn attempt(
        &self,
        state: &SuspensionState,
        prev: Option<&SuspensionState>,
        dt: f64,
        solver: &mut Solver,
    ) -> Result<Attempt> {
        let before = solver.stats.iterations;
        let (next, residuals) = match self.config.scheme {
            Scheme::Euler => (
                provisional_step(&[state], dt, &ImexScheme::euler(), self.flow, solver)?,
                vec![],
            ),
            Scheme::Bdf2 => match prev {
                Some(p) => (
                    provisional_step(&[state, p], dt, &ImexScheme::bdf2(), self.flow, solver)?,
                    vec![],
                ),
                None => (bdf2_bootstrap(state, dt, self.flow, solver)?, vec![]),
            },
            Scheme::Sdc { .. } => {
                let opts = self.config.scheme.sdc_options().unwrap();
                let (s, d) = sdc_step(state, dt, opts, self.flow, solver)?;
                (s, d.residuals)
            }
        };
        Ok(Attempt {
            state: next,
            residuals,
            iterations: solver.stats.iterations - before,
        })
    }

    fn record(
        &mut self,
        t: f64,
        dt: f64,
        attempt: Option<&Attempt>,
        errs: &StepErrors,
        global: (f64, f64),
        accepted: bool,
    ) -> Result<()> {
        let row = StepRow {
            step: self.rows.len(),
            t,
            dt,
            area_error: global.0,
            length_error: global.1,
            step_area_change: errs.max_area(),
            step_length_change: errs.max_length(),
            gmres_iterations: attempt.map_or(0, |a| a.iterations),
            sweep_residuals: attempt.map_or(String::new(), |a| {
                a.residuals
                    .iter()
                    .map(|r| format!("{r:.6e}"))
                    .collect::<Vec<_>>()
                    .join(";")
            }),
            accepted,
        };
        if let Some(a) = self.artifacts.as_deref_mut() {
            a.row(&row)?;
        }
        self.rows.push(row);
        if accepted {
            self.accepted += 1;
        }
        Ok(())
    }

    fn after_accept(&mut self, state: &SuspensionState) -> Result<()> {
        let every = self.config.output.snapshot_every;
        if let Some(a) = self.artifacts.as_deref_mut() {
            if every > 0 && self.accepted.is_multiple_of(every) {
                a.snapshot(state, false)?;
            }
        }
        Ok(())
    }

    fn fixed(
        &mut self,
        mut state: SuspensionState,
        steps: usize,
        solver: &mut Solver,
    ) -> Result<SuspensionState> {
        let dt = self.config.horizon / steps as f64;
        let mut prev: Option<SuspensionState> = None;
        for k in 0..steps {
            let mut a = self.attempt(&state, prev.as_ref(), dt, solver)?;
            a.state.time = if k + 1 == steps {
                self.config.horizon
            } else {
                (k + 1) as f64 * dt
            };
            let errs = step_errors(&self.reference, &state, &a.state)?;
            let global = global_errors(&self.reference, &a.state)?;
            self.record(a.state.time, dt, Some(&a), &errs, global, true)?;
            self.after_accept(&a.state)?;
            prev = Some(std::mem::replace(&mut state, a.state));
        }
        Ok(state)
    }

    fn adaptive(
        &mut self,
        mut state: SuspensionState,
        mut dt: f64,
        ctrl: &mut StepController,
        solver: &mut Solver,
    ) -> Result<SuspensionState> {
        let horizon = self.config.horizon;
        let min_dt = 1e-10 * horizon;
        let mut committed = (0.0, 0.0);
        let mut attempts = 0usize;
        while state.time < horizon {
            attempts += 1;
            if dt < min_dt || attempts > 100_000 {
                return Err(Error::UnrecoverableStep {
                    time: state.time,
                    reason: format!("step size collapsed to {dt:.3e}"),
                });
            }
            let t = state.time;
            // Clip the last step onto the horizon.
            let last = t + dt >= horizon * (1.0 - 1e-12);
            let h = if last { horizon - t } else { dt };
            let decision = match self.attempt(&state, None, h, solver) {
                Ok(mut a) => {
                    a.state.time = if last { horizon } else { t + h };
                    let errs = step_errors(&self.reference, &state, &a.state)?;
                    let d = ctrl.accept_and_propose(t, h, &errs, committed)?;
                    let global = global_errors(&self.reference, &a.state)?;
                    self.record(a.state.time, h, Some(&a), &errs, global, d.accepted)?;
                    if d.accepted {
                        committed = global;
                        state = a.state;
                        self.after_accept(&state)?;
                    }
                    d
                }
                Err(e) if e.is_step_rejection() => {
                    log::debug!("step at t = {t} with dt = {h} failed: {e}");
                    self.record(t + h, h, None, &StepErrors::default(), committed, false)?;
                    ctrl.reject_failed(h)
                }
                Err(e) => return Err(e),
            };
            // After an accepted clipped step the loop ends; otherwise the
            // proposal is relative to the step actually taken.
            dt = decision.next_dt;
        }
        Ok(state)
    }
}

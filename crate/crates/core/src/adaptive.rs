//! Accept/reject step-size control driven by the per-step change in
//! vesicle area and length.

use serde::{Deserialize, Serialize};

use crate::dynamics::SuspensionState;
use crate::error::{Error, Result};

/// How the global tolerance is distributed over the steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// Allowance `ε·Δt/T`.
    #[default]
    Plain,
    /// Allowance `(Δt/(T − t))·(ε − e(t))`, where `e(t)` is the error
    /// committed so far.
    Remaining,
}

/// Relative changes of one step, normalized by the initial values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepErrors {
    pub area: Vec<f64>,
    pub length: Vec<f64>,
}

impl StepErrors {
    pub fn max_area(&self) -> f64 {
        self.area.iter().fold(0.0, |m, &e| m.max(e))
    }

    pub fn max_length(&self) -> f64 {
        self.length.iter().fold(0.0, |m, &e| m.max(e))
    }
}

/// `|A_j(after) − A_j(before)| / A_j(0)` and the same for lengths.
/// `reference` holds `(A_j(0), L_j(0))`.
pub fn step_errors(
    reference: &[(f64, f64)],
    before: &SuspensionState,
    after: &SuspensionState,
) -> Result<StepErrors> {
    if before.len() != after.len() || reference.len() != before.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            got: after.len(),
        });
    }
    let b = before.areas_lengths()?;
    let a = after.areas_lengths()?;
    let mut out = StepErrors::default();
    for ((r, b), a) in reference.iter().zip(&b).zip(&a) {
        out.area.push((a.0 - b.0).abs() / r.0.abs());
        out.length.push((a.1 - b.1).abs() / r.1.abs());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub accepted: bool,
    pub next_dt: f64,
}

/// Step-size controller.
#[derive(Debug, Clone, PartialEq)]
pub struct StepController {
    pub tolerance: f64,
    pub horizon: f64,
    pub order: usize,
    pub budget: BudgetMode,
    pub beta_up: f64,
    pub beta_down: f64,
    pub alpha: f64,
    last_rejected: bool,
}

impl StepController {
    pub fn new(tolerance: f64, horizon: f64, order: usize, budget: BudgetMode) -> Result<Self> {
        if !(tolerance > 0.0) || !(horizon > 0.0) || order == 0 {
            return Err(Error::InvalidArgument(format!(
                "controller needs tolerance > 0, horizon > 0 and order ≥ 1 (got {tolerance}, {horizon}, {order})"
            )));
        }
        Ok(Self {
            tolerance,
            horizon,
            order,
            budget,
            beta_up: 1.5,
            beta_down: 0.6,
            alpha: 0.9f64.sqrt(),
            last_rejected: false,
        })
    }

    /// Effective order of an SDC step with `n_sdc` sweeps.
    pub fn sdc_order(n_sdc: usize) -> usize {
        (n_sdc + 1).min(2)
    }

    pub fn last_rejected(&self) -> bool {
        self.last_rejected
    }

    /// Allowed relative change over `[t, t + dt]` given the error `committed`
    /// so far.
    pub fn allowance(&self, t: f64, dt: f64, committed: f64) -> Result<f64> {
        let a = match self.budget {
            BudgetMode::Plain => self.tolerance * dt / self.horizon,
            BudgetMode::Remaining => {
                let left = self.horizon - t;
                let a = if left > 0.0 {
                    dt / left * (self.tolerance - committed)
                } else {
                    0.0
                };
                if !(a > 0.0) {
                    return Err(Error::UnrecoverableStep {
                        time: t,
                        reason: format!(
                            "error budget exhausted ({committed:.3e} of {:.3e} used)",
                            self.tolerance
                        ),
                    });
                }
                a
            }
        };
        Ok(a)
    }

    /// Decides on a step of size `dt` from `t` with per-step errors `errs`;
    /// `committed` holds the global area and length errors at `t`.
    pub fn accept_and_propose(
        &mut self,
        t: f64,
        dt: f64,
        errs: &StepErrors,
        committed: (f64, f64),
    ) -> Result<Decision> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let allow_area = self.allowance(t, dt, committed.0)?;
        let allow_length = self.allowance(t, dt, committed.1)?;
        let (ea, el) = (errs.max_area(), errs.max_length());
        let accepted = ea <= allow_area && el <= allow_length;
        let ratio = (allow_area / ea).min(allow_length / el);
        let mut next = self.alpha * dt * ratio.powf(1.0 / self.order as f64);
        if !next.is_finite() {
            next = self.beta_up * dt;
        }
        next = next.clamp(self.beta_down * dt, self.beta_up * dt);
        if self.last_rejected {
            next = next.min(dt);
        }
        self.last_rejected = !accepted;
        Ok(Decision {
            accepted,
            next_dt: next,
        })
    }

    /// Decision after a step that could not be completed (solver failure or
    /// collision): retry with the smallest allowed step.
    pub fn reject_failed(&mut self, dt: f64) -> Decision {
        self.last_rejected = true;
        Decision {
            accepted: false,
            next_dt: self.beta_down * dt,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errs(a: f64, l: f64) -> StepErrors {
        StepErrors {
            area: vec![a],
            length: vec![l],
        }
    }

    #[test]
    fn zero_error_grows_by_beta_up() {
        let mut c = StepController::new(1e-3, 1.0, 2, BudgetMode::Plain).unwrap();
        let d = c
            .accept_and_propose(0.0, 0.1, &errs(0.0, 0.0), (0.0, 0.0))
            .unwrap();
        assert!(d.accepted);
        assert!((d.next_dt - 0.15).abs() < 1e-15);
    }

    #[test]
    fn error_at_allowance_is_accepted() {
        let mut c = StepController::new(1e-3, 1.0, 2, BudgetMode::Plain).unwrap();
        let a = c.allowance(0.0, 0.1, 0.0).unwrap();
        let d = c
            .accept_and_propose(0.0, 0.1, &errs(a, 0.0), (0.0, 0.0))
            .unwrap();
        assert!(d.accepted);
        assert!((d.next_dt / 0.1 - 0.9f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn large_error_rejects_with_beta_down() {
        let mut c = StepController::new(1e-3, 1.0, 2, BudgetMode::Plain).unwrap();
        let a = c.allowance(0.0, 0.1, 0.0).unwrap();
        let d = c
            .accept_and_propose(0.0, 0.1, &errs(0.0, 10.0 * a), (0.0, 0.0))
            .unwrap();
        assert!(!d.accepted);
        assert!((d.next_dt - 0.06).abs() < 1e-15);
        assert!(c.last_rejected());
        // The step after a rejection is never increased.
        let d = c
            .accept_and_propose(0.0, 0.06, &errs(0.0, 0.0), (0.0, 0.0))
            .unwrap();
        assert!(d.accepted);
        assert!(d.next_dt <= 0.06);
        assert!(!c.last_rejected());
    }

    #[test]
    fn remaining_budget_exhausted_is_unrecoverable() {
        let mut c = StepController::new(1e-3, 1.0, 2, BudgetMode::Remaining).unwrap();
        let r = c.accept_and_propose(0.5, 0.1, &errs(0.0, 0.0), (1e-3, 0.0));
        assert!(matches!(r, Err(Error::UnrecoverableStep { .. })));
        let a = c.allowance(0.5, 0.1, 4e-4).unwrap();
        assert!((a - 0.1 / 0.5 * 6e-4).abs() < 1e-18);
    }

    #[test]
    fn sdc_order_is_capped() {
        assert_eq!(StepController::sdc_order(0), 1);
        assert_eq!(StepController::sdc_order(1), 2);
        assert_eq!(StepController::sdc_order(3), 2);
    }
}

//! Krylov solver, block preconditioner, and the solver context that counts
//! work across a run.

pub mod gmres;
pub mod precond;

pub use gmres::{gmres, GmresOutcome};
pub use precond::{vesicle_block, BlockPreconditioner};

use serde::{Deserialize, Serialize};

use crate::dynamics::FrozenConfig;
use crate::error::Result;
use crate::potentials::NearParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub gmres_tol: f64,
    pub max_iter: usize,
    /// Disable to run plain GMRES (used for iteration-count comparisons).
    pub precondition: bool,
    pub near: NearParams,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gmres_tol: 1e-10,
            max_iter: 200,
            precondition: true,
            near: NearParams::default(),
        }
    }
}

/// Work counters. `matvecs` counts full applications of the layer-potential
/// operators, the direct-summation stand-in for FMM calls.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub matvecs: usize,
    /// Block-preconditioner factorizations.
    pub factorizations: usize,
    /// Factorizations of the tension-only operator in consistent tension
    /// solves.
    pub tension_factorizations: usize,
    pub solves: usize,
    pub iterations: usize,
    pub max_iterations: usize,
    pub last_iterations: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Solver {
    pub settings: SolverSettings,
    pub stats: SolverStats,
}

impl Solver {
    pub fn new(settings: SolverSettings) -> Self {
        Self {
            settings,
            stats: SolverStats::default(),
        }
    }

    /// Builds a preconditioner (or none when disabled) and counts the
    /// factorization.
    pub fn precondition(
        &mut self,
        frozen: &FrozenConfig,
        c: f64,
    ) -> Result<Option<BlockPreconditioner>> {
        if !self.settings.precondition {
            return Ok(None);
        }
        let p = BlockPreconditioner::new(frozen, c)?;
        self.stats.factorizations += 1;
        Ok(Some(p))
    }

    /// Solves the implicit system `frozen.apply(·, c) = rhs`.
    pub fn solve(
        &mut self,
        frozen: &FrozenConfig,
        c: f64,
        precond: Option<&BlockPreconditioner>,
        rhs: &[f64],
    ) -> Result<GmresOutcome> {
        let mut matvecs = 0;
        let result = gmres(
            |u| {
                matvecs += 1;
                frozen.apply(u, c)
            },
            |r| match precond {
                Some(p) => p.apply(r),
                None => Ok(r.to_vec()),
            },
            rhs,
            self.settings.gmres_tol,
            self.settings.max_iter,
        );
        self.stats.matvecs += matvecs;
        self.stats.solves += 1;
        let its = match &result {
            Ok(o) => o.iterations,
            Err(crate::Error::GmresNotConverged { iterations, .. }) => *iterations,
            Err(_) => 0,
        };
        self.stats.iterations += its;
        self.stats.last_iterations = its;
        self.stats.max_iterations = self.stats.max_iterations.max(its);
        if let Ok(o) = &result {
            log::debug!(
                "gmres: {} iterations, residual {:.3e}",
                o.iterations,
                o.residual
            );
        }
        result
    }

    /// Counts one explicit velocity evaluation.
    pub fn count_velocity(&mut self) {
        self.stats.matvecs += 1;
    }
}

//! Spectral deferred correction over Gauss-Lobatto substeps.
//!
//! A step computes a first-order provisional trajectory at the Lobatto nodes,
//! then repeatedly evaluates the Picard residual
//! `rⁿ = x̃⁰ − x̃ⁿ + ∫₀^{tₙ} v(x̃) dτ` and solves the linearized error equation
//! node by node. Only positions carry a residual; tension and wall density
//! are corrected through the constraint rows of each error solve.

pub mod lobatto;

pub use lobatto::{gauss_legendre, lobatto_nodes, LobattoGrid};

use serde::{Deserialize, Serialize};

use crate::curve::VesicleCurve;
use crate::dynamics::{surface_div, BackgroundFlow, FrozenConfig, SuspensionState};
use crate::error::{Error, Result};
use crate::linalg::{BlockPreconditioner, Solver};
use crate::stepper::{consistent_tension, implicit_solve, provisional_rhs, state_from_parts};

/// Discretization of the error equation inside a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariant {
    /// `eⁿ⁺¹ = eⁿ + rⁿ⁺¹ − rⁿ`; tension and wall density are left alone.
    Explicit,
    /// Implicit in the error with operators frozen at `x̃ⁿ`.
    FrozenPrevious,
    /// Implicit in the error with operators frozen at `x̃ⁿ⁺¹`.
    #[default]
    FrozenNext,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SdcDiagnostics {
    /// `max ‖r‖_∞` before each sweep.
    pub residuals: Vec<f64>,
    /// `max ‖e‖_∞` of each sweep.
    pub corrections: Vec<f64>,
    pub iterations: usize,
}

type Field = Vec<Vec<f64>>;

/// Provisional trajectory and cached quantities of one SDC step.
#[derive(Debug)]
pub struct SdcWorkspace {
    pub grid: LobattoGrid,
    pub states: Vec<SuspensionState>,
    flow: BackgroundFlow,
    frozen: Vec<Option<FrozenConfig>>,
    velocities: Vec<Option<Field>>,
    residual: Option<Vec<Field>>,
    precond: Option<BlockPreconditioner>,
    /// Recompute tension and wall density from the node positions before
    /// evaluating a node velocity. Off, the carried tension is only
    /// first-order consistent and the explicit velocity picks up stiff
    /// extensional components that the constrained error solve cannot damp.
    pub consistent_nodes: bool,
}

fn stacked(state: &SuspensionState) -> Field {
    state.vesicles.iter().map(VesicleCurve::stacked).collect()
}

fn max_abs(f: &[Vec<f64>]) -> f64 {
    f.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

impl SdcWorkspace {
    /// First-order provisional solution: `p − 1` implicit Euler substeps, each
    /// with operators frozen at the previous node. The preconditioner is
    /// factorized once at node 0 and reused for every later solve.
    pub fn provisional(
        initial: &SuspensionState,
        dt: f64,
        p: usize,
        flow: &BackgroundFlow,
        solver: &mut Solver,
    ) -> Result<Self> {
        let grid = LobattoGrid::new(p, dt)?;
        let mut ws = Self {
            grid,
            states: vec![initial.clone()],
            flow: flow.clone(),
            frozen: (0..p).map(|_| None).collect(),
            velocities: vec![None; p],
            residual: None,
            precond: None,
            consistent_nodes: true,
        };
        let h = ws.grid.substeps();
        ws.frozen_at(0, solver)?;
        ws.precond = solver.precondition(ws.frozen[0].as_ref().unwrap(), h[0])?;
        for n in 0..p - 1 {
            ws.frozen_at(n, solver)?;
            let frozen = ws.frozen[n].as_ref().unwrap();
            let rhs = provisional_rhs(frozen, &stacked(&ws.states[n]), 1.0, h[n]);
            let parts = implicit_solve(frozen, h[n], &rhs, ws.precond.as_ref(), solver)?;
            let time = initial.time + ws.grid.nodes[n + 1];
            let next = state_from_parts(&parts.positions, parts.tensions, parts.wall, time, flow)?;
            ws.states.push(next);
        }
        Ok(ws)
    }

    pub fn p(&self) -> usize {
        self.grid.p()
    }

    /// The preconditioner shared by all solves of this step.
    pub fn preconditioner(&self) -> Option<&BlockPreconditioner> {
        self.precond.as_ref()
    }

    pub fn final_state(&self) -> &SuspensionState {
        self.states.last().unwrap()
    }

    fn frozen_at(&mut self, n: usize, solver: &Solver) -> Result<()> {
        if self.frozen[n].is_none() {
            self.frozen[n] = Some(FrozenConfig::new(
                &self.states[n].vesicles,
                &self.flow,
                solver.settings.near,
            )?);
        }
        Ok(())
    }

    /// Velocity `v∞ + U` at node `n` with operators frozen at node `n`.
    pub fn velocity(&mut self, n: usize, solver: &mut Solver) -> Result<&Field> {
        if self.velocities[n].is_none() {
            if n > 0 && self.consistent_nodes {
                let c = consistent_tension(&self.states[n], &self.flow, solver)?;
                self.states[n].tensions = c.tensions;
                self.states[n].wall_density = c.wall_density;
            }
            self.frozen_at(n, solver)?;
            let v = self.frozen[n].as_ref().unwrap().velocity(&self.states[n])?;
            solver.count_velocity();
            self.velocities[n] = Some(v);
        }
        Ok(self.velocities[n].as_ref().unwrap())
    }

    /// Picard residual at every node; `r⁰ = 0`.
    pub fn picard_residual(&mut self, solver: &mut Solver) -> Result<&[Field]> {
        if self.residual.is_none() {
            let p = self.p();
            for n in 0..p {
                self.velocity(n, solver)?;
            }
            let x0 = stacked(&self.states[0]);
            let mut table = Vec::with_capacity(p);
            for n in 0..p {
                let xn = stacked(&self.states[n]);
                let mut r: Field = x0
                    .iter()
                    .zip(&xn)
                    .map(|(a, b)| a.iter().zip(b).map(|(a, b)| a - b).collect())
                    .collect();
                for (i, w) in self.grid.cumulative[n].iter().enumerate() {
                    let v = self.velocities[i].as_ref().unwrap();
                    for (rj, vj) in r.iter_mut().zip(v) {
                        rj.iter_mut().zip(vj).for_each(|(a, b)| *a += w * b);
                    }
                }
                table.push(r);
            }
            self.residual = Some(table);
        }
        Ok(self.residual.as_ref().unwrap())
    }

    /// `max_n ‖rⁿ‖_∞`.
    pub fn residual_norm(&mut self, solver: &mut Solver) -> Result<f64> {
        Ok(self
            .picard_residual(solver)?
            .iter()
            .map(|r| max_abs(r))
            .fold(0.0, f64::max))
    }

    /// `max_n ‖Div(x̃ⁿ) v(x̃ⁿ)‖_∞` over nodes after the first.
    pub fn inextensibility_defect(&mut self, solver: &mut Solver) -> Result<f64> {
        let mut worst = 0.0f64;
        for n in 1..self.p() {
            self.velocity(n, solver)?;
            let frozen = self.frozen[n].as_ref().unwrap();
            for (g, v) in frozen
                .geoms
                .iter()
                .zip(self.velocities[n].as_ref().unwrap())
            {
                worst = surface_div(g, v).iter().fold(worst, |m, d| m.max(d.abs()));
            }
        }
        Ok(worst)
    }

    fn invalidate(&mut self) {
        for n in 1..self.p() {
            self.frozen[n] = None;
            self.velocities[n] = None;
        }
        self.residual = None;
    }

    /// One correction sweep; returns `max ‖e‖_∞`.
    pub fn sweep(&mut self, variant: SweepVariant, solver: &mut Solver) -> Result<f64> {
        let p = self.p();
        self.picard_residual(solver)?;
        for n in 0..p {
            self.velocity(n, solver)?;
        }
        let h = self.grid.substeps();
        let r = self.residual.take().unwrap();
        let m = self.states[0].len();
        let mut e: Field = r[0].iter().map(|x| vec![0.0; x.len()]).collect();
        let mut corrections: Vec<(Field, Option<Field>, Option<Vec<f64>>)> =
            Vec::with_capacity(p - 1);
        for n in 0..p - 1 {
            let x_rhs: Field = (0..m)
                .map(|j| {
                    e[j].iter()
                        .zip(&r[n + 1][j])
                        .zip(&r[n][j])
                        .map(|((e, a), b)| e + a - b)
                        .collect()
                })
                .collect();
            let next = match variant {
                SweepVariant::Explicit => (x_rhs, None, None),
                SweepVariant::FrozenPrevious | SweepVariant::FrozenNext => {
                    let k = if variant == SweepVariant::FrozenNext {
                        n + 1
                    } else {
                        n
                    };
                    let frozen = self.frozen[k].as_ref().unwrap();
                    let v_next = self.velocities[n + 1].as_ref().unwrap();
                    let mut rhs = Vec::with_capacity(frozen.dim());
                    for j in 0..m {
                        rhs.extend_from_slice(&x_rhs[j]);
                        rhs.extend(
                            surface_div(&frozen.geoms[j], &v_next[j])
                                .into_iter()
                                .map(|d| -d),
                        );
                    }
                    if let Some(defect) = frozen.wall_defect(&self.states[n + 1])? {
                        rhs.extend(defect.into_iter().map(|d| -d));
                    }
                    let parts = implicit_solve(frozen, h[n], &rhs, self.precond.as_ref(), solver)?;
                    (parts.positions, Some(parts.tensions), parts.wall)
                }
            };
            e = next.0.clone();
            corrections.push(next);
        }
        let mut largest = 0.0f64;
        for (n, (ex, es, ew)) in corrections.into_iter().enumerate() {
            largest = largest.max(max_abs(&ex));
            let s = &self.states[n + 1];
            let positions: Field = stacked(s)
                .into_iter()
                .zip(&ex)
                .map(|(x, e)| x.iter().zip(e).map(|(a, b)| a + b).collect())
                .collect();
            let tensions = match es {
                Some(ds) => s
                    .tensions
                    .iter()
                    .zip(&ds)
                    .map(|(a, b)| a.iter().zip(b).map(|(a, b)| a + b).collect())
                    .collect(),
                None => s.tensions.clone(),
            };
            let wall = match (&s.wall_density, ew) {
                (Some(a), Some(b)) => Some(a.iter().zip(&b).map(|(a, b)| a + b).collect()),
                (a, _) => a.clone(),
            };
            self.states[n + 1] = state_from_parts(&positions, tensions, wall, s.time, &self.flow)?;
        }
        self.invalidate();
        Ok(largest)
    }
}

/// Options of an SDC step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdcOptions {
    /// Number of Lobatto nodes.
    pub p: usize,
    /// Number of correction sweeps.
    pub n_sdc: usize,
    pub variant: SweepVariant,
    /// Replace the incoming tension and wall density by values consistent
    /// with the incoming positions before the provisional sweep.
    pub consistent_start: bool,
    /// See [`SdcWorkspace::consistent_nodes`].
    pub consistent_nodes: bool,
}

impl Default for SdcOptions {
    fn default() -> Self {
        Self {
            p: 4,
            n_sdc: 1,
            variant: SweepVariant::FrozenNext,
            consistent_start: true,
            consistent_nodes: true,
        }
    }
}

/// One SDC step of length `dt` from `initial`.
pub fn sdc_step(
    initial: &SuspensionState,
    dt: f64,
    options: SdcOptions,
    flow: &BackgroundFlow,
    solver: &mut Solver,
) -> Result<(SuspensionState, SdcDiagnostics)> {
    if options.p < 2 {
        return Err(Error::InvalidArgument(format!(
            "SDC needs p >= 2, got {}",
            options.p
        )));
    }
    let start = solver.stats.iterations;
    let consistent;
    let initial = if options.consistent_start {
        consistent = consistent_tension(initial, flow, solver)?;
        &consistent
    } else {
        initial
    };
    let mut ws = SdcWorkspace::provisional(initial, dt, options.p, flow, solver)?;
    ws.consistent_nodes = options.consistent_nodes;
    let mut diag = SdcDiagnostics::default();
    for _ in 0..options.n_sdc {
        diag.residuals.push(ws.residual_norm(solver)?);
        diag.corrections.push(ws.sweep(options.variant, solver)?);
    }
    diag.iterations = solver.stats.iterations - start;
    let mut out = ws.states.pop().unwrap();
    out.time = initial.time + dt;
    Ok((out, diag))
}

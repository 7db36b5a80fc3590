//! First-order IMEX and BDF2 provisional integrators.
//!
//! Every step solves the linear system of [`FrozenConfig::apply`]: the
//! operators are frozen at an extrapolated configuration `xᵉ` and positions,
//! tensions and wall density at the new time are the unknowns.

use nalgebra::{DMatrix, DVector};

use crate::curve::VesicleCurve;
use crate::dynamics::operators::operator_matrices;
use crate::dynamics::{surface_div, BackgroundFlow, FrozenConfig, SuspensionState};
use crate::error::{Error, Result};
use crate::linalg::{BlockPreconditioner, Solver};

/// Coefficients of a one- or two-level IMEX scheme; weights act on
/// `[xⁿ, xⁿ⁻¹]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImexScheme {
    pub beta: f64,
    pub x0: Vec<f64>,
    pub xe: Vec<f64>,
}

impl ImexScheme {
    pub fn euler() -> Self {
        Self {
            beta: 1.0,
            x0: vec![1.0],
            xe: vec![1.0],
        }
    }

    pub fn bdf2() -> Self {
        Self {
            beta: 1.5,
            x0: vec![2.0, -0.5],
            xe: vec![2.0, -1.0],
        }
    }

    /// Number of previous states the scheme consumes.
    pub fn levels(&self) -> usize {
        self.x0.len()
    }
}

/// Right-hand side of the implicit system for `β x − x⁰ = Δt (v∞(xᵉ) + U)`,
/// divided through by `β`.
pub(crate) fn provisional_rhs(
    frozen: &FrozenConfig,
    x0: &[Vec<f64>],
    beta: f64,
    c: f64,
) -> Vec<f64> {
    let mut rhs = Vec::with_capacity(frozen.dim());
    for (j, x) in x0.iter().enumerate() {
        let vinf = frozen.far_field(j);
        rhs.extend(x.iter().zip(vinf).map(|(x, v)| x / beta + c * v));
        rhs.extend(surface_div(&frozen.geoms[j], vinf).into_iter().map(|d| -d));
    }
    if let Some(w) = frozen.wall_solver() {
        rhs.extend(w.boundary_data());
    }
    rhs
}

/// Assembles a state from stacked positions, checking that it is admissible.
pub(crate) fn state_from_parts(
    positions: &[Vec<f64>],
    tensions: Vec<Vec<f64>>,
    wall: Option<Vec<f64>>,
    time: f64,
    flow: &BackgroundFlow,
) -> Result<SuspensionState> {
    let vesicles = positions
        .iter()
        .map(|x| VesicleCurve::from_stacked(x))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Overlap(e.to_string()))?;
    let state = SuspensionState {
        vesicles,
        tensions,
        wall_density: wall,
        time,
    };
    state.check_admissible(flow.wall().map(|w| w.geometry()))?;
    Ok(state)
}

/// Solves one implicit system with operators `frozen`, step factor `c` and
/// the given right-hand side.
pub(crate) fn implicit_solve(
    frozen: &FrozenConfig,
    c: f64,
    rhs: &[f64],
    precond: Option<&BlockPreconditioner>,
    solver: &mut Solver,
) -> Result<crate::dynamics::Parts> {
    let out = solver.solve(frozen, c, precond, rhs)?;
    Ok(frozen.split(&out.solution))
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    Ok(())
}

/// One semi-implicit step. `history` lists previous states newest first and
/// must hold at least `scheme.levels()` equally spaced states.
pub fn provisional_step(
    history: &[&SuspensionState],
    dt: f64,
    scheme: &ImexScheme,
    flow: &BackgroundFlow,
    solver: &mut Solver,
) -> Result<SuspensionState> {
    check_dt(dt)?;
    let levels = scheme.levels();
    if history.len() < levels {
        return Err(Error::InvalidArgument(format!(
            "scheme needs {levels} previous states, got {}",
            history.len()
        )));
    }
    let history = &history[..levels];
    let xe = SuspensionState::combine(history, &scheme.xe)?;
    let x0 = SuspensionState::combine(history, &scheme.x0)?;
    let frozen = FrozenConfig::new(&xe.vesicles, flow, solver.settings.near)?;
    let c = dt / scheme.beta;
    let precond = solver.precondition(&frozen, c)?;
    let positions: Vec<Vec<f64>> = x0.vesicles.iter().map(VesicleCurve::stacked).collect();
    let rhs = provisional_rhs(&frozen, &positions, scheme.beta, c);
    let parts = implicit_solve(&frozen, c, &rhs, precond.as_ref(), solver)?;
    state_from_parts(
        &parts.positions,
        parts.tensions,
        parts.wall,
        history[0].time + dt,
        flow,
    )
}

/// Tension and wall density consistent with the current positions: solves
/// the inextensibility and wall rows with `x` held fixed.
pub fn consistent_tension(
    state: &SuspensionState,
    flow: &BackgroundFlow,
    solver: &mut Solver,
) -> Result<SuspensionState> {
    let frozen = FrozenConfig::new(&state.vesicles, flow, solver.settings.near)?;
    let positions: Vec<Vec<f64>> = state.vesicles.iter().map(VesicleCurve::stacked).collect();
    let zeros_x: Vec<Vec<f64>> = positions.iter().map(|x| vec![0.0; x.len()]).collect();
    let zeros_s: Vec<Vec<f64>> = state.tensions.iter().map(|s| vec![0.0; s.len()]).collect();
    let m = state.len();
    let ns: Vec<usize> = state.vesicles.iter().map(VesicleCurve::n).collect();
    let wall_dim = frozen.wall_dim();

    let pack = |vel: &[Vec<f64>], rows: Option<Vec<f64>>| {
        let mut out = Vec::new();
        for j in 0..m {
            out.extend(surface_div(&frozen.geoms[j], &vel[j]));
        }
        if let Some(r) = rows {
            out.extend(r);
        }
        out
    };
    let split = |u: &[f64]| {
        let mut s = Vec::with_capacity(m);
        let mut o = 0;
        for &n in &ns {
            s.push(u[o..o + n].to_vec());
            o += n;
        }
        let w = (wall_dim > 0).then(|| u[o..].to_vec());
        (s, w)
    };

    let (mut vel, rows) = frozen.induced(&positions, &zeros_s, None);
    for (j, v) in vel.iter_mut().enumerate() {
        v.iter_mut()
            .zip(frozen.far_field(j))
            .for_each(|(a, b)| *a += b);
    }
    let rows = rows.map(|mut r| {
        r.iter_mut()
            .zip(frozen.wall_solver().unwrap().boundary_data())
            .for_each(|(a, b)| *a -= b);
        r
    });
    let rhs: Vec<f64> = pack(&vel, rows).into_iter().map(|v| -v).collect();

    // Dense per-vesicle Div S T blocks as preconditioner.
    let blocks: Vec<Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>> = (0..m)
        .map(|j| {
            let (_, t, div) = operator_matrices(&frozen.geoms[j]);
            let a: DMatrix<f64> = &div * (&frozen.self_sl[j] * &t);
            let lu = a.lu();
            lu.is_invertible().then_some(lu)
        })
        .collect();
    solver.stats.tension_factorizations += 1;
    let wall = frozen.wall_solver().cloned();
    let precond = |r: &[f64]| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(r.len());
        let mut o = 0;
        for (j, &n) in ns.iter().enumerate() {
            let seg = &r[o..o + n];
            match blocks[j]
                .as_ref()
                .and_then(|lu| lu.solve(&DVector::from_column_slice(seg)))
            {
                Some(z) => out.extend_from_slice(z.as_slice()),
                None => out.extend_from_slice(seg),
            }
            o += n;
        }
        if let Some(w) = &wall {
            out.extend(w.solve_density(&r[o..])?);
        }
        Ok(out)
    };
    let mut matvecs = 0;
    let out = crate::linalg::gmres(
        |u| {
            matvecs += 1;
            let (s, w) = split(u);
            let (vel, rows) = frozen.induced(&zeros_x, &s, w.as_deref());
            pack(&vel, rows)
        },
        precond,
        &rhs,
        solver.settings.gmres_tol,
        solver.settings.max_iter,
    )?;
    solver.stats.matvecs += matvecs;
    let (tensions, wall_density) = split(&out.solution);
    Ok(SuspensionState {
        vesicles: state.vesicles.clone(),
        tensions,
        wall_density,
        time: state.time,
    })
}

/// Per-step conservation record of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub time: f64,
    pub dt: f64,
    /// `max_j |A_j(t) − A_j(0)| / A_j(0)`
    pub area_error: f64,
    pub length_error: f64,
    pub iterations: usize,
}

/// Final state and per-step history of a fixed-step run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: SuspensionState,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn area_error(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.area_error)
    }

    pub fn length_error(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.length_error)
    }
}

/// Relative area and length errors of `state` against reference values.
pub fn global_errors(reference: &[(f64, f64)], state: &SuspensionState) -> Result<(f64, f64)> {
    let now = state.areas_lengths()?;
    Ok(reference
        .iter()
        .zip(&now)
        .fold((0.0f64, 0.0f64), |(ea, el), (r, c)| {
            (
                ea.max((c.0 - r.0).abs() / r.0),
                el.max((c.1 - r.1).abs() / r.1),
            )
        }))
}

/// Euler substeps used to produce the second starting value of BDF2. A
/// single Euler step leaves an error that dominates the whole run.
pub const BDF2_BOOTSTRAP_SUBSTEPS: usize = 16;

/// Second starting value of BDF2: the state at `t + dt` from
/// [`BDF2_BOOTSTRAP_SUBSTEPS`] Euler substeps.
pub fn bdf2_bootstrap(
    current: &SuspensionState,
    dt: f64,
    flow: &BackgroundFlow,
    solver: &mut Solver,
) -> Result<SuspensionState> {
    check_dt(dt)?;
    let h = dt / BDF2_BOOTSTRAP_SUBSTEPS as f64;
    let mut s = current.clone();
    for _ in 0..BDF2_BOOTSTRAP_SUBSTEPS {
        s = provisional_step(&[&s], h, &ImexScheme::euler(), flow, solver)?;
    }
    s.time = current.time + dt;
    Ok(s)
}

/// Fixed-step run of `steps` steps. BDF2 is bootstrapped with
/// [`BDF2_BOOTSTRAP_SUBSTEPS`] Euler substeps over the first step.
pub fn imex_run(
    initial: &SuspensionState,
    dt: f64,
    steps: usize,
    scheme: &ImexScheme,
    flow: &BackgroundFlow,
    solver: &mut Solver,
) -> Result<Trajectory> {
    check_dt(dt)?;
    let reference = initial.areas_lengths()?;
    let euler = ImexScheme::euler();
    let mut prev: Option<SuspensionState> = None;
    let mut current = initial.clone();
    let mut records = Vec::with_capacity(steps);
    for _ in 0..steps {
        let next = match (&prev, scheme.levels()) {
            (Some(p), 2) => provisional_step(&[&current, p], dt, scheme, flow, solver)?,
            (None, 2) => bdf2_bootstrap(&current, dt, flow, solver)?,
            _ => provisional_step(&[&current], dt, &euler, flow, solver)?,
        };
        let (area_error, length_error) = global_errors(&reference, &next)?;
        records.push(StepRecord {
            time: next.time,
            dt,
            area_error,
            length_error,
            iterations: solver.stats.last_iterations,
        });
        prev = Some(std::mem::replace(&mut current, next));
    }
    Ok(Trajectory {
        final_state: current,
        records,
    })
}

/// Fixed-step BDF2 over `[0, horizon]`; `horizon/dt` must be an integer.
pub fn bdf2_run(
    initial: &SuspensionState,
    dt: f64,
    horizon: f64,
    flow: &BackgroundFlow,
    solver: &mut Solver,
) -> Result<Trajectory> {
    check_dt(dt)?;
    let steps = (horizon / dt).round();
    if steps < 1.0 || ((steps * dt - horizon).abs() > 1e-9 * horizon.abs().max(1.0)) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} is not an integer multiple of dt {dt}"
        )));
    }
    imex_run(
        initial,
        dt,
        steps as usize,
        &ImexScheme::bdf2(),
        flow,
        solver,
    )
}

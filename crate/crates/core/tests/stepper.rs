use vesicle_core::dynamics::{BackgroundFlow, SuspensionState};
use vesicle_core::linalg::{Solver, SolverSettings};
use vesicle_core::stepper::{
    bdf2_bootstrap, bdf2_run, imex_run, provisional_step, ImexScheme, BDF2_BOOTSTRAP_SUBSTEPS,
};
use vesicle_core::{Error, VesicleCurve};

fn ellipse_state() -> SuspensionState {
    SuspensionState::new(vec![
        VesicleCurve::ellipse(32, 1.6, 0.6, [0.0, 0.0], 0.0).unwrap()
    ])
}

fn area_error(dt: f64, steps: usize, scheme: &ImexScheme) -> f64 {
    let mut solver = Solver::new(SolverSettings::default());
    imex_run(
        &ellipse_state(),
        dt,
        steps,
        scheme,
        &BackgroundFlow::None,
        &mut solver,
    )
    .unwrap()
    .area_error()
}

#[test]
fn euler_is_first_order() {
    let e1 = area_error(0.01, 10, &ImexScheme::euler());
    let e2 = area_error(0.005, 20, &ImexScheme::euler());
    let rate = (e1 / e2).log2();
    assert!((rate - 1.0).abs() < 0.2, "{e1:e} {e2:e} {rate}");
}

#[test]
fn bdf2_is_second_order() {
    let e1 = area_error(0.005, 20, &ImexScheme::bdf2());
    let e2 = area_error(0.0025, 40, &ImexScheme::bdf2());
    let rate = (e1 / e2).log2();
    assert!(rate > 1.7, "{e1:e} {e2:e} {rate}");
}

#[test]
fn bdf2_needs_two_levels() {
    let s = ellipse_state();
    let mut solver = Solver::new(SolverSettings::default());
    let r = provisional_step(
        &[&s],
        0.01,
        &ImexScheme::bdf2(),
        &BackgroundFlow::None,
        &mut solver,
    );
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}

#[test]
fn bootstrap_lands_on_one_step() {
    let s = ellipse_state();
    let mut solver = Solver::new(SolverSettings::default());
    let b = bdf2_bootstrap(&s, 0.01, &BackgroundFlow::None, &mut solver).unwrap();
    assert_eq!(b.time, 0.01);
    assert_eq!(solver.stats.factorizations, BDF2_BOOTSTRAP_SUBSTEPS);
}

#[test]
fn bdf2_run_checks_horizon_multiple() {
    let s = ellipse_state();
    let mut solver = Solver::new(SolverSettings::default());
    assert!(bdf2_run(&s, 0.03, 0.1, &BackgroundFlow::None, &mut solver).is_err());
    let t = bdf2_run(&s, 0.025, 0.1, &BackgroundFlow::None, &mut solver).unwrap();
    assert_eq!(t.records.len(), 4);
    assert!((t.final_state.time - 0.1).abs() < 1e-15);
}

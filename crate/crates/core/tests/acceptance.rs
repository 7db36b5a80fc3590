//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured values. Exits non-zero if any criterion fails.
//!
//! Runs without the libtest harness so the report is always printed.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use vesicle_core::adaptive::BudgetMode;
use vesicle_core::dynamics::{BackgroundFlow, SuspensionState};
use vesicle_core::linalg::{Solver, SolverSettings};
use vesicle_core::potentials::{
    cross_single_layer, wall_double_layer, AlpertRule, NearParams, WallGeometry, WallSolver,
};
use vesicle_core::run::{least_squares_order, simulate, Mode, RunConfig, RunOutcome, Scheme};
use vesicle_core::sdc::{sdc_step, LobattoGrid, SdcOptions, SdcWorkspace, SweepVariant};
use vesicle_core::stepper::{bdf2_bootstrap, consistent_tension, provisional_step, ImexScheme};
use vesicle_core::VesicleCurve;

const GMRES_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn configs_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Alpert rule on a Poisson kernel times `log|2 sin(s/2)|`, whose integral
/// is `2π log(1 − ρ)`.
fn quadrature_order() -> Outcome {
    let rho: f64 = 0.6;
    let g = |s: f64| (1.0 - rho * rho) / (1.0 - 2.0 * rho * s.cos() + rho * rho);
    let exact = 2.0 * PI * (1.0 - rho).ln();
    let rule = AlpertRule::default();
    let ns = [32.0, 64.0, 128.0, 256.0];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            (rule.integrate(n as usize, 0.0, |s| {
                g(s) * (2.0 * (0.5 * s).sin()).abs().ln()
            }) - exact)
                .abs()
        })
        .collect();
    let slope = -least_squares_order(&ns, &errs);
    outcome(
        slope >= 7.0,
        format!(
            "slope {slope:.2} (errors {:.1e} .. {:.1e})",
            errs[0], errs[3]
        ),
    )
}

fn lobatto_exactness() -> Outcome {
    let g = LobattoGrid::new(4, 1.0).unwrap();
    let q: f64 = g
        .nodes
        .iter()
        .zip(&g.weights)
        .map(|(t, w)| w * t.powi(5))
        .sum();
    let err = (q - 1.0 / 6.0).abs();
    outcome(err <= 1e-13, format!("|∫t⁵ − 1/6| = {err:.1e}"))
}

fn layer_identities() -> Outcome {
    let n = 64;
    let p = NearParams::default();
    let circle = VesicleCurve::ellipse(n, 1.0, 1.0, [0.0, 0.0], 0.0).unwrap();
    let mut sl_err = 0.0f64;
    for e in [[1.0, 0.0], [0.0, 1.0], [0.6, -0.8]] {
        let f: Vec<f64> = (0..2 * n)
            .map(|i| if i < n { e[0] } else { e[1] })
            .collect();
        let u = cross_single_layer(&circle, &f, &[[0.0, 0.0]], p).unwrap()[0];
        sl_err = sl_err
            .max((u[0] - e[0] / 4.0).abs())
            .max((u[1] - e[1] / 4.0).abs());
    }
    // double layer of a non-circular wall with constant density e
    let c = VesicleCurve::ellipse(n, 1.3, 0.8, [0.1, -0.2], 0.3).unwrap();
    let wall = WallGeometry::new(c.clone(), vec![]).unwrap();
    let mut dl_err = 0.0f64;
    for e in [[1.0, 0.0], [0.3, 0.7]] {
        let eta: Vec<f64> = (0..2 * n)
            .map(|i| if i < n { e[0] } else { e[1] })
            .collect();
        let v = wall_double_layer(&wall, &eta, &[[0.2, -0.1], c.point(5), [4.0, 3.0]], p).unwrap();
        for (vi, k) in v.iter().zip([-1.0, -0.5, 0.0]) {
            dl_err = dl_err
                .max((vi[0] - k * e[0]).abs())
                .max((vi[1] - k * e[1]).abs());
        }
    }
    outcome(
        sl_err <= 1e-10 && dl_err <= 1e-10,
        format!("single layer at center {sl_err:.1e}, double layer in/on/out {dl_err:.1e}"),
    )
}

fn relaxation(scheme: &str, m: usize) -> RunOutcome {
    let c = RunConfig::from_json(&format!(
        r#"{{"preset": {{"kind": "relaxation"}}, "n": 96, "horizon": 2.0,
            "mode": {{"fixed": {{"steps": {m}}}}}, "scheme": {scheme}}}"#
    ))
    .unwrap();
    simulate(&c, None).unwrap()
}

fn within_factor(v: f64, target: f64, f: f64) -> bool {
    v >= target / f && v <= target * f
}

fn relaxation_convergence() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut check = |ok: bool, text: String| {
        pass &= ok;
        parts.push(format!("{text} [{}]", if ok { "ok" } else { "fail" }));
    };

    let euler = r#"{"kind": "euler"}"#;
    let ms = [125, 250, 500, 1000];
    let ea: Vec<f64> = ms
        .iter()
        .map(|&m| relaxation(euler, m).summary.area_error)
        .collect();
    let dts: Vec<f64> = ms.iter().map(|&m| 2.0 / m as f64).collect();
    let order = least_squares_order(&dts, &ea);
    check(
        (1.5e-7..=1.3e-6).contains(&ea[3]),
        format!("euler m=1000 e_A {:.2e}", ea[3]),
    );
    check(
        (order - 1.0).abs() <= 0.15,
        format!("euler order {order:.2}"),
    );

    let sdc1 = r#"{"kind": "sdc", "p": 5, "n_sdc": 1}"#;
    let ms = [125, 250, 500];
    let ea: Vec<f64> = ms
        .iter()
        .map(|&m| relaxation(sdc1, m).summary.area_error)
        .collect();
    let dts: Vec<f64> = ms.iter().map(|&m| 2.0 / m as f64).collect();
    let order = least_squares_order(&dts, &ea);
    check(
        within_factor(ea[1], 7.28e-9, 5.0),
        format!("sdc1 m=250 e_A {:.2e}", ea[1]),
    );
    check(order >= 1.8, format!("sdc1 order {order:.2}"));

    let sdc2 = relaxation(r#"{"kind": "sdc", "p": 5, "n_sdc": 2}"#, 125).summary;
    check(
        sdc2.length_error <= 1e-9,
        format!("sdc2 m=125 e_L {:.2e}", sdc2.length_error),
    );

    let bdf2 = relaxation(r#"{"kind": "bdf2"}"#, 125).summary;
    check(
        within_factor(bdf2.area_error, 6.13e-8, 3.0),
        format!("bdf2 m=125 e_A {:.2e}", bdf2.area_error),
    );
    outcome(pass, parts.join("; "))
}

fn equilibrium() -> Outcome {
    match equilibrium_drift() {
        Ok(worst) => outcome(
            worst <= 1e-8,
            format!("max per-step ‖Δx‖∞ {worst:.1e} over euler, bdf2, sdc1, sdc2"),
        ),
        Err(e) => outcome(false, e),
    }
}

fn equilibrium_drift() -> Result<f64, String> {
    let s0 = SuspensionState::new(vec![
        VesicleCurve::ellipse(96, 1.0, 1.0, [0.3, -0.2], 0.0).unwrap()
    ]);
    let flow = BackgroundFlow::None;
    let dt = 0.05;
    let mut worst = 0.0f64;
    let step_change = |a: &SuspensionState, b: &SuspensionState| {
        max_abs_diff(&a.vesicles[0].stacked(), &b.vesicles[0].stacked())
    };

    let mut solver = Solver::new(SolverSettings::default());
    let mut s = s0.clone();
    for _ in 0..10 {
        let n = provisional_step(&[&s], dt, &ImexScheme::euler(), &flow, &mut solver)
            .map_err(|e| format!("euler: {e}"))?;
        worst = worst.max(step_change(&s, &n));
        s = n;
    }
    let mut prev = s0.clone();
    let mut s =
        bdf2_bootstrap(&s0, dt, &flow, &mut solver).map_err(|e| format!("bdf2 bootstrap: {e}"))?;
    worst = worst.max(step_change(&prev, &s));
    for _ in 0..10 {
        let n = provisional_step(&[&s, &prev], dt, &ImexScheme::bdf2(), &flow, &mut solver)
            .map_err(|e| format!("bdf2: {e}"))?;
        worst = worst.max(step_change(&s, &n));
        prev = std::mem::replace(&mut s, n);
    }
    for n_sdc in [1, 2] {
        let opts = SdcOptions {
            p: 4,
            n_sdc,
            ..Default::default()
        };
        let mut s = s0.clone();
        for k in 0..10 {
            let n = sdc_step(&s, dt, opts, &flow, &mut solver)
                .map_err(|e| format!("sdc{n_sdc} step {k}: {e}"))?
                .0;
            worst = worst.max(step_change(&s, &n));
            s = n;
        }
    }
    Ok(worst)
}

/// Sweeps to the collocation fixed point, then measures one more sweep and
/// the inextensibility defect of the velocity at every node.
///
/// With node tensions recomputed from positions the defect vanishes by
/// construction, so the defect is measured on the carried-tension sweep,
/// where it holds only at the fixed point. That sweep loses contraction on
/// the stiffest modes as N grows, hence N = 32 there; the default sweep is
/// checked at N = 96.
fn sdc_fixed_point() -> Outcome {
    let bound = 10.0 * GMRES_TOL;
    let mut detail = Vec::new();
    let mut pass = true;
    for (n, consistent_nodes) in [(32, false), (96, true)] {
        match fixed_point(n, consistent_nodes) {
            Ok((change, div)) => {
                pass &= change <= bound && div <= bound;
                let tension = if consistent_nodes { "node" } else { "carried" };
                detail.push(format!(
                    "N={n} {tension} tension: sweep change {change:.1e}, max |Div v| {div:.1e}"
                ));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("N={n}: {e}"));
            }
        }
    }
    outcome(
        pass,
        format!("dt=5e-5 p=5: {} (bound {bound:.0e})", detail.join("; ")),
    )
}

fn fixed_point(n: usize, consistent_nodes: bool) -> Result<(f64, f64), vesicle_core::Error> {
    let s = SuspensionState::new(vec![VesicleCurve::ellipse(n, 1.6, 0.6, [0.0, 0.0], 0.0)?]);
    let flow = BackgroundFlow::None;
    let mut solver = Solver::new(SolverSettings::default());
    let s = consistent_tension(&s, &flow, &mut solver)?;
    let mut ws = SdcWorkspace::provisional(&s, 5e-5, 5, &flow, &mut solver)?;
    ws.consistent_nodes = consistent_nodes;
    for _ in 0..12 {
        ws.sweep(SweepVariant::FrozenNext, &mut solver)?;
    }
    let change = ws.sweep(SweepVariant::FrozenNext, &mut solver)?;
    Ok((change, ws.inextensibility_defect(&mut solver)?))
}

fn extensional_adaptive() -> Outcome {
    let c = RunConfig::load(&configs_dir().join("extensional_adaptive.json")).unwrap();
    assert!(matches!(c.mode, Mode::Adaptive { tolerance, .. } if tolerance == 1e-3));
    assert!(matches!(c.scheme, Scheme::Sdc { n_sdc: 1, .. }) && c.n == 96 && c.horizon == 24.0);
    let out = simulate(&c, None).unwrap();
    let s = &out.summary;
    let err = s.area_error.max(s.length_error);
    // Each accepted step ending in the final third, except the one clipped to
    // T, must be larger than the accepted step before it. The controller grows
    // by at most 1.5 per step, so late steps are long and few.
    let rows: Vec<_> = out.accepted_rows().collect();
    let tail: Vec<(f64, f64)> = rows
        .windows(2)
        .filter(|w| w[1].t >= 2.0 * c.horizon / 3.0 && w[1].t < c.horizon)
        .map(|w| (w[0].dt, w[1].dt))
        .collect();
    let grows = !tail.is_empty() && tail.iter().all(|(a, b)| b > a);
    let trace = tail
        .iter()
        .map(|(a, b)| format!("{a:.3e} -> {b:.3e}"))
        .collect::<Vec<_>>()
        .join(", ");
    let pass = err <= 2e-3 && s.rejected <= s.accepted && (10..=200).contains(&s.accepted) && grows;
    outcome(
        pass,
        format!(
            "max(e_A, e_L) {err:.2e}, accepted {}, rejected {}, final-third dt {trace}",
            s.accepted, s.rejected
        ),
    )
}

fn preconditioner() -> Outcome {
    let iterations = |n: usize| {
        let c = RunConfig::from_json(&format!(
            r#"{{"preset": {{"kind": "relaxation"}}, "n": {n}, "horizon": 0.08,
                "mode": {{"fixed": {{"steps": 10}}}}, "scheme": {{"kind": "sdc", "p": 4, "n_sdc": 1}}}}"#
        ))
        .unwrap();
        simulate(&c, None).unwrap().summary.stats.max_iterations
    };
    let (i64_, i128_) = (iterations(64), iterations(128));
    let mut counts_ok = true;
    for (p, n_sdc) in [(2, 0), (3, 1), (4, 2), (5, 3)] {
        let c = RunConfig::from_json(&format!(
            r#"{{"preset": {{"kind": "relaxation"}}, "n": 64, "horizon": 0.02,
                "mode": {{"fixed": {{"steps": 4}}}}, "scheme": {{"kind": "sdc", "p": {p}, "n_sdc": {n_sdc}}}}}"#
        ))
        .unwrap();
        counts_ok &= simulate(&c, None).unwrap().summary.stats.factorizations == 4;
    }
    outcome(
        i64_.abs_diff(i128_) <= 5 && counts_ok,
        format!("max GMRES iterations N=64 {i64_}, N=128 {i128_}; one factorization per step: {counts_ok}"),
    )
}

fn couette_profile() -> Outcome {
    let n = 128;
    let outer = VesicleCurve::ellipse(n, 2.0, 2.0, [0.0, 0.0], 0.0).unwrap();
    let inner = VesicleCurve::ellipse(n, 1.0, 1.0, [0.0, 0.0], 0.0).unwrap();
    let wall = WallGeometry::new(outer, vec![inner])
        .unwrap()
        .with_velocity(|k, p| if k == 1 { [-p[1], p[0]] } else { [0.0, 0.0] });
    let solver = WallSolver::new(wall, NearParams::default()).unwrap();
    let sol = solver.solve(None).unwrap();
    // u_θ = A r + B / r with u_θ(1) = 1, u_θ(2) = 0
    let (a, b) = (-1.0 / 3.0, 4.0 / 3.0);
    let mut targets = Vec::new();
    for &r in &[1.05, 1.25, 1.5, 1.75, 1.95] {
        for k in 0..8 {
            let t = 0.37 + 0.79 * k as f64;
            targets.push([r * t.cos(), r * t.sin()]);
        }
    }
    let v = solver.velocity(&sol.density, &targets).unwrap();
    let mut worst = 0.0f64;
    for (p, u) in targets.iter().zip(&v) {
        let r = p[0].hypot(p[1]);
        let ut = a * r + b / r;
        worst = worst
            .max((u[0] + ut * p[1] / r).abs())
            .max((u[1] - ut * p[0] / r).abs());
    }
    outcome(
        worst <= 1e-8,
        format!("max velocity error {worst:.1e} at r in [1.05, 1.95]"),
    )
}

fn reduced_couette() -> Outcome {
    let c = RunConfig::load(&configs_dir().join("couette.json")).unwrap();
    let Mode::Adaptive {
        tolerance, budget, ..
    } = c.mode
    else {
        panic!("couette config must be adaptive");
    };
    assert_eq!(tolerance, 1e-1);
    assert_eq!(budget, BudgetMode::Remaining);
    let out = match simulate(&c, None) {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let s = &out.summary;
    let worst = out
        .accepted_rows()
        .map(|r| r.area_error.max(r.length_error))
        .fold(0.0f64, f64::max);
    let attempts = out.rows.len();
    let pass =
        s.final_time == c.horizon && worst <= tolerance && s.stats.factorizations == attempts;
    outcome(
        pass,
        format!(
            "t = {}, accepted {}, rejected {}, max committed error {worst:.2e} <= {tolerance:e}, factorizations {} / attempts {attempts}",
            s.final_time, s.accepted, s.rejected, s.stats.factorizations
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<f64>); 10] = [
        ("1 quadrature order", quadrature_order, Some(10.0)),
        ("2 lobatto exactness", lobatto_exactness, Some(1.0)),
        ("3 layer-potential identities", layer_identities, Some(10.0)),
        ("4 relaxation convergence", relaxation_convergence, None),
        ("5 equilibrium", equilibrium, Some(30.0)),
        ("6 sdc fixed point", sdc_fixed_point, Some(60.0)),
        ("7 extensional adaptive", extensional_adaptive, None),
        ("8 preconditioner", preconditioner, Some(60.0)),
        ("9 couette profile", couette_profile, Some(30.0)),
        ("10 reduced couette", reduced_couette, None),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, f, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|k| name.contains(k.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.is_none_or(|l| secs < l);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" (limit {l} s)"));
        println!(
            "{} criterion {name}: {} [{secs:.1} s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

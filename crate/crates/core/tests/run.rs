use std::fs;

use vesicle_core::run::{convergence_table, run, simulate, RunConfig};

fn config(extra: &str) -> RunConfig {
    RunConfig::from_json(&format!(
        r#"{{"name": "tiny", "preset": {{"kind": "relaxation"}}, "n": 32, "horizon": 0.05,
            "mode": {{"fixed": {{"steps": 5}}}}, "scheme": {{"kind": "sdc", "p": 3}}{extra}}}"#
    ))
    .unwrap()
}

#[test]
fn artifacts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(r#", "output": {"snapshot_every": 2}"#);
    c.output.dir = Some(dir.path().join("out"));
    let out = run(&c).unwrap();
    let root = dir.path().join("out");
    let csv = fs::read_to_string(root.join("steps.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,t,dt,area_error,length_error,step_area_change,step_length_change,gmres_iterations,sweep_residuals,accepted"
    );
    assert_eq!(lines.count(), 5);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["accepted"], 5);
    let back = RunConfig::load(&root.join("config.json")).unwrap();
    assert_eq!(back.n, c.n);
    // initial, after steps 2 and 4, and final
    let snaps = fs::read_dir(root.join("snapshots")).unwrap().count();
    assert_eq!(snaps, 4);
    let last = fs::read_to_string(root.join("snapshots/final_v0.txt")).unwrap();
    assert!(last.starts_with("# t = 5.0"));
    assert_eq!(out.final_state.time, 0.05);
}

#[test]
fn runs_are_bit_identical() {
    let c = config(r#", "perturbation": 0.01, "seed": 7"#);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut csvs = Vec::new();
    for d in &dirs {
        simulate(&c, Some(d.path())).unwrap();
        csvs.push(fs::read(d.path().join("steps.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn failed_run_keeps_partial_artifacts() {
    // one unpreconditioned GMRES iteration cannot converge
    let c = config(r#", "solver": {"max_iter": 1, "precondition": false}"#);
    let d = tempfile::tempdir().unwrap();
    let r = simulate(&c, Some(d.path()));
    assert!(
        matches!(r, Err(vesicle_core::Error::GmresNotConverged { .. })),
        "{r:?}"
    );
    let summary = fs::read_to_string(d.path().join("summary.json")).unwrap();
    assert!(summary.contains("failed:"), "{summary}");
    assert!(d.path().join("snapshots/00000_v0.txt").exists());
}

#[test]
fn convergence_sweep_writes_table() {
    let d = tempfile::tempdir().unwrap();
    let t = convergence_table(&config(""), &[4, 8], Some(d.path())).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert!(t.rows[1].area_error < t.rows[0].area_error);
    assert!(d.path().join("convergence.csv").exists());
    assert!(d.path().join("m8/summary.json").exists());
}

#[test]
fn shipped_configs_validate() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut seen = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "json") {
            let c = RunConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            vesicle_core::run::Setup::build(&c).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}

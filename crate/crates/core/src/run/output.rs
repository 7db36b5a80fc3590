use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{simulate, Mode, RunConfig, RunSummary, StepRow};
use crate::dynamics::SuspensionState;
use crate::error::{Error, Result};

/// Environment variable naming the directory that relative output paths
/// are resolved against.
pub const OUTPUT_ROOT_ENV: &str = "VESICLE_OUTPUT_ROOT";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

pub(super) fn run_dir(config: &RunConfig) -> PathBuf {
    let dir = config
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.name));
    if dir.is_absolute() {
        dir
    } else {
        output_root().join(dir)
    }
}

/// Files of one run: `config.json`, `steps.csv`, `summary.json` and a
/// `snapshots/` directory of curve text files.
pub(super) struct Artifacts {
    dir: PathBuf,
    csv: csv::Writer<BufWriter<File>>,
    snapshots: usize,
}

impl Artifacts {
    pub(super) fn create(dir: &Path, config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(dir.join("snapshots"))?;
        fs::write(dir.join("config.json"), config.to_json())?;
        let csv = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("steps.csv"))?));
        Ok(Self {
            dir: dir.to_path_buf(),
            csv,
            snapshots: 0,
        })
    }

    pub(super) fn row(&mut self, row: &StepRow) -> Result<()> {
        self.csv.serialize(row).map_err(csv_error)?;
        self.csv.flush()?;
        Ok(())
    }

    /// Writes one file per vesicle, `snapshots/<k>_v<j>.txt`.
    pub(super) fn snapshot(&mut self, state: &SuspensionState, last: bool) -> Result<()> {
        let tag = if last {
            "final".to_string()
        } else {
            format!("{:05}", self.snapshots)
        };
        for (j, v) in state.vesicles.iter().enumerate() {
            let path = self.dir.join("snapshots").join(format!("{tag}_v{j}.txt"));
            fs::write(path, format!("# t = {:.16e}\n{}", state.time, v.to_text()))?;
        }
        self.snapshots += 1;
        Ok(())
    }

    pub(super) fn summary(&mut self, summary: &RunSummary) -> Result<()> {
        self.csv.flush()?;
        let text = serde_json::to_string_pretty(summary)?;
        fs::write(self.dir.join("summary.json"), text + "\n")?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub dt: f64,
    pub area_error: f64,
    pub length_error: f64,
    pub matvecs: usize,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log e_A` against `log Δt`.
    pub area_order: f64,
    pub length_order: f64,
}

/// Least-squares slope of `log e` against `log dt`.
pub fn least_squares_order(dts: &[f64], errs: &[f64]) -> f64 {
    let x: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Fixed-step runs of `config` for every `m` in `ms`. With `out`, each run
/// writes to `out/m<m>/` and the table goes to `out/convergence.{csv,json}`.
pub fn convergence_table(
    config: &RunConfig,
    ms: &[usize],
    out: Option<&Path>,
) -> Result<ConvergenceTable> {
    if ms.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a convergence table needs at least two runs, got {}",
            ms.len()
        )));
    }
    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        let mut c = config.clone();
        c.mode = Mode::Fixed { steps: m };
        c.validate()?;
        let dir = out.map(|d| d.join(format!("m{m}")));
        let o = simulate(&c, dir.as_deref())?;
        rows.push(ConvergenceRow {
            m,
            dt: c.horizon / m as f64,
            area_error: o.summary.area_error,
            length_error: o.summary.length_error,
            matvecs: o.summary.stats.matvecs,
            wall_clock_seconds: o.summary.wall_clock_seconds,
        });
    }
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let ea: Vec<f64> = rows.iter().map(|r| r.area_error).collect();
    let el: Vec<f64> = rows.iter().map(|r| r.length_error).collect();
    let table = ConvergenceTable {
        area_order: least_squares_order(&dts, &ea),
        length_order: least_squares_order(&dts, &el),
        rows,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("convergence.csv")).map_err(csv_error)?;
        for r in &table.rows {
            w.serialize(r).map_err(csv_error)?;
        }
        w.flush()?;
        let mut f = File::create(dir.join("convergence.json"))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&table)?)?;
    }
    Ok(table)
}

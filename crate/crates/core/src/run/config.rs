use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adaptive::BudgetMode;
use crate::error::{Error, Result};
use crate::linalg::SolverSettings;
use crate::sdc::{SdcOptions, SweepVariant};

/// Flow setup. Presets fill in geometry when `vesicles` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    /// One 3:1 ellipse relaxing in quiescent fluid.
    Relaxation,
    /// Two vesicles on the x axis, symmetric about the origin, in
    /// `v∞ = rate·(−x, y)`. `separation` is the initial center distance
    /// from the origin.
    Extensional {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default)]
        separation: Option<f64>,
    },
    Shear {
        #[serde(default = "one")]
        rate: f64,
    },
    /// One vesicle in a closed tube with a smooth constriction; parabolic
    /// inflow and outflow at the tube ends.
    Stenosis {
        /// Half-height at the throat relative to the tube half-height.
        #[serde(default = "default_gap")]
        gap: f64,
        #[serde(default = "one")]
        inflow: f64,
    },
    /// Vesicles between a fixed outer circle and an off-center rotating
    /// inner circle.
    Couette {
        #[serde(default = "one")]
        omega: f64,
    },
    Custom {
        flow: CustomFlow,
    },
}

fn one() -> f64 {
    1.0
}

fn default_gap() -> f64 {
    0.4
}

/// Unbounded background flows available to custom setups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CustomFlow {
    None,
    Shear { rate: f64 },
    Extensional { rate: f64 },
}

/// Initial vesicle shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum VesicleSpec {
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        angle: f64,
    },
    /// Curve text file, resampled to `n` points; relative paths are taken
    /// from the config file's directory.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Mode {
    Fixed {
        steps: usize,
    },
    Adaptive {
        tolerance: f64,
        /// Defaults to `horizon / 100`.
        #[serde(default)]
        initial_dt: Option<f64>,
        #[serde(default)]
        budget: BudgetMode,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scheme {
    Euler,
    Bdf2,
    Sdc {
        #[serde(default = "default_p")]
        p: usize,
        #[serde(default = "one_usize")]
        n_sdc: usize,
        #[serde(default)]
        variant: SweepVariant,
        #[serde(default = "yes")]
        consistent_start: bool,
        #[serde(default = "yes")]
        consistent_nodes: bool,
    },
}

fn yes() -> bool {
    true
}

fn default_p() -> usize {
    4
}

fn one_usize() -> usize {
    1
}

impl Scheme {
    pub fn sdc_options(&self) -> Option<SdcOptions> {
        match *self {
            Scheme::Sdc {
                p,
                n_sdc,
                variant,
                consistent_start,
                consistent_nodes,
            } => Some(SdcOptions {
                p,
                n_sdc,
                variant,
                consistent_start,
                consistent_nodes,
            }),
            _ => None,
        }
    }

    /// Order used by the step-size controller.
    pub fn order(&self) -> usize {
        match self {
            Scheme::Euler => 1,
            Scheme::Bdf2 => 2,
            Scheme::Sdc { n_sdc, .. } => crate::adaptive::StepController::sdc_order(*n_sdc),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory; relative paths are resolved against the output
    /// root. Defaults to the run name.
    pub dir: Option<PathBuf>,
    /// Write a snapshot every this many accepted steps; 0 writes only the
    /// initial and final states.
    pub snapshot_every: usize,
}

/// A complete run description, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub preset: Preset,
    /// Points per vesicle.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Points per wall curve.
    #[serde(default = "default_n_wall")]
    pub n_wall: usize,
    /// Number of vesicles for presets that place several.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub vesicles: Option<Vec<VesicleSpec>>,
    pub horizon: f64,
    pub mode: Mode,
    pub scheme: Scheme,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    /// Amplitude of a random smooth normal displacement applied to every
    /// initial vesicle, relative to its length.
    #[serde(default)]
    pub perturbation: f64,
    /// Directory of the config file, for relative curve paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_name() -> String {
    "run".into()
}

fn default_n() -> usize {
    96
}

fn default_n_wall() -> usize {
    128
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut c = Self::from_json(&text)?;
        c.base_dir = path.parent().map(Path::to_path_buf);
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Step count of a fixed run, or `None` in adaptive mode.
    pub fn fixed_steps(&self) -> Option<usize> {
        match self.mode {
            Mode::Fixed { steps } => Some(steps),
            Mode::Adaptive { .. } => None,
        }
    }

    /// Checks everything that does not require building the geometry.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n < 8 || !self.n.is_multiple_of(2) {
            return bad(format!("n must be even and at least 8, got {}", self.n));
        }
        if self.n_wall < 8 || !self.n_wall.is_multiple_of(2) {
            return bad(format!(
                "n_wall must be even and at least 8, got {}",
                self.n_wall
            ));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.count == Some(0) {
            return bad("count must be positive".into());
        }
        if !(self.perturbation >= 0.0) || !self.perturbation.is_finite() {
            return bad(format!(
                "perturbation must be non-negative, got {}",
                self.perturbation
            ));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("run name {:?} is not a plain file name", self.name));
        }
        match self.mode {
            Mode::Fixed { steps } if steps == 0 => return bad("fixed mode needs steps ≥ 1".into()),
            Mode::Adaptive {
                tolerance,
                initial_dt,
                ..
            } => {
                if !(tolerance > 0.0) || !tolerance.is_finite() {
                    return bad(format!("tolerance must be positive, got {tolerance}"));
                }
                if let Some(dt) = initial_dt {
                    if !(dt > 0.0) || dt > self.horizon {
                        return bad(format!("initial_dt must lie in (0, horizon], got {dt}"));
                    }
                }
                if self.scheme == Scheme::Bdf2 {
                    return bad(
                        "bdf2 is fixed-step only; use euler or sdc for adaptive runs".into(),
                    );
                }
            }
            _ => {}
        }
        if let Scheme::Sdc { p, .. } = self.scheme {
            if p < 2 {
                return bad(format!("sdc needs p ≥ 2, got {p}"));
            }
        }
        if !(self.solver.gmres_tol > 0.0) || self.solver.max_iter == 0 {
            return bad("solver needs gmres_tol > 0 and max_iter ≥ 1".into());
        }
        match &self.preset {
            Preset::Custom { .. } if self.vesicles.is_none() => {
                return bad("custom preset needs an explicit vesicles list".into())
            }
            Preset::Stenosis { gap, .. } if !(*gap > 0.05 && *gap <= 1.0) => {
                return bad(format!("stenosis gap must lie in (0.05, 1], got {gap}"))
            }
            _ => {}
        }
        if let Some(v) = &self.vesicles {
            if v.is_empty() {
                return bad("vesicles list is empty".into());
            }
            for s in v {
                if let VesicleSpec::Ellipse { a, b, .. } = s {
                    if !(*a > 0.0 && *b > 0.0) {
                        return bad(format!("ellipse semi-axes must be positive, got {a}, {b}"));
                    }
                }
            }
        }
        Ok(())
    }
}

use std::f64::consts::PI;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::config::{CustomFlow, Preset, RunConfig, VesicleSpec};
use crate::curve::VesicleCurve;
use crate::dynamics::{BackgroundFlow, SuspensionState};
use crate::error::{Error, Result};
use crate::potentials::{WallGeometry, WallSolver};
use crate::spectral;

/// Length scale of the shipped presets. With unit bending modulus, shapes
/// scaled by `10^{1/3}` evolve on the same time axis as unit shapes with
/// bending modulus 0.1.
pub fn preset_scale() -> f64 {
    10f64.powf(1.0 / 3.0)
}

/// Initial state and flow of a run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub initial: SuspensionState,
    pub flow: BackgroundFlow,
}

impl Setup {
    pub fn build(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        let s = preset_scale();
        let flow = flow_for(config)?;
        let mut vesicles = match &config.vesicles {
            Some(specs) => specs
                .iter()
                .map(|v| vesicle_from_spec(v, n, config))
                .collect::<Result<Vec<_>>>()?,
            None => default_vesicles(config, s)?,
        };
        if config.perturbation > 0.0 {
            let mut rng = StdRng::seed_from_u64(config.seed);
            for v in &mut vesicles {
                *v = perturb(v, config.perturbation, &mut rng)?;
            }
        }
        let initial = SuspensionState::new(vesicles);
        initial
            .check_admissible(flow.wall().map(|w| w.geometry()))
            .map_err(|e| Error::Config(format!("initial configuration: {e}")))?;
        Ok(Self { initial, flow })
    }
}

fn flow_for(config: &RunConfig) -> Result<BackgroundFlow> {
    let nw = config.n_wall;
    let walls = match &config.preset {
        Preset::Relaxation => return Ok(BackgroundFlow::None),
        Preset::Extensional { rate, .. } => return Ok(BackgroundFlow::Extensional { rate: *rate }),
        Preset::Shear { rate } => return Ok(BackgroundFlow::Shear { rate: *rate }),
        Preset::Custom { flow } => {
            let f = match *flow {
                CustomFlow::None => BackgroundFlow::None,
                CustomFlow::Shear { rate } => BackgroundFlow::Shear { rate },
                CustomFlow::Extensional { rate } => BackgroundFlow::Extensional { rate },
            };
            f.check()?;
            return Ok(f);
        }
        Preset::Stenosis { gap, inflow } => stenosis_walls(nw, *gap, *inflow)?,
        Preset::Couette { omega } => couette_walls(nw, *omega)?,
    };
    let solver = WallSolver::new(walls, config.solver.near)?;
    Ok(BackgroundFlow::Confined(Arc::new(solver)))
}

const TUBE_HALF_LENGTH: f64 = 10.0;
const TUBE_HALF_HEIGHT: f64 = 2.0;
const COUETTE_OUTER: f64 = 10.0;
const COUETTE_INNER: f64 = 5.0;
const COUETTE_OFFSET: f64 = 2.0;

/// Half-height profile of the constricted tube.
fn throat(x: f64, gap: f64) -> f64 {
    1.0 - (1.0 - gap) * (-(x / 2.5).powi(2)).exp()
}

/// Analytic rounded rectangle squeezed by [`throat`]. The ends carry a
/// parabolic profile pointing in `+x`, so the net flux through the wall is
/// zero.
fn stenosis_walls(n: usize, gap: f64, inflow: f64) -> Result<WallGeometry> {
    let k = 3.0f64;
    let (x, y): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            let (s, c) = t.sin_cos();
            let px = TUBE_HALF_LENGTH * (k * c).tanh() / k.tanh();
            let py = TUBE_HALF_HEIGHT * (k * s).tanh() / k.tanh();
            (px, py * throat(px, gap))
        })
        .unzip();
    let outer = VesicleCurve::new(x, y)?;
    let l = TUBE_HALF_LENGTH;
    Ok(WallGeometry::new(outer, vec![])?.with_velocity(|_, p| {
        let ends = (-((l - p[0].abs()) / (0.05 * l)).powi(2)).exp();
        let profile = (1.0 - (p[1] / TUBE_HALF_HEIGHT).powi(2)).max(0.0);
        [inflow * profile * ends, 0.0]
    }))
}

fn couette_walls(n: usize, omega: f64) -> Result<WallGeometry> {
    let outer = VesicleCurve::ellipse(n, COUETTE_OUTER, COUETTE_OUTER, [0.0, 0.0], 0.0)?;
    let c = [COUETTE_OFFSET, 0.0];
    let inner = VesicleCurve::ellipse(n, COUETTE_INNER, COUETTE_INNER, c, 0.0)?;
    Ok(
        WallGeometry::new(outer, vec![inner])?.with_velocity(move |k, p| {
            if k == 1 {
                [-omega * (p[1] - c[1]), omega * (p[0] - c[0])]
            } else {
                [0.0, 0.0]
            }
        }),
    )
}

fn default_vesicles(config: &RunConfig, s: f64) -> Result<Vec<VesicleCurve>> {
    let n = config.n;
    let count = config.count;
    let single = |count: Option<usize>| -> Result<()> {
        match count {
            Some(c) if c != 1 => Err(Error::Config(format!(
                "this preset places one vesicle; give an explicit vesicles list for {c}"
            ))),
            _ => Ok(()),
        }
    };
    match &config.preset {
        Preset::Relaxation | Preset::Shear { .. } => {
            single(count)?;
            Ok(vec![VesicleCurve::ellipse(n, 3.0 * s, s, [0.0, 0.0], 0.0)?])
        }
        Preset::Extensional { separation, .. } => {
            if matches!(count, Some(c) if c != 2) {
                return Err(Error::Config(
                    "the extensional preset places two vesicles".into(),
                ));
            }
            let d = separation.unwrap_or(s);
            Ok(vec![
                VesicleCurve::ellipse(n, s / 3.0, s, [-d, 0.0], 0.0)?,
                VesicleCurve::ellipse(n, s / 3.0, s, [d, 0.0], 0.0)?,
            ])
        }
        Preset::Stenosis { .. } => {
            single(count)?;
            Ok(vec![VesicleCurve::ellipse(n, 0.9, 0.45, [-6.0, 0.0], 0.0)?])
        }
        Preset::Couette { .. } => {
            let m = count.unwrap_or(4);
            (0..m)
                .map(|k| {
                    let th = PI / 2.0 + 2.0 * PI * k as f64 / m as f64;
                    let e = [th.cos(), th.sin()];
                    // Inner circle radius along the ray from the origin.
                    let ce = COUETTE_OFFSET * e[0];
                    let r_in =
                        ce + (ce * ce - COUETTE_OFFSET.powi(2) + COUETTE_INNER.powi(2)).sqrt();
                    let r = 0.5 * (r_in + COUETTE_OUTER);
                    VesicleCurve::ellipse(n, 0.9, 0.35, [r * e[0], r * e[1]], th + PI / 2.0)
                })
                .collect()
        }
        Preset::Custom { .. } => Err(Error::Config(
            "custom preset needs an explicit vesicles list".into(),
        )),
    }
}

fn vesicle_from_spec(spec: &VesicleSpec, n: usize, config: &RunConfig) -> Result<VesicleCurve> {
    match spec {
        VesicleSpec::Ellipse {
            a,
            b,
            center,
            angle,
        } => VesicleCurve::ellipse(n, *a, *b, *center, *angle),
        VesicleSpec::File { path } => {
            let full = match &config.base_dir {
                Some(base) if path.is_relative() => base.join(path),
                _ => path.clone(),
            };
            let text = std::fs::read_to_string(&full)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", full.display())))?;
            let c = VesicleCurve::from_text(&text)?;
            if c.n() == n {
                Ok(c)
            } else {
                VesicleCurve::new(spectral::resample(c.x(), n), spectral::resample(c.y(), n))
            }
        }
    }
}

/// Smooth random normal displacement with modes 2..=4 and amplitude
/// `amplitude · length`.
fn perturb(v: &VesicleCurve, amplitude: f64, rng: &mut StdRng) -> Result<VesicleCurve> {
    let g = v.geometry()?;
    let n = v.n();
    let coeffs: Vec<(f64, f64)> = (2..=4)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let scale = amplitude * g.length / 3.0;
    let (x, y) = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let d: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let k = (k + 2) as f64;
                    a * (k * t).cos() + b * (k * t).sin()
                })
                .sum::<f64>()
                * scale;
            let nrm = g.normal(i);
            (v.x()[i] + d * nrm[0], v.y()[i] + d * nrm[1])
        })
        .unzip();
    VesicleCurve::new(x, y)
}

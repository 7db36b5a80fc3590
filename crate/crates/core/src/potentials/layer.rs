//! Layer potentials of a single source curve evaluated at arbitrary targets,
//! assembled as dense rows so that frozen operators can be cached.

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;

use super::kernels::{stokeslet, stresslet};
use crate::curve::{CurveGeometry, VesicleCurve};
use crate::error::{Error, Result};
use crate::spectral;

/// Near-zone parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NearParams {
    /// Near-zone width in units of the source arclength spacing.
    pub zone: f64,
    pub upsample: usize,
    pub interp_points: usize,
}

impl Default for NearParams {
    fn default() -> Self {
        Self {
            zone: 5.0,
            upsample: 16,
            interp_points: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Single,
    Double,
}

/// A source curve with everything needed to evaluate its layer potentials.
#[derive(Debug, Clone)]
pub struct LayerSource {
    pub curve: VesicleCurve,
    pub geom: CurveGeometry,
    params: NearParams,
    fine_x: Vec<f64>,
    fine_y: Vec<f64>,
    fine_w: Vec<f64>,
    fine_nx: Vec<f64>,
    fine_ny: Vec<f64>,
    coeff_x: Vec<Complex64>,
    coeff_y: Vec<Complex64>,
    bbox: [f64; 4],
}

/// Classification of a target relative to a source.
#[derive(Debug, Clone, Copy)]
enum Proximity {
    Far,
    Near {
        theta: f64,
        foot: [f64; 2],
        distance: f64,
    },
}

impl LayerSource {
    pub fn new(curve: &VesicleCurve, params: NearParams) -> Result<Self> {
        let geom = curve.geometry()?;
        let fine = curve.upsample(params.upsample.max(1))?;
        let fg = fine.geometry()?;
        let bbox = curve.bbox();
        Ok(Self {
            curve: curve.clone(),
            params,
            fine_w: fg.weights(),
            fine_nx: fg.tangent_y.clone(),
            fine_ny: fg.tangent_x.iter().map(|t| -t).collect(),
            fine_x: fine.x().to_vec(),
            fine_y: fine.y().to_vec(),
            coeff_x: spectral::coefficients(curve.x()),
            coeff_y: spectral::coefficients(curve.y()),
            geom,
            bbox,
        })
    }

    pub fn n(&self) -> usize {
        self.curve.n()
    }

    pub fn zone_width(&self) -> f64 {
        self.params.zone * self.geom.spacing
    }

    /// Distance from `p` to the (interpolated) source curve, if within the near zone.
    pub fn near_distance(&self, p: [f64; 2]) -> Option<f64> {
        match self.classify(p) {
            Proximity::Near { distance, .. } => Some(distance),
            Proximity::Far => None,
        }
    }

    fn classify(&self, p: [f64; 2]) -> Proximity {
        let zone = self.zone_width();
        let b = &self.bbox;
        if p[0] < b[0] - zone || p[0] > b[1] + zone || p[1] < b[2] - zone || p[1] > b[3] + zone {
            return Proximity::Far;
        }
        let nf = self.fine_x.len();
        let (mut best, mut best_i) = (f64::INFINITY, 0);
        for i in 0..nf {
            let d2 = (p[0] - self.fine_x[i]).powi(2) + (p[1] - self.fine_y[i]).powi(2);
            if d2 < best {
                best = d2;
                best_i = i;
            }
        }
        let fine_spacing = self.geom.spacing / self.params.upsample.max(1) as f64;
        if best.sqrt() > zone + 2.0 * fine_spacing {
            return Proximity::Far;
        }
        let theta0 = 2.0 * std::f64::consts::PI * best_i as f64 / nf as f64;
        let (theta, foot) = self.closest_point(p, theta0);
        let distance = (p[0] - foot[0]).hypot(p[1] - foot[1]);
        if distance < zone {
            Proximity::Near {
                theta,
                foot,
                distance,
            }
        } else {
            Proximity::Far
        }
    }

    /// Newton iteration for the parameter minimizing the distance to `p`.
    fn closest_point(&self, p: [f64; 2], mut theta: f64) -> (f64, [f64; 2]) {
        let h = self.geom.dtheta();
        for _ in 0..50 {
            let ex = spectral::evaluate_with_derivatives(&self.coeff_x, theta);
            let ey = spectral::evaluate_with_derivatives(&self.coeff_y, theta);
            let (dx, dy) = (ex[0] - p[0], ey[0] - p[1]);
            let g = dx * ex[1] + dy * ey[1];
            let hess = ex[1] * ex[1] + ey[1] * ey[1] + dx * ex[2] + dy * ey[2];
            let step = if hess > 0.0 {
                (g / hess).clamp(-h, h)
            } else {
                -g.signum() * 0.25 * h
            };
            theta -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let fx = spectral::evaluate_with_derivatives(&self.coeff_x, theta)[0];
        let fy = spectral::evaluate_with_derivatives(&self.coeff_y, theta)[0];
        (theta, [fx, fy])
    }

    /// Rows (x- and y-velocity) of the layer operator at target `p`, acting on
    /// a density `[f_x; f_y]` sampled at the source points.
    ///
    /// `on_curve` is the on-surface operator on this source (self single
    /// layer, or principal-value double layer); it is only touched for near
    /// targets.
    pub fn rows(
        &self,
        kind: LayerKind,
        p: [f64; 2],
        on_curve: &DMatrix<f64>,
    ) -> Result<[Vec<f64>; 2]> {
        match self.classify(p) {
            Proximity::Far => Ok(self.far_rows(kind, p)),
            Proximity::Near {
                theta,
                foot,
                distance,
            } => self.near_rows(kind, p, theta, foot, distance, on_curve),
        }
    }

    fn far_rows(&self, kind: LayerKind, p: [f64; 2]) -> [Vec<f64>; 2] {
        let n = self.n();
        let (x, y) = (self.curve.x(), self.curve.y());
        let w = self.geom.weights();
        let mut rx = vec![0.0; 2 * n];
        let mut ry = vec![0.0; 2 * n];
        for j in 0..n {
            let r = [p[0] - x[j], p[1] - y[j]];
            let k = match kind {
                LayerKind::Single => stokeslet(r),
                LayerKind::Double => stresslet(r, self.geom.normal(j)),
            };
            rx[j] = k[0][0] * w[j];
            rx[n + j] = k[0][1] * w[j];
            ry[j] = k[1][0] * w[j];
            ry[n + j] = k[1][1] * w[j];
        }
        [rx, ry]
    }

    fn near_rows(
        &self,
        kind: LayerKind,
        p: [f64; 2],
        theta: f64,
        foot: [f64; 2],
        distance: f64,
        on_curve: &DMatrix<f64>,
    ) -> Result<[Vec<f64>; 2]> {
        let n = self.n();
        let ds = self.geom.spacing;
        if distance < 1e-12 * self.geom.length {
            return Err(Error::Collision { index: 0, distance });
        }
        if on_curve.nrows() != 2 * n || on_curve.ncols() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: on_curve.nrows(),
            });
        }
        let dir = [(p[0] - foot[0]) / distance, (p[1] - foot[1]) / distance];
        // Points farther than the near zone of the upsampled curve are
        // resolved by the fine trapezoid rule; closer ones are interpolated
        // along the ray from the foot point with nodes at that spacing.
        let spacing = self.params.zone * ds / self.params.upsample.max(1) as f64;
        let (nodes, lag) = if distance >= spacing {
            (vec![distance], vec![1.0])
        } else {
            let m = self.params.interp_points.max(1);
            let nodes: Vec<f64> = (0..=m).map(|k| k as f64 * spacing).collect();
            let lag = lagrange_weights(&nodes, distance);
            (nodes, lag)
        };
        let direct = nodes.len() == 1;

        let nf = self.fine_x.len();
        let mut fine = [vec![0.0; nf], vec![0.0; nf], vec![0.0; nf], vec![0.0; nf]];
        for (k, &lk) in lag.iter().enumerate().skip(usize::from(!direct)) {
            let z = [foot[0] + nodes[k] * dir[0], foot[1] + nodes[k] * dir[1]];
            for i in 0..nf {
                let r = [z[0] - self.fine_x[i], z[1] - self.fine_y[i]];
                let kern = match kind {
                    LayerKind::Single => stokeslet(r),
                    LayerKind::Double => stresslet(r, [self.fine_nx[i], self.fine_ny[i]]),
                };
                let s = lk * self.fine_w[i];
                fine[0][i] += s * kern[0][0];
                fine[1][i] += s * kern[0][1];
                fine[2][i] += s * kern[1][0];
                fine[3][i] += s * kern[1][1];
            }
        }
        let coarse: Vec<Vec<f64>> = fine
            .iter()
            .map(|f| spectral::resample_adjoint(f, n))
            .collect();
        let mut rx = [coarse[0].clone(), coarse[1].clone()].concat();
        let mut ry = [coarse[2].clone(), coarse[3].clone()].concat();

        if direct {
            return Ok([rx, ry]);
        }
        // on-surface value at the foot point, interpolated from the source grid
        let l0 = lag[0];
        let interp = spectral::interpolation_weights(n, theta);
        for (j, &lj) in interp.iter().enumerate() {
            let c = l0 * lj;
            if c == 0.0 {
                continue;
            }
            for col in 0..2 * n {
                rx[col] += c * on_curve[(j, col)];
                ry[col] += c * on_curve[(n + j, col)];
            }
        }
        if kind == LayerKind::Double {
            // one-sided limit: PV − ½η on the side opposite the normal, PV + ½η on the other
            let nrm = normal_at(&self.coeff_x, &self.coeff_y, theta);
            let side = if dir[0] * nrm[0] + dir[1] * nrm[1] > 0.0 {
                0.5
            } else {
                -0.5
            };
            for (j, &lj) in interp.iter().enumerate() {
                rx[j] += l0 * side * lj;
                ry[n + j] += l0 * side * lj;
            }
        }
        Ok([rx, ry])
    }

    /// Dense `2T × 2N` matrix of the layer operator evaluated at `targets`.
    pub fn matrix(
        &self,
        kind: LayerKind,
        targets: &[[f64; 2]],
        on_curve: &DMatrix<f64>,
    ) -> Result<DMatrix<f64>> {
        let t = targets.len();
        let n = self.n();
        let mut m = DMatrix::zeros(2 * t, 2 * n);
        for (i, &p) in targets.iter().enumerate() {
            let [rx, ry] = self.rows(kind, p, on_curve).map_err(|e| match e {
                Error::Collision { distance, .. } => Error::Collision { index: i, distance },
                other => other,
            })?;
            for c in 0..2 * n {
                m[(i, c)] = rx[c];
                m[(t + i, c)] = ry[c];
            }
        }
        Ok(m)
    }

    /// Plain trapezoid evaluation; fails for targets in the near zone.
    pub fn far_eval(
        &self,
        kind: LayerKind,
        density: &[f64],
        targets: &[[f64; 2]],
    ) -> Result<Vec<[f64; 2]>> {
        self.check_density(density)?;
        targets
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if let Proximity::Near { distance, .. } = self.classify(p) {
                    return Err(Error::NearZone {
                        index: i,
                        distance,
                        zone: self.zone_width(),
                    });
                }
                let [rx, ry] = self.far_rows(kind, p);
                Ok([dot(&rx, density), dot(&ry, density)])
            })
            .collect()
    }

    /// Evaluation valid at any off-surface target, routing near targets
    /// through the interpolation scheme.
    pub fn eval(
        &self,
        kind: LayerKind,
        density: &[f64],
        targets: &[[f64; 2]],
        on_curve: &DMatrix<f64>,
    ) -> Result<Vec<[f64; 2]>> {
        self.check_density(density)?;
        targets
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let [rx, ry] = self.rows(kind, p, on_curve).map_err(|e| match e {
                    Error::Collision { distance, .. } => Error::Collision { index: i, distance },
                    other => other,
                })?;
                Ok([dot(&rx, density), dot(&ry, density)])
            })
            .collect()
    }

    fn check_density(&self, density: &[f64]) -> Result<()> {
        if density.len() != 2 * self.n() {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n(),
                got: density.len(),
            });
        }
        Ok(())
    }
}

fn normal_at(cx: &[Complex64], cy: &[Complex64], theta: f64) -> [f64; 2] {
    let dx = spectral::evaluate_with_derivatives(cx, theta)[1];
    let dy = spectral::evaluate_with_derivatives(cy, theta)[1];
    let j = dx.hypot(dy);
    [dy / j, -dx / j]
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lagrange basis weights on `nodes` evaluated at `t`.
pub(crate) fn lagrange_weights(nodes: &[f64], t: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|k| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &xj)| (t - xj) / (nodes[k] - xj))
                .product()
        })
        .collect()
}

/// Principal-value double layer on the curve itself, with the curvature
/// diagonal limit `−(κ/2π) t⊗t`. Acts on `[η_x; η_y]`.
pub fn double_layer_pv_matrix(curve: &VesicleCurve, geom: &CurveGeometry) -> DMatrix<f64> {
    let n = curve.n();
    let (x, y) = (curve.x(), curve.y());
    let w = geom.weights();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let k = if i == j {
                let (tx, ty) = (geom.tangent_x[i], geom.tangent_y[i]);
                let c = -geom.curvature[i] / (2.0 * std::f64::consts::PI);
                [[c * tx * tx, c * tx * ty], [c * tx * ty, c * ty * ty]]
            } else {
                stresslet([x[i] - x[j], y[i] - y[j]], geom.normal(j))
            };
            m[(i, j)] = k[0][0] * w[j];
            m[(i, n + j)] = k[0][1] * w[j];
            m[(n + i, j)] = k[1][0] * w[j];
            m[(n + i, n + j)] = k[1][1] * w[j];
        }
    }
    m
}

//! Hybrid Gauss-trapezoid rule for periodic integrands with a logarithmic
//! singularity at a grid point, and the self-interaction single layer built on it.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::curve::{CurveGeometry, VesicleCurve};
use crate::error::{Error, Result};
use crate::spectral;

// Order-8 log-singular rule of Alpert (SIAM J. Sci. Comput. 20, 1999):
// 7 nodes per side, trapezoid part starting 5 points from the singularity.
// Regenerated by solving the moment equations for x^k and x^k log x,
// k = 0..6 (Hurwitz zeta right-hand sides) in 60-digit arithmetic.
const NODES: [f64; 7] = [
    6.531_815_708_567_919e-3,
    9.086_744_584_657_729e-2,
    3.967_966_533_375_878e-1,
    1.027_856_640_525_645_7,
    1.945_288_592_909_266,
    2.980_147_933_889_639_5,
    3.998_861_349_951_123,
];
const WEIGHTS: [f64; 7] = [
    2.462_194_198_995_203e-2,
    1.701_315_866_854_178e-1,
    4.609_256_358_650_077_3e-1,
    7.947_291_148_621_894e-1,
    1.008_710_414_337_932_6,
    1.036_093_649_726_215_6,
    1.004_787_656_533_285,
];

#[derive(Debug, Clone, Copy)]
pub struct AlpertRule {
    pub order: usize,
    /// Offsets in units of the grid spacing, applied on both sides.
    pub nodes: &'static [f64],
    pub weights: &'static [f64],
    /// Grid points closer than this many steps to the singular point are skipped.
    pub regular_start: usize,
}

impl Default for AlpertRule {
    fn default() -> Self {
        Self {
            order: 8,
            nodes: &NODES,
            weights: &WEIGHTS,
            regular_start: 5,
        }
    }
}

impl AlpertRule {
    /// Integrates `f` over one period of length 2π sampled on `n` points, where
    /// `f` may carry a log singularity at `s0` (itself a grid point).
    pub fn integrate(&self, n: usize, s0: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = 2.0 * PI / n as f64;
        let a = self.regular_start;
        let mut sum = 0.0;
        for k in a..=n - a {
            sum += f(s0 + k as f64 * h);
        }
        for (x, w) in self.nodes.iter().zip(self.weights) {
            sum += w * (f(s0 + x * h) + f(s0 - x * h));
        }
        h * sum
    }
}

/// Dense `2N × 2N` matrix of the self-interaction single layer
/// `(1/4π)∮(−log ρ I + r⊗r/ρ²) f ds`, acting on `[f_x; f_y]`.
pub fn self_single_layer_matrix(curve: &VesicleCurve, geom: &CurveGeometry) -> DMatrix<f64> {
    let rule = AlpertRule::default();
    let n = curve.n();
    let h = geom.dtheta();
    let a = rule.regular_start;
    let (x, y) = (curve.x(), curve.y());
    let w = geom.weights();
    let c = 1.0 / (4.0 * PI);
    let mut m = DMatrix::zeros(2 * n, 2 * n);

    // smooth part, trapezoid with the tangent diagonal limit
    for i in 0..n {
        for j in 0..n {
            let (rxx, rxy, ryy) = if i == j {
                let (tx, ty) = (geom.tangent_x[i], geom.tangent_y[i]);
                (tx * tx, tx * ty, ty * ty)
            } else {
                let (rx, ry) = (x[i] - x[j], y[i] - y[j]);
                let r2 = rx * rx + ry * ry;
                (rx * rx / r2, rx * ry / r2, ry * ry / r2)
            };
            let s = c * w[j];
            m[(i, j)] += s * rxx;
            m[(i, n + j)] += s * rxy;
            m[(n + i, j)] += s * rxy;
            m[(n + i, n + j)] += s * ryy;
        }
    }

    // log part: regular trapezoid points ...
    let mut logm = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for k in a..=n - a {
            let j = (i + k) % n;
            let rho = (x[i] - x[j]).hypot(y[i] - y[j]);
            logm[(i, j)] -= c * rho.ln() * w[j];
        }
    }
    // ... plus auxiliary nodes, with off-grid values from trigonometric interpolation
    for (&xm, &wm) in rule.nodes.iter().zip(rule.weights) {
        for sign in [1.0, -1.0] {
            let delta = sign * xm * h;
            let xs = spectral::shift(x, delta);
            let ys = spectral::shift(y, delta);
            let js = spectral::shift(&geom.jacobian, delta);
            let interp: Vec<f64> = (0..n)
                .map(|d| spectral::interpolation_kernel(n, delta - d as f64 * h))
                .collect();
            for i in 0..n {
                let rho = (x[i] - xs[i]).hypot(y[i] - ys[i]);
                let coef = -c * h * wm * rho.ln() * js[i];
                for j in 0..n {
                    // L(s_i + δ − s_j) depends on (j − i) mod n
                    logm[(i, j)] += coef * interp[(j + n - i) % n];
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = logm[(i, j)];
            m[(i, j)] += v;
            m[(n + i, n + j)] += v;
        }
    }
    m
}

/// Applies the self-interaction single layer to a force density `[f_x; f_y]`.
pub fn self_single_layer(curve: &VesicleCurve, density: &[f64]) -> Result<Vec<f64>> {
    let n = curve.n();
    if density.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: density.len(),
        });
    }
    let g = curve.geometry()?;
    let m = self_single_layer_matrix(curve, &g);
    Ok((m * nalgebra::DVector::from_column_slice(density))
        .as_slice()
        .to_vec())
}

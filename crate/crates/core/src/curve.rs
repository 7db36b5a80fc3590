//! Closed curves sampled at `N` points uniform in a Fourier parameter, and
//! their spectral differential geometry.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::spectral;

/// A closed curve given by `N` tracker points.
///
/// Curves built through [`VesicleCurve::new`] are validated (even `N >= 8`,
/// counter-clockwise, simple). Intermediate states inside a time step are
/// built with [`VesicleCurve::from_raw`] and validated only on acceptance.
#[derive(Debug, Clone, PartialEq)]
pub struct VesicleCurve {
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CurveGeometry {
    pub tangent_x: Vec<f64>,
    pub tangent_y: Vec<f64>,
    pub jacobian: Vec<f64>,
    pub curvature: Vec<f64>,
    /// Mean arclength spacing `L / N`.
    pub spacing: f64,
    /// Signed enclosed area (positive for counter-clockwise curves).
    pub area: f64,
    pub length: f64,
}

impl CurveGeometry {
    pub fn n(&self) -> usize {
        self.jacobian.len()
    }

    /// Parameter spacing `2π / N`.
    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n() as f64
    }

    /// Arclength quadrature weights `J_j · 2π/N`.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.dtheta();
        self.jacobian.iter().map(|j| j * h).collect()
    }

    /// Outward normal for a counter-clockwise curve: the tangent rotated clockwise.
    pub fn normal(&self, i: usize) -> [f64; 2] {
        [self.tangent_y[i], -self.tangent_x[i]]
    }

    /// `d/ds` of a scalar field using this (frozen) parameterization.
    pub fn arc_derivative(&self, f: &[f64]) -> Vec<f64> {
        spectral::derivative(f, 1)
            .into_iter()
            .zip(&self.jacobian)
            .map(|(d, j)| d / j)
            .collect()
    }
}

impl VesicleCurve {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let c = Self::from_raw(x, y)?;
        c.validate()?;
        Ok(c)
    }

    /// Builds a curve checking only the sample count.
    pub fn from_raw(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let n = x.len();
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidCurve(format!(
                "point count must be even and at least 8, got {n}"
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("non-finite coordinate".into()));
        }
        Ok(Self { x, y })
    }

    /// Checks orientation and simplicity.
    pub fn validate(&self) -> Result<()> {
        let area = self.signed_area();
        if !(area > 0.0) {
            return Err(Error::InvalidCurve(format!(
                "curve must be counter-clockwise with positive area (signed area {area:.6e})"
            )));
        }
        if !self.is_simple() {
            return Err(Error::InvalidCurve("curve self-intersects".into()));
        }
        Ok(())
    }

    /// Ellipse with semi-axes `a` (along the rotated x axis) and `b`.
    pub fn ellipse(n: usize, a: f64, b: f64, center: [f64; 2], angle: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let (x, y) = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                let (px, py) = (a * t.cos(), b * t.sin());
                (center[0] + c * px - s * py, center[1] + s * px + c * py)
            })
            .unzip();
        Self::new(x, y)
    }

    /// Star-shaped curve `r(θ)` about `center`.
    pub fn polar(n: usize, center: [f64; 2], r: impl Fn(f64) -> f64) -> Result<Self> {
        let (x, y) = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                let rr = r(t);
                (center[0] + rr * t.cos(), center[1] + rr * t.sin())
            })
            .unzip();
        Self::new(x, y)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.x[i], self.y[i]]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.x.iter().zip(&self.y).map(|(&a, &b)| [a, b]).collect()
    }

    /// Coordinates stacked as `[x_0..x_{N-1}, y_0..y_{N-1}]`.
    pub fn stacked(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        v
    }

    pub fn from_stacked(v: &[f64]) -> Result<Self> {
        let n = v.len() / 2;
        if !v.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "stacked coordinates have odd length".into(),
            ));
        }
        Self::from_raw(v[..n].to_vec(), v[n..].to_vec())
    }

    /// Same points in reverse order (flips orientation); unchecked.
    pub fn reversed(&self) -> Self {
        let n = self.n();
        let idx = |i: usize| (n - i) % n;
        Self {
            x: (0..n).map(|i| self.x[idx(i)]).collect(),
            y: (0..n).map(|i| self.y[idx(i)]).collect(),
        }
    }

    /// Shoelace area of the spectral interpolant, `½∮(x y' − y x') dθ`.
    pub fn signed_area(&self) -> f64 {
        let dx = spectral::derivative(&self.x, 1);
        let dy = spectral::derivative(&self.y, 1);
        let h = 2.0 * PI / self.n() as f64;
        0.5 * h
            * (0..self.n())
                .map(|i| self.x[i] * dy[i] - self.y[i] * dx[i])
                .sum::<f64>()
    }

    /// Area-weighted centroid of the enclosed region.
    pub fn centroid(&self) -> [f64; 2] {
        let dx = spectral::derivative(&self.x, 1);
        let dy = spectral::derivative(&self.y, 1);
        let area = self.signed_area();
        let h = 2.0 * PI / self.n() as f64;
        // ∫x dA = ½∮x² dy, ∫y dA = −½∮y² dx
        let mx: f64 = (0..self.n())
            .map(|i| 0.5 * self.x[i] * self.x[i] * dy[i])
            .sum::<f64>()
            * h;
        let my: f64 = -(0..self.n())
            .map(|i| 0.5 * self.y[i] * self.y[i] * dx[i])
            .sum::<f64>()
            * h;
        [mx / area, my / area]
    }

    /// Polygon self-intersection test over all non-adjacent segment pairs.
    pub fn is_simple(&self) -> bool {
        let n = self.n();
        for i in 0..n {
            let a = self.point(i);
            let b = self.point((i + 1) % n);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_intersect(a, b, self.point(j), self.point((j + 1) % n)) {
                    return false;
                }
            }
        }
        true
    }

    /// True if any polygon edge of `self` crosses one of `other`.
    pub fn crosses(&self, other: &VesicleCurve) -> bool {
        if !bbox_overlap(&self.bbox(), &other.bbox()) {
            return false;
        }
        let (n, m) = (self.n(), other.n());
        for i in 0..n {
            let a = self.point(i);
            let b = self.point((i + 1) % n);
            for j in 0..m {
                if segments_intersect(a, b, other.point(j), other.point((j + 1) % m)) {
                    return true;
                }
            }
        }
        false
    }

    /// True if the polygons of the two curves cross or one contains the other.
    pub fn overlaps(&self, other: &VesicleCurve) -> bool {
        if !bbox_overlap(&self.bbox(), &other.bbox()) {
            return false;
        }
        self.crosses(other)
            || self.contains_point(other.point(0))
            || other.contains_point(self.point(0))
    }

    /// Even-odd point-in-polygon test.
    pub fn contains_point(&self, p: [f64; 2]) -> bool {
        let n = self.n();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = (self.x[i], self.y[i]);
            let (xj, yj) = (self.x[j], self.y[j]);
            if (yi > p[1]) != (yj > p[1]) && p[0] < (xj - xi) * (p[1] - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    pub fn bbox(&self) -> [f64; 4] {
        let fold = |v: &[f64]| {
            v.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
                    (lo.min(t), hi.max(t))
                })
        };
        let (x0, x1) = fold(&self.x);
        let (y0, y1) = fold(&self.y);
        [x0, x1, y0, y1]
    }

    pub fn geometry(&self) -> Result<CurveGeometry> {
        let n = self.n();
        let dx = spectral::derivative(&self.x, 1);
        let dy = spectral::derivative(&self.y, 1);
        let ddx = spectral::derivative(&self.x, 2);
        let ddy = spectral::derivative(&self.y, 2);
        let h = 2.0 * PI / n as f64;
        let mut g = CurveGeometry {
            tangent_x: Vec::with_capacity(n),
            tangent_y: Vec::with_capacity(n),
            jacobian: Vec::with_capacity(n),
            curvature: Vec::with_capacity(n),
            spacing: 0.0,
            area: 0.0,
            length: 0.0,
        };
        for i in 0..n {
            let j = dx[i].hypot(dy[i]);
            if !(j > 0.0) || !j.is_finite() {
                return Err(Error::InvalidCurve(format!(
                    "degenerate parameterization: jacobian {j:.3e} at point {i}"
                )));
            }
            g.jacobian.push(j);
            g.tangent_x.push(dx[i] / j);
            g.tangent_y.push(dy[i] / j);
            g.curvature
                .push((dx[i] * ddy[i] - dy[i] * ddx[i]) / (j * j * j));
            g.area += 0.5 * (self.x[i] * dy[i] - self.y[i] * dx[i]) * h;
            g.length += j * h;
        }
        g.spacing = g.length / n as f64;
        Ok(g)
    }

    /// Band-limited refinement to `factor · N` points.
    pub fn upsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument(
                "upsampling factor must be positive".into(),
            ));
        }
        let m = self.n() * factor;
        Ok(Self {
            x: spectral::resample(&self.x, m),
            y: spectral::resample(&self.y, m),
        })
    }

    /// Fixed-format text: `N=<n>` followed by one `x y` line per point.
    pub fn to_text(&self) -> String {
        let mut s = format!("N={}\n", self.n());
        for i in 0..self.n() {
            let _ = writeln!(s, "{:.16e} {:.16e}", self.x[i], self.y[i]);
        }
        s
    }

    /// Parses [`to_text`](Self::to_text) output without orientation checks.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty curve file".into()))?;
        let n: usize = header
            .strip_prefix("N=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header line {header:?}")))?;
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for line in lines {
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => {
                    x.push(a);
                    y.push(b);
                }
                _ => return Err(Error::Parse(format!("bad point line {line:?}"))),
            }
        }
        if x.len() != n {
            return Err(Error::Parse(format!(
                "header says {n} points, found {}",
                x.len()
            )));
        }
        Self::from_raw(x, y)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let c = Self::parse_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn map_points(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let (x, y) = (0..self.n())
            .map(|i| {
                let p = f(self.point(i));
                (p[0], p[1])
            })
            .unzip();
        Self { x, y }
    }
}

fn bbox_overlap(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a[0] <= b[1] && b[0] <= a[1] && a[2] <= b[3] && b[2] <= a[3]
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize) -> VesicleCurve {
        VesicleCurve::ellipse(n, 1.0, 1.0, [0.0, 0.0], 0.0).unwrap()
    }

    /// Composite Gauss-Legendre (10 points) on `n` panels.
    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        const X: [f64; 5] = [
            0.1488743389816312,
            0.4333953941292472,
            0.6794095682990244,
            0.8650633666889845,
            0.9739065285171717,
        ];
        const W: [f64; 5] = [
            0.2955242247147529,
            0.2692667193099963,
            0.219_086_362_515_982,
            0.1494513491505806,
            0.0666713443086881,
        ];
        let h = (b - a) / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for k in 0..5 {
                s += W[k] * (f(mid - 0.5 * h * X[k]) + f(mid + 0.5 * h * X[k]));
            }
        }
        0.5 * h * s
    }

    #[test]
    fn circle_geometry() {
        let g = circle(32).geometry().unwrap();
        assert!((g.area - PI).abs() < 1e-12);
        assert!((g.length - 2.0 * PI).abs() < 1e-12);
        assert!(g.curvature.iter().all(|k| (k - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ellipse_length_against_quadrature() {
        let g = VesicleCurve::ellipse(96, 3.0, 1.0, [0.0, 0.0], 0.0)
            .unwrap()
            .geometry()
            .unwrap();
        let oracle = integrate(
            |t| (9.0 * t.sin().powi(2) + t.cos().powi(2)).sqrt(),
            0.0,
            2.0 * PI,
            64,
        );
        assert!((g.area - 3.0 * PI).abs() < 1e-12);
        assert!(
            (g.length - oracle).abs() < 1e-12,
            "{} vs {oracle}",
            g.length
        );
        assert!((oracle - 13.36489322).abs() < 1e-8);
    }

    #[test]
    fn perturbed_circle_against_oversampling() {
        let r = |t: f64| 1.0 + 0.1 * (4.0 * t).cos();
        let c = VesicleCurve::polar(64, [0.0, 0.0], r).unwrap();
        let fine = VesicleCurve::polar(640, [0.0, 0.0], r).unwrap();
        let (g, gf) = (c.geometry().unwrap(), fine.geometry().unwrap());
        assert!((g.area - gf.area).abs() < 1e-10);
        assert!((g.length - gf.length).abs() < 1e-10);
    }

    #[test]
    fn tangent_integrates_to_zero() {
        let c = VesicleCurve::polar(64, [0.3, -0.2], |t| 1.0 + 0.2 * (3.0 * t).sin()).unwrap();
        let g = c.geometry().unwrap();
        let w = g.weights();
        let sx: f64 = g.tangent_x.iter().zip(&w).map(|(a, b)| a * b).sum();
        let sy: f64 = g.tangent_y.iter().zip(&w).map(|(a, b)| a * b).sum();
        assert!(sx.abs() < 1e-12 && sy.abs() < 1e-12);
    }

    #[test]
    fn upsampling() {
        let c = circle(16).upsample(2).unwrap();
        let direct = circle(32);
        for i in 0..32 {
            assert!((c.x()[i] - direct.x()[i]).abs() < 1e-13);
            assert!((c.y()[i] - direct.y()[i]).abs() < 1e-13);
        }
        assert_eq!(circle(16).upsample(1).unwrap(), circle(16));
        let e = VesicleCurve::ellipse(48, 3.0, 1.0, [0.0, 0.0], 0.0).unwrap();
        let e4 = e.upsample(4).unwrap().geometry().unwrap();
        let d = VesicleCurve::ellipse(192, 3.0, 1.0, [0.0, 0.0], 0.0)
            .unwrap()
            .geometry()
            .unwrap();
        assert!((e4.length - d.length).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(VesicleCurve::new(vec![0.0; 7], vec![0.0; 7]).is_err());
        assert!(VesicleCurve::new(vec![0.0; 10], vec![0.0; 9]).is_err());
        assert!(circle(16).reversed().validate().is_err());
        // figure eight
        let (x, y): (Vec<f64>, Vec<f64>) = (0..32)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 32.0;
                (t.sin(), (2.0 * t).sin())
            })
            .unzip();
        assert!(VesicleCurve::new(x, y).is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = VesicleCurve::ellipse(16, 2.0, 0.5, [1.0, 2.0], 0.3).unwrap();
        let back = VesicleCurve::from_text(&c.to_text()).unwrap();
        assert_eq!(c, back);
        assert!(VesicleCurve::from_text("N=3\n0 0\n").is_err());
        assert!(VesicleCurve::from_text("M=8").is_err());
    }

    #[test]
    fn overlap_and_containment() {
        let a = circle(32);
        let b = VesicleCurve::ellipse(32, 1.0, 1.0, [1.5, 0.0], 0.0).unwrap();
        let c = VesicleCurve::ellipse(32, 1.0, 1.0, [3.0, 0.0], 0.0).unwrap();
        let d = VesicleCurve::ellipse(32, 0.2, 0.2, [0.1, 0.0], 0.0).unwrap();
        assert!(a.overlaps(&b));
        assert!(!a.overlaps(&c));
        assert!(a.overlaps(&d));
        let cen = c.centroid();
        assert!((cen[0] - 3.0).abs() < 1e-12 && cen[1].abs() < 1e-12);
    }
}

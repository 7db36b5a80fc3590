//! Solid walls: geometry, Dirichlet data, and the completed double-layer
//! representation of the wall-induced flow.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::kernels::{rotlet, stokeslet};
use super::layer::{double_layer_pv_matrix, LayerKind, LayerSource, NearParams};
use crate::curve::VesicleCurve;
use crate::error::{Error, Result};

/// Fixed wall curves with prescribed velocity samples.
///
/// Curve 0 is the outer boundary (counter-clockwise); the remaining curves
/// bound solid inclusions and are stored clockwise so that every normal
/// points out of the fluid.
#[derive(Debug, Clone)]
pub struct WallGeometry {
    curves: Vec<VesicleCurve>,
    velocity: Vec<Vec<f64>>,
}

impl WallGeometry {
    /// `outer` and `inner` are given counter-clockwise; velocities start at zero.
    pub fn new(outer: VesicleCurve, inner: Vec<VesicleCurve>) -> Result<Self> {
        outer.validate()?;
        for (k, c) in inner.iter().enumerate() {
            c.validate()?;
            if !c.points().iter().all(|&p| outer.contains_point(p)) || c.crosses(&outer) {
                return Err(Error::InvalidCurve(format!(
                    "inner wall {k} is not enclosed by the outer wall"
                )));
            }
            for (l, d) in inner.iter().enumerate().take(k) {
                if c.overlaps(d) {
                    return Err(Error::InvalidCurve(format!(
                        "inner walls {l} and {k} overlap"
                    )));
                }
            }
        }
        let mut curves = vec![outer];
        curves.extend(inner.iter().map(VesicleCurve::reversed));
        let velocity = curves.iter().map(|c| vec![0.0; 2 * c.n()]).collect();
        Ok(Self { curves, velocity })
    }

    /// Samples the boundary velocity `u(wall index, point)`.
    pub fn with_velocity(mut self, u: impl Fn(usize, [f64; 2]) -> [f64; 2]) -> Self {
        for (k, c) in self.curves.iter().enumerate() {
            let n = c.n();
            let v = &mut self.velocity[k];
            for i in 0..n {
                let ui = u(k, c.point(i));
                v[i] = ui[0];
                v[n + i] = ui[1];
            }
        }
        self
    }

    /// Curves in storage order (inner curves clockwise).
    pub fn curves(&self) -> &[VesicleCurve] {
        &self.curves
    }

    pub fn velocity(&self) -> &[Vec<f64>] {
        &self.velocity
    }

    /// Total number of wall points.
    pub fn total_points(&self) -> usize {
        self.curves.iter().map(VesicleCurve::n).sum()
    }

    /// All wall points, concatenated in storage order.
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.curves.iter().flat_map(|c| c.points()).collect()
    }

    /// True if `p` lies in the fluid region (inside the outer curve and
    /// outside every inclusion).
    pub fn in_fluid(&self, p: [f64; 2]) -> bool {
        self.curves[0].contains_point(p) && self.curves[1..].iter().all(|c| !c.contains_point(p))
    }

    /// True if the closed curve `c` lies entirely in the fluid without crossing a wall.
    pub fn encloses(&self, c: &VesicleCurve) -> bool {
        c.points().iter().all(|&p| self.in_fluid(p)) && !self.curves.iter().any(|w| c.crosses(w))
    }
}

/// Factorized completed double-layer operator for a fixed wall geometry.
#[derive(Debug)]
pub struct WallSolver {
    geometry: WallGeometry,
    sources: Vec<LayerSource>,
    pv: Vec<DMatrix<f64>>,
    centers: Vec<[f64; 2]>,
    offsets: Vec<usize>,
    matrix: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

/// Wall density and the completion coefficients it induces.
#[derive(Debug, Clone)]
pub struct WallSolution {
    pub density: Vec<f64>,
    pub stokeslets: Vec<[f64; 2]>,
    pub rotlets: Vec<f64>,
}

impl WallSolver {
    pub fn new(geometry: WallGeometry, params: NearParams) -> Result<Self> {
        let sources = geometry
            .curves
            .iter()
            .map(|c| LayerSource::new(c, params))
            .collect::<Result<Vec<_>>>()?;
        let pv: Vec<DMatrix<f64>> = sources
            .iter()
            .map(|s| double_layer_pv_matrix(&s.curve, &s.geom))
            .collect();
        let centers = geometry.curves.iter().map(VesicleCurve::centroid).collect();
        let mut offsets = vec![0];
        for c in &geometry.curves {
            offsets.push(offsets.last().unwrap() + 2 * c.n());
        }
        let mut s = Self {
            geometry,
            sources,
            pv,
            centers,
            offsets,
            matrix: DMatrix::zeros(0, 0),
            lu: DMatrix::<f64>::zeros(1, 1).lu(),
        };
        s.matrix = s.assemble()?;
        s.lu = s.matrix.clone().lu();
        if !s.lu.is_invertible() {
            return Err(Error::Singular("wall operator".into()));
        }
        Ok(s)
    }

    pub fn geometry(&self) -> &WallGeometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Wall data stacked per curve as `[u_x; u_y]`.
    pub fn boundary_data(&self) -> Vec<f64> {
        self.geometry.velocity.concat()
    }

    /// Rows `(λ_x, λ_y, ξ)` of the completion functionals for inclusion `k ≥ 1`,
    /// each acting on the full wall density.
    fn completion_rows(&self, k: usize) -> [Vec<f64>; 3] {
        let dim = self.dim();
        let src = &self.sources[k];
        let n = src.n();
        let off = self.offsets[k];
        let w = src.geom.weights();
        let c = self.centers[k];
        let (x, y) = (src.curve.x(), src.curve.y());
        let mut rows = [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]];
        for i in 0..n {
            let s = w[i] / (2.0 * PI);
            rows[0][off + i] = s;
            rows[1][off + n + i] = s;
            // η·(y − c)^⊥ with v^⊥ = (v_y, −v_x)
            rows[2][off + i] = s * (y[i] - c[1]);
            rows[2][off + n + i] = -s * (x[i] - c[0]);
        }
        rows
    }

    fn assemble(&self) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        let ncurves = self.sources.len();
        for a in 0..ncurves {
            let na = self.sources[a].n();
            let oa = self.offsets[a];
            let targets = self.sources[a].curve.points();
            for b in 0..ncurves {
                let ob = self.offsets[b];
                let nb = self.sources[b].n();
                let block = if a == b {
                    let mut blk = self.pv[a].clone();
                    for i in 0..2 * na {
                        blk[(i, i)] -= 0.5;
                    }
                    blk
                } else {
                    self.sources[b].matrix(LayerKind::Double, &targets, &self.pv[b])?
                };
                m.view_mut((oa, ob), (2 * na, 2 * nb)).copy_from(&block);
            }
        }
        // rank-one fix of the outer curve's null space: n(x) ∮ n·η ds
        let outer = &self.sources[0];
        let n0 = outer.n();
        let w = outer.geom.weights();
        for i in 0..n0 {
            let ni = outer.geom.normal(i);
            for j in 0..n0 {
                let nj = outer.geom.normal(j);
                m[(i, j)] += ni[0] * nj[0] * w[j];
                m[(i, n0 + j)] += ni[0] * nj[1] * w[j];
                m[(n0 + i, j)] += ni[1] * nj[0] * w[j];
                m[(n0 + i, n0 + j)] += ni[1] * nj[1] * w[j];
            }
        }
        let points = self.geometry.points();
        let completion = self.completion_matrix(&points);
        // completion_matrix rows are [all x; all y]; remap into per-curve blocks
        let blocked = self.reorder_rows(&completion);
        m += blocked;
        Ok(m)
    }

    /// `2T × dim` matrix of the Stokeslet/rotlet completion at `targets`.
    fn completion_matrix(&self, targets: &[[f64; 2]]) -> DMatrix<f64> {
        let t = targets.len();
        let mut m = DMatrix::zeros(2 * t, self.dim());
        for k in 1..self.sources.len() {
            let [lx, ly, xi] = self.completion_rows(k);
            let c = self.centers[k];
            for (i, p) in targets.iter().enumerate() {
                let r = [p[0] - c[0], p[1] - c[1]];
                let g = stokeslet(r);
                let rot = rotlet(r);
                for col in 0..self.dim() {
                    let v = [lx[col], ly[col], xi[col]];
                    if v == [0.0; 3] {
                        continue;
                    }
                    m[(i, col)] += g[0][0] * v[0] + g[0][1] * v[1] + rot[0] * v[2];
                    m[(t + i, col)] += g[1][0] * v[0] + g[1][1] * v[1] + rot[1] * v[2];
                }
            }
        }
        m
    }

    /// Converts rows ordered `[x of all points; y of all points]` into the
    /// per-curve `[x; y]` blocks used for wall unknowns.
    fn reorder_rows(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let t = m.nrows() / 2;
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        let mut g = 0;
        for (k, src) in self.sources.iter().enumerate() {
            let n = src.n();
            let o = self.offsets[k];
            for i in 0..n {
                out.row_mut(o + i).copy_from(&m.row(g + i));
                out.row_mut(o + n + i).copy_from(&m.row(t + g + i));
            }
            g += n;
        }
        out
    }

    /// Applies the completed operator (as used for the boundary equation).
    pub fn apply(&self, density: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(density))
            .as_slice()
            .to_vec()
    }

    /// Solves `W η = rhs` with the stored factorization.
    pub fn solve_density(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.len(),
            });
        }
        self.lu
            .solve(&DVector::from_column_slice(rhs))
            .map(|v| v.as_slice().to_vec())
            .ok_or_else(|| Error::Singular("wall operator".into()))
    }

    /// Solves for the density whose flow, added to `vesicle_velocity` on the
    /// walls, meets the prescribed boundary velocity.
    pub fn solve(&self, vesicle_velocity: Option<&[f64]>) -> Result<WallSolution> {
        let mut rhs = self.boundary_data();
        if let Some(v) = vesicle_velocity {
            if v.len() != rhs.len() {
                return Err(Error::DimensionMismatch {
                    expected: rhs.len(),
                    got: v.len(),
                });
            }
            rhs.iter_mut().zip(v).for_each(|(r, u)| *r -= u);
        }
        let density = self.solve_density(&rhs)?;
        let mut stokeslets = Vec::new();
        let mut rotlets = Vec::new();
        for k in 1..self.sources.len() {
            let [lx, ly, xi] = self.completion_rows(k);
            let d = |r: &[f64]| r.iter().zip(&density).map(|(a, b)| a * b).sum::<f64>();
            stokeslets.push([d(&lx), d(&ly)]);
            rotlets.push(d(&xi));
        }
        Ok(WallSolution {
            density,
            stokeslets,
            rotlets,
        })
    }

    /// `2T × dim` matrix mapping the wall density to the velocity at targets
    /// in the fluid (rows `[u_x of all targets; u_y of all targets]`).
    pub fn velocity_matrix(&self, targets: &[[f64; 2]]) -> Result<DMatrix<f64>> {
        let t = targets.len();
        let mut m = self.completion_matrix(targets);
        for (k, src) in self.sources.iter().enumerate() {
            let o = self.offsets[k];
            let n = src.n();
            let blk = src.matrix(LayerKind::Double, targets, &self.pv[k])?;
            let mut view = m.view_mut((0, o), (2 * t, 2 * n));
            view += blk;
        }
        Ok(m)
    }

    pub fn velocity(&self, density: &[f64], targets: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        if density.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: density.len(),
            });
        }
        let m = self.velocity_matrix(targets)?;
        let v = m * DVector::from_column_slice(density);
        let t = targets.len();
        Ok((0..t).map(|i| [v[i], v[t + i]]).collect())
    }

    /// Wall points in storage order.
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.geometry.points()
    }

    /// Converts a `2T`-row block laid out `[x of all wall points; y ...]`
    /// into the per-curve wall unknown layout.
    pub fn to_wall_layout(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.reorder_rows(m)
    }

    /// Inverse of [`to_wall_layout`](Self::to_wall_layout) for column blocks:
    /// maps per-curve wall unknowns to `[x of all; y of all]`.
    pub fn split_xy(&self, v: &[f64]) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.geometry.total_points());
        for (k, src) in self.sources.iter().enumerate() {
            let n = src.n();
            let o = self.offsets[k];
            for i in 0..n {
                out.push([v[o + i], v[o + n + i]]);
            }
        }
        out
    }
}

/// Evaluates the double layer of `density` on a single closed curve at
/// `targets`. Targets on the curve itself (within 1e-12 of a sample) get the
/// principal value; others are treated as off-surface.
pub fn wall_double_layer(
    wall: &WallGeometry,
    density: &[f64],
    targets: &[[f64; 2]],
    params: NearParams,
) -> Result<Vec<[f64; 2]>> {
    let total = 2 * wall.total_points();
    if density.len() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: density.len(),
        });
    }
    let mut out = vec![[0.0; 2]; targets.len()];
    let mut off = 0;
    for c in wall.curves() {
        let n = c.n();
        let src = LayerSource::new(c, params)?;
        let pv = double_layer_pv_matrix(c, &src.geom);
        let dens = &density[off..off + 2 * n];
        for (t, p) in targets.iter().enumerate() {
            let on = (0..n).find(|&i| {
                let q = c.point(i);
                (q[0] - p[0]).hypot(q[1] - p[1]) < 1e-12 * src.geom.length
            });
            let v = match on {
                Some(i) => {
                    let rx = pv.row(i);
                    let ry = pv.row(n + i);
                    [
                        rx.iter().zip(dens).map(|(a, b)| a * b).sum(),
                        ry.iter().zip(dens).map(|(a, b)| a * b).sum(),
                    ]
                }
                None => src.eval(LayerKind::Double, dens, &[*p], &pv)?[0],
            };
            out[t][0] += v[0];
            out[t][1] += v[1];
        }
        off += 2 * n;
    }
    Ok(out)
}

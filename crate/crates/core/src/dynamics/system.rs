//! Operators frozen at one configuration and the coupled implicit system in
//! positions, tensions and (if confined) the wall density.
//!
//! Unknown layout: per vesicle `[x (N); y (N); σ (N)]`, vesicles consecutive,
//! wall density last.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, DVectorView};

use super::flow::BackgroundFlow;
use super::operators::{bending, surface_div, tension_op};
use super::state::SuspensionState;
use crate::curve::{CurveGeometry, VesicleCurve};
use crate::error::{Error, Result};
use crate::potentials::{self_single_layer_matrix, LayerKind, LayerSource, NearParams, WallSolver};

#[derive(Debug)]
struct FrozenWall {
    solver: Arc<WallSolver>,
    /// Vesicle single layers evaluated on the walls, in wall layout.
    from_vesicles: Vec<DMatrix<f64>>,
    /// Wall-induced velocity at the vesicle points.
    to_vesicles: Vec<DMatrix<f64>>,
}

/// All layer-potential and interfacial operators linearized at one
/// configuration.
#[derive(Debug)]
pub struct FrozenConfig {
    pub curves: Vec<VesicleCurve>,
    pub geoms: Vec<CurveGeometry>,
    pub self_sl: Vec<DMatrix<f64>>,
    cross: Vec<Vec<Option<DMatrix<f64>>>>,
    wall: Option<FrozenWall>,
    far_field: Vec<Vec<f64>>,
    offsets: Vec<usize>,
}

/// Block views of a vector in the unknown layout.
pub struct Parts {
    pub positions: Vec<Vec<f64>>,
    pub tensions: Vec<Vec<f64>>,
    pub wall: Option<Vec<f64>>,
}

fn matvec(m: &DMatrix<f64>, x: &[f64]) -> DVector<f64> {
    m * DVectorView::from_slice(x, x.len())
}

fn add_into(acc: &mut [f64], v: &DVector<f64>) {
    acc.iter_mut().zip(v.iter()).for_each(|(a, b)| *a += b);
}

impl FrozenConfig {
    pub fn new(curves: &[VesicleCurve], flow: &BackgroundFlow, params: NearParams) -> Result<Self> {
        let geoms = curves
            .iter()
            .map(|c| c.geometry())
            .collect::<Result<Vec<_>>>()?;
        let self_sl: Vec<DMatrix<f64>> = curves
            .iter()
            .zip(&geoms)
            .map(|(c, g)| self_single_layer_matrix(c, g))
            .collect();
        let m = curves.len();
        let sources = if m > 1 || flow.wall().is_some() {
            curves
                .iter()
                .map(|c| LayerSource::new(c, params))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let mut cross = vec![vec![None; m]; m];
        for j in 0..m {
            let targets = curves[j].points();
            for k in 0..m {
                if j != k {
                    cross[j][k] =
                        Some(sources[k].matrix(LayerKind::Single, &targets, &self_sl[k])?);
                }
            }
        }
        let wall = match flow.wall() {
            Some(_) => {
                let solver = match flow {
                    BackgroundFlow::Confined(s) => s.clone(),
                    _ => unreachable!(),
                };
                let wall_pts = solver.points();
                let from_vesicles = sources
                    .iter()
                    .zip(&self_sl)
                    .map(|(s, sl)| {
                        s.matrix(LayerKind::Single, &wall_pts, sl)
                            .map(|mat| solver.to_wall_layout(&mat))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let to_vesicles = curves
                    .iter()
                    .map(|c| solver.velocity_matrix(&c.points()))
                    .collect::<Result<Vec<_>>>()?;
                Some(FrozenWall {
                    solver,
                    from_vesicles,
                    to_vesicles,
                })
            }
            None => None,
        };
        let far_field = curves
            .iter()
            .map(|c| flow.far_field_on(c.x(), c.y()))
            .collect();
        let mut offsets = vec![0];
        for c in curves {
            offsets.push(offsets.last().unwrap() + 3 * c.n());
        }
        Ok(Self {
            curves: curves.to_vec(),
            geoms,
            self_sl,
            cross,
            wall,
            far_field,
            offsets,
        })
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn wall_solver(&self) -> Option<&Arc<WallSolver>> {
        self.wall.as_ref().map(|w| &w.solver)
    }

    pub fn wall_dim(&self) -> usize {
        self.wall.as_ref().map_or(0, |w| w.solver.dim())
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.len()] + self.wall_dim()
    }

    /// Offset of vesicle `j`'s block in the unknown layout.
    pub fn offset(&self, j: usize) -> usize {
        self.offsets[j]
    }

    /// Far-field velocity at the frozen points of vesicle `j`.
    pub fn far_field(&self, j: usize) -> &[f64] {
        &self.far_field[j]
    }

    pub fn split(&self, u: &[f64]) -> Parts {
        let mut positions = Vec::with_capacity(self.len());
        let mut tensions = Vec::with_capacity(self.len());
        for j in 0..self.len() {
            let n = self.curves[j].n();
            let o = self.offsets[j];
            positions.push(u[o..o + 2 * n].to_vec());
            tensions.push(u[o + 2 * n..o + 3 * n].to_vec());
        }
        let wall = self
            .wall
            .as_ref()
            .map(|_| u[self.offsets[self.len()]..].to_vec());
        Parts {
            positions,
            tensions,
            wall,
        }
    }

    pub fn pack(
        &self,
        positions: &[Vec<f64>],
        tensions: &[Vec<f64>],
        wall: Option<&[f64]>,
    ) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.dim());
        for (x, s) in positions.iter().zip(tensions) {
            u.extend_from_slice(x);
            u.extend_from_slice(s);
        }
        if self.wall.is_some() {
            match wall {
                Some(w) => u.extend_from_slice(w),
                None => u.extend(std::iter::repeat_n(0.0, self.wall_dim())),
            }
        }
        u
    }

    /// Membrane force `−B x + T σ` of vesicle `j`.
    pub fn force(&self, j: usize, x: &[f64], sigma: &[f64]) -> Vec<f64> {
        let g = &self.geoms[j];
        let b = bending(g, x);
        let t = tension_op(g, sigma);
        t.iter().zip(&b).map(|(t, b)| t - b).collect()
    }

    /// Velocities induced at every vesicle by membrane forces and wall
    /// density (no far field), plus the wall-equation rows `Wη + Σ S_Γk f_k`.
    pub fn induced(
        &self,
        positions: &[Vec<f64>],
        tensions: &[Vec<f64>],
        wall: Option<&[f64]>,
    ) -> (Vec<Vec<f64>>, Option<Vec<f64>>) {
        let m = self.len();
        let forces: Vec<Vec<f64>> = (0..m)
            .map(|k| self.force(k, &positions[k], &tensions[k]))
            .collect();
        let mut vel: Vec<Vec<f64>> = Vec::with_capacity(m);
        for j in 0..m {
            let mut u = matvec(&self.self_sl[j], &forces[j]).as_slice().to_vec();
            for k in 0..m {
                if let Some(c) = &self.cross[j][k] {
                    add_into(&mut u, &matvec(c, &forces[k]));
                }
            }
            if let (Some(w), Some(eta)) = (&self.wall, wall) {
                add_into(&mut u, &matvec(&w.to_vesicles[j], eta));
            }
            vel.push(u);
        }
        let rows = self.wall.as_ref().map(|w| {
            let zero;
            let eta = match wall {
                Some(e) => e,
                None => {
                    zero = vec![0.0; w.solver.dim()];
                    &zero
                }
            };
            let mut r = w.solver.apply(eta);
            for k in 0..m {
                add_into(&mut r, &matvec(&w.from_vesicles[k], &forces[k]));
            }
            r
        });
        (vel, rows)
    }

    /// Implicit operator with step factor `c`:
    /// x-rows `X − c U`, σ-rows `Div U`, wall rows `Wη + Σ S_Γk f_k`.
    pub fn apply(&self, u: &[f64], c: f64) -> Vec<f64> {
        let p = self.split(u);
        let (vel, rows) = self.induced(&p.positions, &p.tensions, p.wall.as_deref());
        let mut out = Vec::with_capacity(u.len());
        for j in 0..self.len() {
            out.extend(p.positions[j].iter().zip(&vel[j]).map(|(x, v)| x - c * v));
            out.extend(surface_div(&self.geoms[j], &vel[j]));
        }
        if let Some(r) = rows {
            out.extend(r);
        }
        out
    }

    /// Full velocity `v∞ + U` of every vesicle for the given state, with all
    /// operators taken from this configuration.
    pub fn velocity(&self, state: &SuspensionState) -> Result<Vec<Vec<f64>>> {
        self.check_state(state)?;
        let positions: Vec<Vec<f64>> = state.vesicles.iter().map(VesicleCurve::stacked).collect();
        let (mut vel, _) = self.induced(&positions, &state.tensions, state.wall_density.as_deref());
        for (v, f) in vel.iter_mut().zip(&self.far_field) {
            v.iter_mut().zip(f).for_each(|(a, b)| *a += b);
        }
        Ok(vel)
    }

    /// Residual of the wall equation `Wη + Σ S_Γk f_k − U` for a state.
    pub fn wall_defect(&self, state: &SuspensionState) -> Result<Option<Vec<f64>>> {
        self.check_state(state)?;
        let Some(w) = &self.wall else {
            return Ok(None);
        };
        let positions: Vec<Vec<f64>> = state.vesicles.iter().map(VesicleCurve::stacked).collect();
        let (_, rows) = self.induced(&positions, &state.tensions, state.wall_density.as_deref());
        let mut r = rows.unwrap_or_default();
        r.iter_mut()
            .zip(w.solver.boundary_data())
            .for_each(|(a, b)| *a -= b);
        Ok(Some(r))
    }

    fn check_state(&self, state: &SuspensionState) -> Result<()> {
        if state.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: state.len(),
            });
        }
        for (v, c) in state.vesicles.iter().zip(&self.curves) {
            if v.n() != c.n() {
                return Err(Error::DimensionMismatch {
                    expected: c.n(),
                    got: v.n(),
                });
            }
        }
        Ok(())
    }
}

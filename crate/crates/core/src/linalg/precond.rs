use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::dynamics::operators::operator_matrices;
use crate::dynamics::FrozenConfig;
use crate::error::{Error, Result};
use crate::potentials::WallSolver;

/// Block-diagonal preconditioner: one dense LU of the self-interaction
/// implicit block per vesicle, plus the wall operator when confined.
#[derive(Debug)]
pub struct BlockPreconditioner {
    blocks: Vec<LU<f64, Dyn, Dyn>>,
    offsets: Vec<usize>,
    wall: Option<Arc<WallSolver>>,
    /// Lobatto node at which the blocks were frozen.
    pub formed_at: usize,
    /// Step factor `c` the blocks were formed with.
    pub factor: f64,
}

/// Dense single-vesicle implicit block
/// `[[I + c S B, −c S T], [−Div S B, Div S T]]`.
pub fn vesicle_block(frozen: &FrozenConfig, j: usize, c: f64) -> DMatrix<f64> {
    let g = &frozen.geoms[j];
    let n = g.n();
    let s = &frozen.self_sl[j];
    let (b, t, div) = operator_matrices(g);
    let sb = s * &b;
    let st = s * &t;
    let mut m = DMatrix::zeros(3 * n, 3 * n);
    let mut xx = &sb * c;
    for i in 0..2 * n {
        xx[(i, i)] += 1.0;
    }
    m.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&xx);
    m.view_mut((0, 2 * n), (2 * n, n)).copy_from(&(&st * -c));
    m.view_mut((2 * n, 0), (n, 2 * n))
        .copy_from(&(&div * &sb * -1.0));
    m.view_mut((2 * n, 2 * n), (n, n)).copy_from(&(&div * &st));
    m
}

impl BlockPreconditioner {
    /// Forms and factorizes all blocks at configuration `frozen` with step
    /// factor `c = Δt/β`.
    pub fn new(frozen: &FrozenConfig, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "step factor must be positive, got {c}"
            )));
        }
        let mut blocks = Vec::with_capacity(frozen.len());
        let mut offsets = Vec::with_capacity(frozen.len() + 1);
        for j in 0..frozen.len() {
            offsets.push(frozen.offset(j));
            let lu = vesicle_block(frozen, j, c).lu();
            if !lu.is_invertible() {
                return Err(Error::Singular(format!(
                    "preconditioner block of vesicle {j}"
                )));
            }
            blocks.push(lu);
        }
        offsets.push(frozen.dim() - frozen.wall_dim());
        Ok(Self {
            blocks,
            offsets,
            wall: frozen.wall_solver().cloned(),
            formed_at: 0,
            factor: c,
        })
    }

    pub fn dim(&self) -> usize {
        self.offsets.last().unwrap() + self.wall.as_ref().map_or(0, |w| w.dim())
    }

    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: r.len(),
            });
        }
        let mut out = Vec::with_capacity(r.len());
        for (j, lu) in self.blocks.iter().enumerate() {
            let seg = DVector::from_column_slice(&r[self.offsets[j]..self.offsets[j + 1]]);
            let z = lu
                .solve(&seg)
                .ok_or_else(|| Error::Singular(format!("preconditioner block of vesicle {j}")))?;
            out.extend_from_slice(z.as_slice());
        }
        if let Some(w) = &self.wall {
            out.extend(w.solve_density(&r[*self.offsets.last().unwrap()..])?);
        }
        Ok(out)
    }
}

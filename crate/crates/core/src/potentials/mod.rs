//! Stokes layer potentials on closed curves.

pub mod alpert;
pub mod kernels;
pub mod layer;
pub mod wall;

pub use alpert::{self_single_layer, self_single_layer_matrix, AlpertRule};
pub use layer::{double_layer_pv_matrix, LayerKind, LayerSource, NearParams};
pub use wall::{wall_double_layer, WallGeometry, WallSolution, WallSolver};

use crate::curve::VesicleCurve;
use crate::error::Result;

/// Trapezoid single layer of `source` at targets outside its near zone.
pub fn cross_single_layer(
    source: &VesicleCurve,
    density: &[f64],
    targets: &[[f64; 2]],
    params: NearParams,
) -> Result<Vec<[f64; 2]>> {
    LayerSource::new(source, params)?.far_eval(LayerKind::Single, density, targets)
}

/// Single layer of `source` at arbitrary off-surface targets; targets in the
/// near zone are handled by interpolation along the normal ray between the
/// on-surface value and upsampled-trapezoid values.
pub fn near_singular_eval(
    source: &VesicleCurve,
    density: &[f64],
    targets: &[[f64; 2]],
    params: NearParams,
) -> Result<Vec<[f64; 2]>> {
    let src = LayerSource::new(source, params)?;
    let on_curve = self_single_layer_matrix(source, &src.geom);
    src.eval(LayerKind::Single, density, targets, &on_curve)
}

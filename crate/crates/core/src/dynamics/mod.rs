//! Membrane operators, background flows, and the frozen implicit system.

pub mod flow;
pub mod operators;
pub mod state;
pub mod system;

pub use flow::BackgroundFlow;
pub use operators::{bending, surface_div, tension_op};
pub use state::SuspensionState;
pub use system::{FrozenConfig, Parts};

use crate::error::Result;
use crate::potentials::NearParams;

/// Velocity `v_j = v∞(x_j) + Σ_k S_jk(−B_k x_k + T_k σ_k) (+ wall term)` of
/// every vesicle in `state`, with operators linearized at `frozen`.
pub fn velocity(
    state: &SuspensionState,
    flow: &BackgroundFlow,
    frozen: &SuspensionState,
    params: NearParams,
) -> Result<Vec<Vec<f64>>> {
    FrozenConfig::new(&frozen.vesicles, flow, params)?.velocity(state)
}

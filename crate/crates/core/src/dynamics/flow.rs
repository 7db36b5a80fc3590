use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potentials::WallSolver;

/// Imposed flow: a far-field velocity for unbounded suspensions, or solid
/// walls with Dirichlet data.
#[derive(Debug, Clone)]
pub enum BackgroundFlow {
    None,
    /// `v∞ = (rate · y, 0)`
    Shear {
        rate: f64,
    },
    /// `v∞ = rate · (−x, y)`
    Extensional {
        rate: f64,
    },
    Confined(Arc<WallSolver>),
}

impl BackgroundFlow {
    pub fn far_field(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            BackgroundFlow::None | BackgroundFlow::Confined(_) => [0.0, 0.0],
            BackgroundFlow::Shear { rate } => [rate * p[1], 0.0],
            BackgroundFlow::Extensional { rate } => [-rate * p[0], rate * p[1]],
        }
    }

    pub fn wall(&self) -> Option<&WallSolver> {
        match self {
            BackgroundFlow::Confined(w) => Some(w),
            _ => None,
        }
    }

    /// Far-field velocity at all points of a curve, stacked `[u_x; u_y]`.
    pub fn far_field_on(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut v = vec![0.0; 2 * n];
        if matches!(self, BackgroundFlow::None | BackgroundFlow::Confined(_)) {
            return v;
        }
        for i in 0..n {
            let u = self.far_field([x[i], y[i]]);
            v[i] = u[0];
            v[n + i] = u[1];
        }
        v
    }

    pub fn check(&self) -> Result<()> {
        match self {
            BackgroundFlow::Shear { rate } | BackgroundFlow::Extensional { rate }
                if !rate.is_finite() =>
            {
                Err(Error::Config("flow rate must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

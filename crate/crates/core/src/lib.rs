//! Boundary-integral simulation of inextensible vesicles in two-dimensional
//! Stokes flow, with IMEX, BDF2 and spectral-deferred-correction time stepping
//! and area/length-driven adaptive step control.

pub mod adaptive;
pub mod curve;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod potentials;
pub mod run;
pub mod sdc;
pub mod spectral;
pub mod stepper;

pub use curve::{CurveGeometry, VesicleCurve};
pub use error::{Error, Result};

//! Distance-to-boundary estimation on node-centred binary images.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar for the common cases.

pub mod conv;
pub mod edt;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod io;
pub mod metrics;
#[cfg(test)]
mod oracle;
pub mod pipeline;
pub mod poisson;
pub mod scalar;
pub mod shapes;

pub use conv::{blend_weights, conv_estimates, logconv, softmin, BlendConfig, ConvEstimates, ConvOptions};
pub use edt::{edt, EdtMethod};
pub use error::{Error, Result};
pub use estimators::{estimate, normalize_gradient, Estimate, EstimatorKind, NormalizationScheme};
pub use grid::{extract_boundary, BinaryMask, BoundarySet, NodeKind, ScalarField, VectorField};
pub use metrics::{error_l2, error_linf, ErrorReport, Flags};
pub use pipeline::{evaluate, run_method, Method, MethodRun, RunParams};
pub use poisson::{solve_bundle, PdeBundle, SolveOptions, SolverConfig};
pub use scalar::Real;
pub use shapes::{make_shape, ShapeKind, ShapeSpec};

pub type ScalarField64 = ScalarField<f64>;
pub type ScalarField32 = ScalarField<f32>;
pub type PdeBundle64 = PdeBundle<f64>;
pub type PdeBundle32 = PdeBundle<f32>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type BoundarySet64 = BoundarySet<f64>;
pub type BoundarySet32 = BoundarySet<f32>;

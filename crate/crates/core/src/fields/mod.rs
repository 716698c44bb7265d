//! Grids, densities, vector fields and the regularized attraction kernel.

mod convolution;
mod density;
mod grid;
pub mod io;
mod kernel;
pub mod stencil;
mod vector;

use thiserror::Error;

pub use convolution::{attraction_velocity, ConvolutionMethod, ConvolutionOperator};
pub use density::{discretize, DensityField, Profile};
pub use grid::Grid;
pub use kernel::KernelSpec;
pub use vector::{gradient, VectorField};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("unsupported grid dimension {d} (only 1 and 2)")]
    UnsupportedDimension { d: usize },
    #[error("grid needs at least 8 cells per axis, got {n}")]
    TooFewCells { n: usize },
    #[error("grid half-width must be positive and finite, got {half_width}")]
    NonPositiveWidth { half_width: f64 },
    #[error("profile mass must be positive, got {mass}")]
    NonPositiveMass { mass: f64 },
    #[error("field has zero mass")]
    ZeroMass,
    #[error("invalid density value {value} at cell {index}")]
    InvalidValue { index: usize, value: f64 },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("kernel exponent must lie in (0, {d}), got {alpha}")]
    KernelExponent { d: usize, alpha: f64 },
    #[error("regularization radius must be nonnegative and finite, got {eps}")]
    KernelRadius { eps: f64 },
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

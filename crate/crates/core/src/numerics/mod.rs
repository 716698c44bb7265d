//! Numerical building blocks: special functions, adaptive quadrature,
//! scalar root finding and reproducible summation.

pub mod gamma;
pub mod quadrature;
pub mod roots;
pub mod sum;

pub use gamma::{gamma, ln_gamma, unit_sphere_area};
pub use quadrature::{Quadrature, QuadratureError, QuadEstimate};
pub use roots::{bisect, golden_section_max, RootError};
pub use sum::pairwise_sum;

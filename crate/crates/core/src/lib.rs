//! Simulation and verification toolkit for the p-Laplacian
//! aggregation-diffusion equation
//!
//! ```text
//! ∂t ρ = div(|∇ρ|^{p-2} ∇ρ) + λ div((K_α * ρ) ρ),   K_α(x) = x |x|^{-α}
//! ```
//!
//! Everything numerical is generic over [`scalar::Scalar`] (`f32`, `f64`);
//! exponent arithmetic in [`regime`] also accepts exact rationals. The
//! aliases below fix the common concrete types.

pub mod config;
pub mod constants;
pub mod fields;
pub mod functionals;
pub mod numerics;
pub mod regime;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod suites;
pub mod sweep;

pub use num_rational::Rational64 as Rational;

pub type Field = fields::DensityField<f64>;
pub type Field32 = fields::DensityField<f32>;
pub type Params = regime::RegimeParams<f64>;
pub type ExactParams = regime::RegimeParams<Rational>;
pub type Config = solver::SolverConfig<f64>;
pub type Trajectory = solver::Trajectory<f64>;

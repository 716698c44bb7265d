//! Lyapunov functionals and diagnostic integrals of a density field.
//!
//! All sums go through [`pairwise_sum`], so results do not depend on thread
//! count or evaluation order.

mod checks;
mod report;

use thiserror::Error;

use crate::constants::ConstantError;
use crate::fields::stencil::{face_gradient, has_face, p_flux};
use crate::fields::{ConvolutionMethod, ConvolutionOperator, DensityField, FieldError, Grid, KernelSpec};
use crate::numerics::{bisect, pairwise_sum, unit_sphere_area, Quadrature};
use crate::scalar::Scalar;

pub use checks::{
    check_gns, check_moment_lemma, entropy_lower_bound_check, moment_lemma, moment_lemma_window,
    EntropyBound, Inequality,
};
pub use report::FunctionalReport;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("moment exponent must be positive, got {k}")]
    MomentExponent { k: f64 },
    #[error("k = {k} outside the admissible window {window} for p = {p}")]
    MomentWindow { k: f64, p: f64, window: String },
    #[error("q = {q} outside [1, {r}]")]
    GnsExponent { q: f64, r: f64 },
    #[error("no Sobolev embedding for d = {d}, p = {p} (needs p < d)")]
    NoSobolevEmbedding { d: u32, p: f64 },
    #[error("weight ⟨x⟩^{beta} is not integrable in dimension {d}")]
    WeightNotIntegrable { d: u32, beta: f64 },
    #[error("numerical evaluation failed: {0}")]
    Numerics(String),
    #[error(transparent)]
    Constant(#[from] ConstantError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `⟨x⟩ = (1 + |x|²)^{1/2}`
#[inline]
pub fn bracket<T: Scalar>(x: [T; 2]) -> T {
    (T::one() + x[0] * x[0] + x[1] * x[1]).sqrt()
}

fn cell_sum<T: Scalar>(grid: &Grid<T>, terms: impl Iterator<Item = T>) -> T {
    let v: Vec<T> = terms.collect();
    pairwise_sum(&v) * grid.cell_volume()
}

/// `∫ρ ln ρ` with `0 ln 0 = 0`.
pub fn entropy<T: Scalar>(field: &DensityField<T>) -> T {
    cell_sum(
        field.grid(),
        field
            .values()
            .iter()
            .map(|&r| if r > T::zero() { r * r.ln() } else { T::zero() }),
    )
}

/// `I_p = (p')^p ∫|∇ρ^{1/p'}|^p`, from face differences of `ρ^{1/p'}`. In 2D
/// each face carries the full gradient length, so the two face families are
/// averaged.
pub fn p_fisher<T: Scalar>(field: &DensityField<T>, p: T) -> T {
    let grid = field.grid();
    let p_conj = p / (p - T::one());
    let u: Vec<T> = field.values().iter().map(|r| r.powf(T::one() / p_conj)).collect();
    let fg = face_gradient(&u, grid);
    let per_axis: Vec<T> = (0..grid.dim())
        .map(|a| cell_sum(grid, fg.magnitude[a].iter().map(|g| g.powf(p))))
        .collect();
    p_conj.powf(p) * pairwise_sum(&per_axis) / T::from_usize_(grid.dim())
}

/// `Σ_faces φ_δ(|G|) G_n (ln ρ_{c+s} - ln ρ_c)/dx dx^d`: the entropy
/// dissipation of the discrete p-Laplacian flux. Faces touching an empty cell
/// are skipped.
pub fn fisher_dissipation<T: Scalar>(field: &DensityField<T>, p: T, delta: T) -> T {
    let grid = field.grid();
    let rho = field.values();
    let fg = face_gradient(rho, grid);
    let inv_dx = T::one() / grid.dx();
    let per_axis: Vec<T> = (0..grid.dim())
        .map(|a| {
            let s = grid.stride(a);
            cell_sum(
                grid,
                (0..grid.len()).map(|c| {
                    if !has_face(grid, c, a) || !(rho[c] > T::zero() && rho[c + s] > T::zero()) {
                        return T::zero();
                    }
                    let flux = p_flux(fg.normal[a][c], fg.magnitude[a][c], p, delta);
                    flux * (rho[c + s].ln() - rho[c].ln()) * inv_dx
                }),
            )
        })
        .collect();
    pairwise_sum(&per_axis)
}

/// `∫ρ ⟨x⟩^k`
pub fn moment<T: Scalar>(field: &DensityField<T>, k: T) -> T {
    let grid = field.grid();
    cell_sum(
        grid,
        field
            .values()
            .iter()
            .enumerate()
            .map(|(c, &r)| r * bracket(grid.center(c)).powf(k)),
    )
}

/// `‖ρ‖_{L^q}`
pub fn lq_norm<T: Scalar>(field: &DensityField<T>, q: T) -> T {
    cell_sum(field.grid(), field.values().iter().map(|r| r.powf(q))).powf(T::one() / q)
}

/// `Σ_i ρ_i (w ∗ ρ)_i dx^d` for the weight of `op`.
pub fn quadratic_form<T: Scalar>(field: &DensityField<T>, op: &ConvolutionOperator<T>, method: ConvolutionMethod) -> T {
    let conv = op.apply(field.values(), method);
    cell_sum(field.grid(), field.values().iter().zip(&conv).map(|(&r, &w)| r * w))
}

/// `∬ρ(x)ρ(y)|x-y|^{-α}` as a double sum over cells; the self-interaction
/// of a cell uses `|x - y| = ε`.
pub fn interaction_energy<T: Scalar>(
    field: &DensityField<T>,
    kernel: &KernelSpec<T>,
    method: ConvolutionMethod,
) -> Result<T, FunctionalError> {
    let grid = *field.grid();
    kernel.check_dimension(grid.dim())?;
    let op = ConvolutionOperator::new(grid, kernel.interaction_table(&grid))?;
    Ok(quadratic_form(field, &op, method))
}

/// `∫ρ (div K^ε ∗ ρ)` with cell-averaged `div K^ε`: the aggregation
/// contribution to the entropy rate, per unit `λ`.
pub fn aggregation_production<T: Scalar>(
    field: &DensityField<T>,
    kernel: &KernelSpec<T>,
    method: ConvolutionMethod,
) -> Result<T, FunctionalError> {
    let grid = *field.grid();
    kernel.check_dimension(grid.dim())?;
    let op = ConvolutionOperator::new(grid, kernel.divergence_table(&grid))?;
    Ok(quadratic_form(field, &op, method))
}

fn radial_quadrature() -> Quadrature<f64> {
    Quadrature::new(1e-300, 1e-12).with_max_intervals(20_000)
}

/// `∫_{R^d} e^{-ν⟨x⟩^k} dx`
pub fn exp_moment_integral(d: u32, k: f64, nu: f64) -> Result<f64, FunctionalError> {
    let scale = (1.0 / nu).powf(1.0 / k).max(1.0);
    let v = radial_quadrature()
        .integrate_radial(
            |r| (-nu * (1.0 + r * r).powf(0.5 * k)).exp() * r.powi(d as i32 - 1),
            scale,
        )
        .map_err(|e| FunctionalError::Numerics(e.to_string()))?
        .value;
    Ok(unit_sphere_area::<f64>(d) * v)
}

/// The `ν_k > 0` with `∫ e^{-ν_k ⟨x⟩^k} dx = 1`.
pub fn nu_k(d: u32, k: f64) -> Result<f64, FunctionalError> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(FunctionalError::MomentExponent { k });
    }
    let f = |nu: f64| exp_moment_integral(d, k, nu).map(|v| v - 1.0);
    let mut hi = 1.0;
    while f(hi)? > 0.0 {
        hi *= 2.0;
    }
    let mut lo = hi;
    while f(lo)? < 0.0 {
        lo *= 0.5;
    }
    bisect(f, lo, hi, 1e-12).map_err(|e| FunctionalError::Numerics(e.to_string()))
}

/// `∫_{R^d} ⟨x⟩^β dx` for `β < -d`.
pub fn bracket_power_integral(d: u32, beta: f64) -> Result<f64, FunctionalError> {
    if !(beta < -(d as f64)) {
        return Err(FunctionalError::WeightNotIntegrable { d, beta });
    }
    let v = radial_quadrature()
        .integrate_radial(|r| (1.0 + r * r).powf(0.5 * beta) * r.powi(d as i32 - 1), 1.0)
        .map_err(|e| FunctionalError::Numerics(e.to_string()))?
        .value;
    Ok(unit_sphere_area::<f64>(d) * v)
}

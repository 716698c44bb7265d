use serde::Serialize;

use crate::constants;
use crate::fields::stencil::{face_gradient, has_face, p_flux};
use crate::fields::DensityField;
use crate::numerics::pairwise_sum;
use crate::regime::RegimeParams;
use crate::scalar::{lit, Exponent, Scalar};

use super::{bracket, bracket_power_integral, entropy, lq_norm, moment, nu_k, p_fisher, FunctionalError};

/// Both sides of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Scalar> Inequality<T> {
    /// `lhs / rhs`, with `0 / 0 = 0`.
    pub fn ratio(&self) -> T {
        if self.lhs == T::zero() {
            T::zero()
        } else {
            self.lhs / self.rhs
        }
    }

    /// `lhs ≤ rhs (1 + tol)` for nonnegative sides.
    pub fn holds(&self, tol: T) -> bool {
        self.lhs <= self.rhs + tol * self.rhs.abs()
    }
}

fn check_dim<Q: Exponent, T: Scalar>(field: &DensityField<T>, params: &RegimeParams<Q>) -> Result<(), FunctionalError> {
    if field.grid().dim() as u32 == params.d {
        Ok(())
    } else {
        Err(FunctionalError::Numerics(format!(
            "field dimension {} does not match d = {}",
            field.grid().dim(),
            params.d
        )))
    }
}

/// `‖ρ‖_q ≤ (C^S_{d,p}/p')^{r'p'/q'} ‖ρ‖_1^{1 - r'/q'} I_p^{r'p'/(q'p)}` for
/// `q ∈ [1, r]`, `r = p*/p'`.
pub fn check_gns<T: Scalar, Q: Exponent>(
    field: &DensityField<T>,
    params: &RegimeParams<Q>,
    q: T,
) -> Result<Inequality<T>, FunctionalError> {
    check_dim(field, params)?;
    let p_f = params.p.as_f64();
    let r = params
        .r
        .as_ref()
        .map(Exponent::as_f64)
        .ok_or(FunctionalError::NoSobolevEmbedding { d: params.d, p: p_f })?;
    let q_f = q.as_f64();
    if !(q_f >= 1.0 && q_f <= r * (1.0 + 1e-12)) {
        return Err(FunctionalError::GnsExponent { q: q_f, r });
    }
    let p: T = lit(p_f);
    let p_conj: T = lit(params.p_conj.as_f64());
    let r: T = lit(r);
    let cs: T = constants::sobolev_constant(params.d, p)?;
    let r_conj = r / (r - T::one());
    let inv_q_conj = T::one() - T::one() / q;
    let lhs = lq_norm(field, q);
    let rhs = (cs / p_conj).powf(r_conj * p_conj * inv_q_conj)
        * field.mass().powf(T::one() - r_conj * inv_q_conj)
        * p_fisher(field, p).powf(r_conj * p_conj * inv_q_conj / p);
    Ok(Inequality { lhs, rhs })
}

/// Admissible `k` for the moment bound at `(d, p)`: `[0, 1]` when `p ≥ 2`,
/// `(0, α_p)` when `p < 2`.
pub fn moment_lemma_window<T: Scalar>(d: usize, p: T, k: T) -> Result<(), String> {
    if p >= lit(2.0) {
        if k >= T::zero() && k <= T::one() {
            Ok(())
        } else {
            Err("[0, 1]".into())
        }
    } else {
        let alpha_p = p * T::from_usize_(d + 1) - T::from_usize_(2 * d);
        if k > T::zero() && k < alpha_p {
            Ok(())
        } else {
            Err(format!("(0, {})", alpha_p.as_f64()))
        }
    }
}

/// Hölder bound on `|∫|∇ρ|^{p-2}∇ρ·∇m|`, `m = ⟨x⟩^k`:
///
/// * `p ≥ 2`: `k (∫ρ^{p-1})^{1/p} I_p^{1/p'}`
/// * `p < 2`: `k (∫ρm)^{1/p'} I_p^{1/p'} (∫⟨x⟩^{(k-p)/(2-p)})^{2/p-1}`
///
/// The left side uses the face fluxes of the solver with `δ = 0`.
pub fn moment_lemma<T: Scalar>(field: &DensityField<T>, p: T, k: T) -> Result<Inequality<T>, FunctionalError> {
    let grid = field.grid();
    let d = grid.dim();
    moment_lemma_window(d, p, k).map_err(|window| FunctionalError::MomentWindow {
        k: k.as_f64(),
        p: p.as_f64(),
        window,
    })?;
    let rho = field.values();
    let m: Vec<T> = (0..grid.len()).map(|c| bracket(grid.center(c)).powf(k)).collect();
    let fg = face_gradient(rho, grid);
    let inv_dx = T::one() / grid.dx();
    let terms: Vec<T> = (0..d)
        .flat_map(|a| {
            let s = grid.stride(a);
            let fg = &fg;
            let m = &m;
            (0..grid.len()).map(move |c| {
                if !has_face(grid, c, a) {
                    return T::zero();
                }
                p_flux(fg.normal[a][c], fg.magnitude[a][c], p, T::zero()) * (m[c + s] - m[c]) * inv_dx
            })
        })
        .collect();
    let lhs = (pairwise_sum(&terms) * grid.cell_volume()).abs();

    let p_conj = p / (p - T::one());
    let fisher = p_fisher(field, p);
    let rhs = if p >= lit(2.0) {
        let lp = lq_norm(field, p - T::one()).powf(p - T::one());
        k * lp.powf(T::one() / p) * fisher.powf(T::one() / p_conj)
    } else {
        let beta = (k - p) / (lit::<T>(2.0) - p);
        let w: T = lit(bracket_power_integral(d as u32, beta.as_f64())?);
        k * moment(field, k).powf(T::one() / p_conj)
            * fisher.powf(T::one() / p_conj)
            * w.powf(lit::<T>(2.0) / p - T::one())
    };
    Ok(Inequality { lhs, rhs })
}

/// [`moment_lemma`] at the exponent of `params`.
pub fn check_moment_lemma<T: Scalar, Q: Exponent>(
    field: &DensityField<T>,
    params: &RegimeParams<Q>,
    k: T,
) -> Result<Inequality<T>, FunctionalError> {
    check_dim(field, params)?;
    moment_lemma(field, lit(params.p.as_f64()), k)
}

/// `∫ρ ln ρ ≥ M ln M - ν_k ∫ρ⟨x⟩^k`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyBound<T> {
    pub entropy: T,
    pub mass: T,
    pub moment: T,
    pub nu_k: T,
    pub bound: T,
}

impl<T: Scalar> EntropyBound<T> {
    /// `entropy - bound`, nonnegative in the continuum.
    pub fn gap(&self) -> T {
        self.entropy - self.bound
    }

    /// Size of the terms in the bound, used to make gaps relative.
    pub fn scale(&self) -> T {
        (self.mass * self.mass.ln()).abs() + self.nu_k * self.moment
    }

    pub fn holds(&self, tol: T) -> bool {
        self.gap() >= -tol * self.scale()
    }

    pub fn as_inequality(&self) -> Inequality<T> {
        Inequality {
            lhs: self.bound,
            rhs: self.entropy,
        }
    }
}

pub fn entropy_lower_bound_check<T: Scalar>(field: &DensityField<T>, k: T) -> Result<EntropyBound<T>, FunctionalError> {
    let nu: T = lit(nu_k(field.grid().dim() as u32, k.as_f64())?);
    let mass = field.mass();
    let mom = moment(field, k);
    Ok(EntropyBound {
        entropy: entropy(field),
        mass,
        moment: mom,
        nu_k: nu,
        bound: mass * mass.ln() - nu * mom,
    })
}

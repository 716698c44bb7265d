use rayon::prelude::*;

use crate::fields::stencil::{face_gradient, has_face, p_flux};
use crate::fields::{DensityField, Grid, VectorField};
use crate::scalar::{lit, Scalar};

use super::SolverError;

const PARALLEL_CELLS: usize = 4096;

pub(crate) fn map_cells<T: Scalar>(len: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if len >= PARALLEL_CELLS {
        (0..len).into_par_iter().map(f).collect()
    } else {
        (0..len).map(f).collect()
    }
}

/// Face fluxes per axis, indexed by the cell on the low side of the face.
/// Entries without an interior face are zero (no-flux boundary).
pub type FaceFlux<T> = Vec<Vec<T>>;

/// `φ_δ(|G|) G_n` on every interior face.
pub fn diffusive_flux<T: Scalar>(field: &DensityField<T>, p: T, delta: T) -> FaceFlux<T> {
    let grid = *field.grid();
    let fg = face_gradient(field.values(), &grid);
    (0..grid.dim())
        .map(|a| {
            map_cells(grid.len(), |c| {
                if has_face(&grid, c, a) {
                    p_flux(fg.normal[a][c], fg.magnitude[a][c], p, delta)
                } else {
                    T::zero()
                }
            })
        })
        .collect()
}

#[inline]
fn minmod<T: Scalar>(a: T, b: T) -> T {
    if a * b <= T::zero() {
        T::zero()
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Face average of the cell-centered `v` along `axis`.
pub(crate) fn face_velocity<T: Scalar>(v: &[T], grid: &Grid<T>, axis: usize) -> Vec<T> {
    let s = grid.stride(axis);
    let half = lit::<T>(0.5);
    (0..grid.len())
        .map(|c| {
            if has_face(grid, c, axis) {
                half * (v[c] + v[c + s])
            } else {
                T::zero()
            }
        })
        .collect()
}

/// `λ v_face ρ_up`, where `ρ_up` is a minmod-limited reconstruction from the
/// upwind side of the transport velocity `-λ v_face`. Limited slopes fall
/// back to first order next to the boundary.
pub fn aggregation_flux<T: Scalar>(field: &DensityField<T>, velocity: &VectorField<T>, lambda: T) -> FaceFlux<T> {
    let grid = *field.grid();
    (0..grid.dim())
        .map(|a| {
            let vf = face_velocity(velocity.component(a), &grid, a);
            upwind_flux(field.values(), &grid, a, &vf, lambda)
        })
        .collect()
}

pub(crate) fn upwind_flux<T: Scalar>(rho: &[T], grid: &Grid<T>, axis: usize, vf: &[T], lambda: T) -> Vec<T> {
    let s = grid.stride(axis);
    let n = grid.n();
    let half = lit::<T>(0.5);
    map_cells(grid.len(), |c| {
        if !has_face(grid, c, axis) || lambda == T::zero() {
            return T::zero();
        }
        let i = grid.multi_index(c)[axis];
        let v = vf[c];
        // transport velocity is -λ v, so v < 0 moves mass towards +axis
        let up = if v <= T::zero() {
            if i == 0 {
                rho[c]
            } else {
                rho[c] + half * minmod(rho[c] - rho[c - s], rho[c + s] - rho[c])
            }
        } else if i + 2 >= n {
            rho[c + s]
        } else {
            rho[c + s] - half * minmod(rho[c + s] - rho[c], rho[c + 2 * s] - rho[c + s])
        };
        lambda * v * up
    })
}

/// Explicit time step limit: the diffusive bound
/// `dx²/(2d max φ_δ max(1, p-1))` and the advective bound
/// `dx/(2d λ max|v_face|)` combined harmonically, times `cfl`, capped by
/// `dt_cap`. Faces where `|G|² + δ² = 0` carry no flux and are ignored.
pub(crate) fn stable_dt<T: Scalar>(
    grid: &Grid<T>,
    rho: &[T],
    p: T,
    delta: T,
    lambda: T,
    face_v: Option<&[Vec<T>]>,
    cfl: T,
    dt_cap: T,
) -> T {
    let d = T::from_usize_(grid.dim());
    let two_d = lit::<T>(2.0) * d;
    let dx = grid.dx();
    let fg = face_gradient(rho, grid);
    let expo = lit::<T>(0.5) * (p - lit::<T>(2.0));
    let mut phi_max = T::zero();
    for a in 0..grid.dim() {
        for c in 0..grid.len() {
            if !has_face(grid, c, a) {
                continue;
            }
            let m = fg.magnitude[a][c];
            let s2 = m * m + delta * delta;
            if s2 > T::zero() {
                phi_max = phi_max.max(s2.powf(expo));
            }
        }
    }
    let rate_diff = two_d * phi_max * T::one().max(p - T::one()) / (dx * dx);
    let v_max = face_v
        .map(|fv| fv.iter().flat_map(|c| c.iter()).fold(T::zero(), |m, v| m.max(v.abs())))
        .unwrap_or_else(T::zero);
    let rate_adv = two_d * lambda.abs() * v_max / dx;
    let rate = rate_diff + rate_adv;
    if rate > T::zero() {
        (cfl / rate).min(dt_cap)
    } else {
        dt_cap
    }
}

/// `ρ + dt div F` with the zero-flux boundary. Negative values above
/// `-1e-13 max ρ` are clipped to zero; anything below is an error.
pub(crate) fn apply_flux<T: Scalar>(
    grid: &Grid<T>,
    rho: &[T],
    flux: &[Vec<T>],
    dt: T,
    t: T,
) -> Result<Vec<T>, SolverError> {
    let r = dt / grid.dx();
    let mut out = map_cells(grid.len(), |c| {
        let idx = grid.multi_index(c);
        let mut div = T::zero();
        for (a, f) in flux.iter().enumerate() {
            let s = grid.stride(a);
            div += f[c];
            if idx[a] > 0 {
                div -= f[c - s];
            }
        }
        rho[c] + r * div
    });
    let max = out.iter().copied().fold(T::zero(), T::max);
    let floor = -lit::<T>(1e-13) * max;
    for (i, v) in out.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(SolverError::NonFinite { t: t.as_f64(), index: i });
        }
        if *v < T::zero() {
            if *v < floor {
                return Err(SolverError::NonPositivityViolation {
                    t: t.as_f64(),
                    index: i,
                    value: v.as_f64(),
                });
            }
            *v = T::zero();
        }
    }
    Ok(out)
}

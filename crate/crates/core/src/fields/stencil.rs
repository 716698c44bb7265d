//! Face-centered differences.
//!
//! Interior faces normal to `axis` are indexed by the cell on their low side,
//! so face `c` separates cells `c` and `c + stride(axis)`. Entries for cells
//! on the high boundary are unused and kept at zero.

use crate::scalar::Scalar;

use super::vector::centered_difference;
use super::Grid;

/// Whether cell `c` has an interior face on its high side along `axis`.
#[inline]
pub fn has_face<T: Scalar>(grid: &Grid<T>, c: usize, axis: usize) -> bool {
    grid.multi_index(c)[axis] + 1 < grid.n()
}

/// Face gradients of a cell function `u`, per axis.
#[derive(Debug, Clone)]
pub struct FaceGradient<T> {
    /// `(u[c + s] - u[c]) / dx`
    pub normal: Vec<Vec<T>>,
    /// Full gradient length at the face. In 2D the tangential component is
    /// the mean of the cell-centered differences on both sides.
    pub magnitude: Vec<Vec<T>>,
}

pub fn face_gradient<T: Scalar>(u: &[T], grid: &Grid<T>) -> FaceGradient<T> {
    let d = grid.dim();
    let inv_dx = T::one() / grid.dx();
    let half = T::lit(0.5);
    let centered: Vec<Vec<T>> = if d == 2 {
        (0..d).map(|a| centered_difference(u, grid, a)).collect()
    } else {
        Vec::new()
    };
    let mut normal = Vec::with_capacity(d);
    let mut magnitude = Vec::with_capacity(d);
    for axis in 0..d {
        let s = grid.stride(axis);
        let mut nrm = vec![T::zero(); grid.len()];
        let mut mag = vec![T::zero(); grid.len()];
        for c in 0..grid.len() {
            if !has_face(grid, c, axis) {
                continue;
            }
            let g = (u[c + s] - u[c]) * inv_dx;
            nrm[c] = g;
            mag[c] = if d == 2 {
                let t = &centered[1 - axis];
                g.hypot(half * (t[c] + t[c + s]))
            } else {
                g.abs()
            };
        }
        normal.push(nrm);
        magnitude.push(mag);
    }
    FaceGradient { normal, magnitude }
}

/// Regularized p-Laplacian flux `(|G|² + δ²)^{(p-2)/2} G_n`, taken as 0 where
/// both the gradient and `δ` vanish.
#[inline]
pub fn p_flux<T: Scalar>(normal: T, magnitude: T, p: T, delta: T) -> T {
    let s2 = magnitude * magnitude + delta * delta;
    if s2 == T::zero() {
        return T::zero();
    }
    s2.powf(T::lit(0.5) * (p - T::lit(2.0))) * normal
}

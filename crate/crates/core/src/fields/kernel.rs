use serde::{Deserialize, Serialize};

use crate::numerics::Quadrature;
use crate::scalar::{lit, Scalar};

use super::{FieldError, Grid};

/// Attraction kernel `K(x) = x |x|^{-α}`, replaced by `ε^{-α} x` for `|x| < ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec<T> {
    pub alpha: T,
    pub eps: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(alpha: T, eps: T) -> Result<Self, FieldError> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(FieldError::KernelExponent {
                d: 0,
                alpha: alpha.as_f64(),
            });
        }
        if !(eps >= T::zero()) || !eps.is_finite() {
            return Err(FieldError::KernelRadius { eps: eps.as_f64() });
        }
        Ok(Self { alpha, eps })
    }

    /// Default regularization `ε = 2 dx`.
    pub fn for_grid(alpha: T, grid: &Grid<T>) -> Result<Self, FieldError> {
        let k = Self::new(alpha, lit::<T>(2.0) * grid.dx())?;
        k.check_dimension(grid.dim())?;
        Ok(k)
    }

    pub fn check_dimension(&self, d: usize) -> Result<(), FieldError> {
        if self.alpha < T::from_usize_(d) {
            Ok(())
        } else {
            Err(FieldError::KernelExponent {
                d,
                alpha: self.alpha.as_f64(),
            })
        }
    }

    /// Radial factor `g` with `K(x) = g(|x|) x`.
    pub fn radial_factor(&self, s: T) -> T {
        if s >= self.eps {
            if s == T::zero() {
                T::zero()
            } else {
                s.powf(-self.alpha)
            }
        } else {
            self.eps.powf(-self.alpha)
        }
    }

    pub fn value(&self, x: [T; 2]) -> [T; 2] {
        let s = x[0].hypot(x[1]);
        let g = self.radial_factor(s);
        [g * x[0], g * x[1]]
    }

    /// Pointwise `div K` in dimension `d`, for `s = |x| > 0`.
    pub fn divergence(&self, s: T, d: usize) -> T {
        let d = T::from_usize_(d);
        if s >= self.eps {
            (d - self.alpha) * s.powf(-self.alpha)
        } else {
            d * self.eps.powf(-self.alpha)
        }
    }

    /// Weight `|x|^{-α}` of the interaction energy at grid offset `x`; the zero
    /// offset uses `|x| = ε` (and contributes nothing when `ε = 0`).
    pub fn interaction_weight(&self, s: T) -> T {
        if s > T::zero() {
            s.powf(-self.alpha)
        } else if self.eps > T::zero() {
            self.eps.powf(-self.alpha)
        } else {
            T::zero()
        }
    }

    /// Offset tables of `K` on the grid, one per axis, laid out as in
    /// [`offset_table`].
    pub fn velocity_tables(&self, grid: &Grid<T>) -> Vec<Vec<T>> {
        let dx = grid.dx();
        (0..grid.dim())
            .map(|axis| {
                offset_table(grid, |o| {
                    let x = [T::lit(o[0] as f64) * dx, T::lit(o[1] as f64) * dx];
                    self.value(x)[axis]
                })
            })
            .collect()
    }

    pub fn interaction_table(&self, grid: &Grid<T>) -> Vec<T> {
        let dx = grid.dx();
        offset_table(grid, |o| {
            let s = T::lit((o[0] as f64).hypot(o[1] as f64)) * dx;
            self.interaction_weight(s)
        })
    }

    /// Cell averages of `div K` over each grid cell, obtained from the flux of
    /// `K` through the cell boundary. Evaluated in `f64` by quadrature.
    pub fn divergence_table(&self, grid: &Grid<T>) -> Vec<T> {
        let h = grid.dx().as_f64();
        let alpha = self.alpha.as_f64();
        let eps = self.eps.as_f64();
        let g = |s: f64| {
            if s >= eps {
                if s == 0.0 {
                    0.0
                } else {
                    s.powf(-alpha)
                }
            } else {
                eps.powf(-alpha)
            }
        };
        let n = grid.n() as i64;
        if grid.dim() == 1 {
            let k1 = |x: f64| x * g(x.abs());
            return offset_table(grid, |o| {
                let a = o[0] as f64;
                T::lit((k1((a + 0.5) * h) - k1((a - 0.5) * h)) / h)
            });
        }
        // flux[ia][jb]: ∫ a g(√(a²+t²)) dt over the edge at a = (ia+½)h,
        // t ∈ [(jb-½)h, (jb+½)h], for ia, jb ≥ 0. Odd in a, even in t.
        let quad = Quadrature::new(1e-300, 1e-12);
        let count = n as usize;
        let mut flux = vec![0.0; count * count];
        for ia in 0..count {
            let a = (ia as f64 + 0.5) * h;
            for jb in 0..count {
                let t0 = (jb as f64 - 0.5) * h;
                let t1 = (jb as f64 + 0.5) * h;
                let mut breaks = vec![t0];
                if eps > a {
                    let kink = (eps * eps - a * a).sqrt();
                    for k in [-kink, kink] {
                        if k > t0 && k < t1 {
                            breaks.push(k);
                        }
                    }
                }
                breaks.push(t1);
                flux[ia * count + jb] = quad
                    .integrate_pieces(|t: f64| a * g(a.hypot(t)), &breaks)
                    .map(|e| e.value)
                    .expect("smooth edge integral converges");
            }
        }
        let edge = |a_half: i64, b: i64| -> f64 {
            // a_half indexes the edge at (a_half + ½)h
            let (ia, sign) = if a_half >= 0 {
                (a_half as usize, 1.0)
            } else {
                ((-a_half - 1) as usize, -1.0)
            };
            sign * flux[ia * count + b.unsigned_abs() as usize]
        };
        offset_table(grid, |o| {
            let (a, b) = (o[0], o[1]);
            let outward = edge(a, b) - edge(a - 1, b) + edge(b, a) - edge(b - 1, a);
            T::lit(outward / (h * h))
        })
    }
}

/// Tabulates `f` on the offsets `(-(n-1)..=n-1)^d`, row-major with side
/// `2n - 1`; unused axes are 0.
pub(crate) fn offset_table<T: Scalar>(grid: &Grid<T>, f: impl Fn([i64; 2]) -> T) -> Vec<T> {
    let n = grid.n() as i64;
    let side = (2 * n - 1) as usize;
    if grid.dim() == 1 {
        (-(n - 1)..n).map(|a| f([a, 0])).collect()
    } else {
        let mut out = Vec::with_capacity(side * side);
        for a in -(n - 1)..n {
            for b in -(n - 1)..n {
                out.push(f([a, b]));
            }
        }
        out
    }
}

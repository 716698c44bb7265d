//! Free-space discrete convolutions `(w ∗ ρ)_i = Σ_j w(x_i - x_j) ρ_j dx^d`.
//!
//! The weight is given as an offset table over `(-(n-1)..=n-1)^d`. The direct
//! path sums in a fixed order per output cell, so it is bit-identical however
//! many threads run it. The fast path embeds both arrays in a `(2n)^d` box,
//! where the circular product of their spectra equals the linear convolution
//! on the original cells.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::{DensityField, FieldError, Grid, KernelSpec, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMethod {
    Direct,
    #[default]
    Fft,
}

/// Convolution with a fixed weight on a fixed grid. The padded weight
/// spectrum is computed once.
pub struct ConvolutionOperator<T: Scalar> {
    grid: Grid<T>,
    table: Vec<T>,
    spectrum: Vec<Complex<T>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> std::fmt::Debug for ConvolutionOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvolutionOperator")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> ConvolutionOperator<T> {
    pub fn new(grid: Grid<T>, table: Vec<T>) -> Result<Self, FieldError> {
        let side = 2 * grid.n() - 1;
        let expected = side.pow(grid.dim() as u32);
        if table.len() != expected {
            return Err(FieldError::LengthMismatch {
                expected,
                got: table.len(),
            });
        }
        let m = 2 * grid.n();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let mut op = Self {
            grid,
            table,
            spectrum: Vec::new(),
            forward,
            inverse,
        };
        let mut padded = vec![Complex::new(T::zero(), T::zero()); m.pow(grid.dim() as u32)];
        let n = grid.n() as i64;
        let wrap = |o: i64| o.rem_euclid(m as i64) as usize;
        if grid.dim() == 1 {
            for a in -(n - 1)..n {
                padded[wrap(a)].re = op.table[(a + n - 1) as usize];
            }
        } else {
            for a in -(n - 1)..n {
                for b in -(n - 1)..n {
                    let src = (a + n - 1) as usize * side + (b + n - 1) as usize;
                    padded[wrap(a) * m + wrap(b)].re = op.table[src];
                }
            }
        }
        op.transform(&mut padded, true);
        op.spectrum = padded;
        Ok(op)
    }

    /// The `d` components of `K` as operators.
    pub fn velocity(grid: Grid<T>, kernel: &KernelSpec<T>) -> Result<Vec<Self>, FieldError> {
        kernel.check_dimension(grid.dim())?;
        kernel
            .velocity_tables(&grid)
            .into_iter()
            .map(|t| Self::new(grid, t))
            .collect()
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn apply(&self, rho: &[T], method: ConvolutionMethod) -> Vec<T> {
        assert_eq!(rho.len(), self.grid.len(), "field length does not match operator grid");
        match method {
            ConvolutionMethod::Direct => self.apply_direct(rho),
            ConvolutionMethod::Fft => self.apply_fft(rho),
        }
    }

    fn apply_direct(&self, rho: &[T]) -> Vec<T> {
        let g = self.grid;
        let n = g.n();
        let side = 2 * n - 1;
        let vol = g.cell_volume();
        (0..g.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = T::zero();
                if g.dim() == 1 {
                    for (j, &r) in rho.iter().enumerate() {
                        acc += self.table[i + n - 1 - j] * r;
                    }
                } else {
                    let [ia, ib] = g.multi_index(i);
                    for ja in 0..n {
                        let row = (ia + n - 1 - ja) * side + n - 1 + ib;
                        for jb in 0..n {
                            acc += self.table[row - jb] * rho[ja * n + jb];
                        }
                    }
                }
                acc * vol
            })
            .collect()
    }

    fn apply_fft(&self, rho: &[T]) -> Vec<T> {
        let g = self.grid;
        let n = g.n();
        let m = 2 * n;
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; m.pow(g.dim() as u32)];
        if g.dim() == 1 {
            for (b, &r) in buf.iter_mut().zip(rho) {
                b.re = r;
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    buf[i * m + j].re = rho[i * n + j];
                }
            }
        }
        self.transform(&mut buf, true);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b = *b * *s;
        }
        self.transform(&mut buf, false);
        let scale = g.cell_volume() / T::from_usize_(buf.len());
        if g.dim() == 1 {
            buf[..n].iter().map(|c| c.re * scale).collect()
        } else {
            let mut out = Vec::with_capacity(g.len());
            for i in 0..n {
                out.extend(buf[i * m..i * m + n].iter().map(|c| c.re * scale));
            }
            out
        }
    }

    fn transform(&self, buf: &mut [Complex<T>], forward: bool) {
        let plan = if forward { &self.forward } else { &self.inverse };
        let m = 2 * self.grid.n();
        if self.grid.dim() == 1 {
            plan.process(buf);
            return;
        }
        buf.par_chunks_mut(m).for_each(|row| plan.process(row));
        transpose(buf, m);
        buf.par_chunks_mut(m).for_each(|row| plan.process(row));
        transpose(buf, m);
    }
}

fn transpose<C: Copy>(buf: &mut [C], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

/// `v = K^ε ∗ ρ` at cell centers.
pub fn attraction_velocity<T: Scalar>(
    field: &DensityField<T>,
    kernel: &KernelSpec<T>,
    method: ConvolutionMethod,
) -> Result<VectorField<T>, FieldError> {
    let ops = ConvolutionOperator::velocity(*field.grid(), kernel)?;
    let components = ops.iter().map(|op| op.apply(field.values(), method)).collect();
    VectorField::new(*field.grid(), components)
}

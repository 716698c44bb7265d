use crate::scalar::{lit, Scalar};

use super::{DensityField, FieldError, Grid};

/// Cell-centered vector field, one component per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    grid: Grid<T>,
    components: Vec<Vec<T>>,
}

impl<T: Scalar> VectorField<T> {
    pub fn new(grid: Grid<T>, components: Vec<Vec<T>>) -> Result<Self, FieldError> {
        if components.len() != grid.dim() {
            return Err(FieldError::LengthMismatch {
                expected: grid.dim(),
                got: components.len(),
            });
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(FieldError::LengthMismatch {
                    expected: grid.len(),
                    got: c.len(),
                });
            }
            if let Some((i, v)) = c.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(FieldError::InvalidValue {
                    index: i,
                    value: v.as_f64(),
                });
            }
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            components: vec![vec![T::zero(); grid.len()]; grid.dim()],
            grid,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn component(&self, axis: usize) -> &[T] {
        &self.components[axis]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    /// Largest Euclidean length over all cells.
    pub fn max_norm(&self) -> T {
        (0..self.grid.len())
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c[i] * c[i])
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt()
            })
            .fold(T::zero(), T::max)
    }

    /// Largest absolute entry over all components.
    pub fn max_abs(&self) -> T {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Cell-centered gradient: central differences inside, second-order
/// one-sided differences in the first and last cell of each line.
pub fn gradient<T: Scalar>(field: &DensityField<T>) -> VectorField<T> {
    let grid = *field.grid();
    let components = (0..grid.dim())
        .map(|axis| centered_difference(field.values(), &grid, axis))
        .collect();
    VectorField { grid, components }
}

pub(crate) fn centered_difference<T: Scalar>(u: &[T], grid: &Grid<T>, axis: usize) -> Vec<T> {
    let n = grid.n();
    let s = grid.stride(axis);
    let inv2dx = T::one() / (lit::<T>(2.0) * grid.dx());
    (0..grid.len())
        .map(|c| {
            let i = grid.multi_index(c)[axis];
            if i == 0 {
                (lit::<T>(4.0) * (u[c + s] - u[c]) - (u[c + 2 * s] - u[c])) * inv2dx
            } else if i == n - 1 {
                (lit::<T>(4.0) * (u[c] - u[c - s]) - (u[c] - u[c - 2 * s])) * inv2dx
            } else {
                (u[c + s] - u[c - s]) * inv2dx
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{discretize, Profile};

    #[test]
    fn constant_has_zero_gradient() {
        let g = Grid::new(2, 2.0f64, 16).unwrap();
        let f = DensityField::new(g, vec![1.5; g.len()]).unwrap();
        assert_eq!(gradient(&f).max_abs(), 0.0);
    }

    #[test]
    fn ramp_is_exact() {
        let g = Grid::new(2, 2.0f64, 16).unwrap();
        let f = DensityField::from_fn(g, |x| 5.0 + 0.25 * x[0] + 0.5 * x[1]).unwrap();
        let grad = gradient(&f);
        for i in 0..g.len() {
            assert!((grad.component(0)[i] - 0.25).abs() < 1e-12);
            assert!((grad.component(1)[i] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_second_order() {
        let mut errs = vec![];
        for n in [64, 128, 256] {
            let g = Grid::new(1, 6.0f64, n).unwrap();
            let f = discretize(&Profile::gaussian(&[0.0], 1.0, 1.0), &g).unwrap();
            let grad = gradient(&f);
            let err = (0..n)
                .map(|i| {
                    let x = g.coordinate(i);
                    (grad.component(0)[i] + x * f.values()[i]).abs()
                })
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.9 && order < 2.1, "order {order}");
        }
    }

    #[test]
    fn rejects_wrong_shapes() {
        let g = Grid::new(2, 1.0f64, 8).unwrap();
        assert!(VectorField::new(g, vec![vec![0.0; 64]]).is_err());
        assert!(VectorField::new(g, vec![vec![0.0; 64], vec![f64::NAN; 64]]).is_err());
    }
}

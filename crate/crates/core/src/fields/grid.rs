use serde::{Deserialize, Serialize};

use crate::scalar::{lit, Scalar};

use super::FieldError;

/// Uniform cell-centered mesh on the box `[-L, L]^d`, `d ∈ {1, 2}`.
///
/// Cells are stored row-major: in 2D the flat index of cell `(i, j)` is
/// `i * n + j`, with `i` running along the first axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    d: usize,
    half_width: T,
    n: usize,
}

impl<T: Scalar> Grid<T> {
    pub const MIN_CELLS: usize = 8;

    pub fn new(d: usize, half_width: T, n: usize) -> Result<Self, FieldError> {
        if !(1..=2).contains(&d) {
            return Err(FieldError::UnsupportedDimension { d });
        }
        if n < Self::MIN_CELLS {
            return Err(FieldError::TooFewCells { n });
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(FieldError::NonPositiveWidth {
                half_width: half_width.as_f64(),
            });
        }
        Ok(Self { d, half_width, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn dx(&self) -> T {
        lit::<T>(2.0) * self.half_width / T::from_usize_(self.n)
    }

    /// `dx^d`
    pub fn cell_volume(&self) -> T {
        self.dx().powi(self.d as i32)
    }

    pub fn volume(&self) -> T {
        (lit::<T>(2.0) * self.half_width).powi(self.d as i32)
    }

    /// Total number of cells, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat-index stride of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        debug_assert!(axis < self.d);
        if self.d == 2 && axis == 0 {
            self.n
        } else {
            1
        }
    }

    /// Per-axis index of a flat cell index (unused axes are 0).
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        if self.d == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.d == 1 {
            idx[0]
        } else {
            idx[0] * self.n + idx[1]
        }
    }

    /// Coordinate of cell `i` along any axis: `-L + (i + 1/2) dx`.
    pub fn coordinate(&self, i: usize) -> T {
        -self.half_width + (T::from_usize_(i) + lit(0.5)) * self.dx()
    }

    /// Cell center (unused axes are 0).
    pub fn center(&self, flat: usize) -> [T; 2] {
        let idx = self.multi_index(flat);
        if self.d == 1 {
            [self.coordinate(idx[0]), T::zero()]
        } else {
            [self.coordinate(idx[0]), self.coordinate(idx[1])]
        }
    }

    /// Whether the cell touches the box boundary.
    pub fn is_boundary_cell(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        (0..self.d).any(|a| idx[a] == 0 || idx[a] == self.n - 1)
    }

    /// Same box and resolution in another scalar type.
    pub fn cast<U: Scalar>(&self) -> Grid<U> {
        Grid {
            d: self.d,
            half_width: U::lit(self.half_width.as_f64()),
            n: self.n,
        }
    }
}

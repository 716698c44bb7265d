use serde::{Deserialize, Serialize};

use crate::numerics::pairwise_sum;
use crate::scalar::{lit, Scalar};

use super::{FieldError, Grid};

/// Nonnegative cell-averaged density on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Scalar> DensityField<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= T::zero()))
        {
            return Err(FieldError::InvalidValue {
                index: i,
                value: v.as_f64(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.len()],
            grid,
        }
    }

    /// Builds a field from a function of the cell center.
    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 2]) -> T) -> Result<Self, FieldError> {
        let values = (0..grid.len()).map(|i| f(grid.center(i))).collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_raw(grid: Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// `Σ ρ_i dx^d`
    pub fn mass(&self) -> T {
        pairwise_sum(&self.values) * self.grid.cell_volume()
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn scale_by(&self, c: T) -> Result<Self, FieldError> {
        Self::new(self.grid, self.values.iter().map(|&v| v * c).collect())
    }

    /// Multiplies by `target / mass`.
    pub fn rescale_to_mass(&self, target: T) -> Result<Self, FieldError> {
        let m = self.mass();
        if !(m > T::zero()) {
            return Err(FieldError::ZeroMass);
        }
        if !(target > T::zero()) {
            return Err(FieldError::NonPositiveMass {
                mass: target.as_f64(),
            });
        }
        self.scale_by(target / m)
    }

    /// Fraction of the mass sitting in cells adjacent to the box boundary.
    pub fn boundary_mass_fraction(&self) -> T {
        let edge: Vec<T> = (0..self.grid.len())
            .filter(|&i| self.grid.is_boundary_cell(i))
            .map(|i| self.values[i])
            .collect();
        let total = pairwise_sum(&self.values);
        if total > T::zero() {
            pairwise_sum(&edge) / total
        } else {
            T::zero()
        }
    }

    /// Spatial reflection `x -> -x`.
    pub fn reflected(&self) -> Self {
        let n = self.grid.n();
        let values = (0..self.grid.len())
            .map(|flat| {
                let [i, j] = self.grid.multi_index(flat);
                let src = if self.grid.dim() == 1 {
                    n - 1 - i
                } else {
                    self.grid.flat_index([n - 1 - i, n - 1 - j])
                };
                self.values[src]
            })
            .collect();
        Self::from_raw(self.grid, values)
    }

    /// Centroid `Σ x ρ / Σ ρ` (unused axes are 0).
    pub fn centroid(&self) -> [T; 2] {
        let total = pairwise_sum(&self.values);
        let mut out = [T::zero(); 2];
        for (axis, slot) in out.iter_mut().enumerate().take(self.grid.dim()) {
            let moments: Vec<T> = (0..self.grid.len())
                .map(|i| self.grid.center(i)[axis] * self.values[i])
                .collect();
            *slot = pairwise_sum(&moments) / total;
        }
        out
    }

    pub fn cast<U: Scalar>(&self) -> DensityField<U> {
        DensityField {
            grid: self.grid.cast(),
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

/// Analytic initial profiles. Coordinates are given per axis; only the first
/// `d` entries are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// Normalized Gaussian of standard deviation `sigma` carrying `mass`.
    Gaussian {
        center: Vec<f64>,
        sigma: f64,
        mass: f64,
    },
    /// Uniform density `mass / |box|` on the box `[lo, hi]`.
    Indicator {
        lo: Vec<f64>,
        hi: Vec<f64>,
        mass: f64,
    },
    /// Radial Gaussian shell `exp(-(|x| - radius)² / (2 width²))`, normalized
    /// on the grid to carry `mass`.
    Ring { radius: f64, width: f64, mass: f64 },
    Mixture { components: Vec<Profile> },
}

impl Profile {
    pub fn gaussian(center: &[f64], sigma: f64, mass: f64) -> Self {
        Profile::Gaussian {
            center: center.to_vec(),
            sigma,
            mass,
        }
    }

    /// Nominal total mass.
    pub fn mass(&self) -> f64 {
        match self {
            Profile::Gaussian { mass, .. }
            | Profile::Indicator { mass, .. }
            | Profile::Ring { mass, .. } => *mass,
            Profile::Mixture { components } => components.iter().map(Profile::mass).sum(),
        }
    }

    fn check(&self, d: usize) -> Result<(), FieldError> {
        let coord_ok = |v: &Vec<f64>| v.len() >= d && v.iter().all(|x| x.is_finite());
        match self {
            Profile::Gaussian {
                center,
                sigma,
                mass,
            } => {
                if !coord_ok(center) || !(*sigma > 0.0) {
                    return Err(FieldError::InvalidProfile(format!(
                        "gaussian needs {d} center coordinates and sigma > 0"
                    )));
                }
                positive_mass(*mass)
            }
            Profile::Indicator { lo, hi, mass } => {
                if !coord_ok(lo) || !coord_ok(hi) || (0..d).any(|a| !(hi[a] > lo[a])) {
                    return Err(FieldError::InvalidProfile(format!(
                        "indicator needs {d}-dimensional bounds with hi > lo"
                    )));
                }
                positive_mass(*mass)
            }
            Profile::Ring {
                radius,
                width,
                mass,
            } => {
                if !(*radius >= 0.0) || !(*width > 0.0) {
                    return Err(FieldError::InvalidProfile(
                        "ring needs radius >= 0 and width > 0".into(),
                    ));
                }
                positive_mass(*mass)
            }
            Profile::Mixture { components } => {
                if components.is_empty() {
                    return Err(FieldError::InvalidProfile("empty mixture".into()));
                }
                components.iter().try_for_each(|c| c.check(d))
            }
        }
    }

    fn sample<T: Scalar>(&self, grid: &Grid<T>) -> Vec<f64> {
        let d = grid.dim();
        let centers: Vec<[f64; 2]> = (0..grid.len())
            .map(|i| {
                let c = grid.center(i);
                [c[0].as_f64(), c[1].as_f64()]
            })
            .collect();
        match self {
            Profile::Gaussian {
                center,
                sigma,
                mass,
            } => {
                let norm = mass / (2.0 * std::f64::consts::PI * sigma * sigma).powf(d as f64 / 2.0);
                centers
                    .iter()
                    .map(|x| {
                        let r2: f64 = (0..d).map(|a| (x[a] - center[a]).powi(2)).sum();
                        norm * (-r2 / (2.0 * sigma * sigma)).exp()
                    })
                    .collect()
            }
            Profile::Indicator { lo, hi, mass } => {
                let vol: f64 = (0..d).map(|a| hi[a] - lo[a]).product();
                let level = mass / vol;
                centers
                    .iter()
                    .map(|x| {
                        if (0..d).all(|a| x[a] >= lo[a] && x[a] <= hi[a]) {
                            level
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            Profile::Ring {
                radius,
                width,
                mass,
            } => {
                let raw: Vec<f64> = centers
                    .iter()
                    .map(|x| {
                        let r = (0..d).map(|a| x[a] * x[a]).sum::<f64>().sqrt();
                        (-(r - radius).powi(2) / (2.0 * width * width)).exp()
                    })
                    .collect();
                let total: f64 = raw.iter().sum::<f64>() * grid.cell_volume().as_f64();
                if total > 0.0 {
                    raw.iter().map(|v| v * mass / total).collect()
                } else {
                    raw
                }
            }
            Profile::Mixture { components } => {
                let mut acc = vec![0.0; grid.len()];
                for c in components {
                    for (a, v) in acc.iter_mut().zip(c.sample(grid)) {
                        *a += v;
                    }
                }
                acc
            }
        }
    }
}

fn positive_mass(mass: f64) -> Result<(), FieldError> {
    if mass > 0.0 && mass.is_finite() {
        Ok(())
    } else {
        Err(FieldError::NonPositiveMass { mass })
    }
}

/// Midpoint-rule cell values of an analytic profile.
pub fn discretize<T: Scalar>(profile: &Profile, grid: &Grid<T>) -> Result<DensityField<T>, FieldError> {
    profile.check(grid.dim())?;
    let values = profile.sample(grid).into_iter().map(lit::<T>).collect();
    DensityField::new(*grid, values)
}

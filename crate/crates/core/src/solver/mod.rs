//! Explicit conservative finite-volume integrator.
//!
//! The flux form is `∂t ρ = div(φ_δ(|∇ρ|)∇ρ + λ v ρ)` with `v = K^ε * ρ` and
//! no-flux box walls. Diffusive fluxes use face differences; the aggregation
//! flux is upwinded with respect to the transport velocity `-λ v`.

mod run;
mod scheme;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::fields::{ConvolutionMethod, FieldError, Grid, KernelSpec};
use crate::functionals::FunctionalError;
use crate::regime::RegimeParams;
use crate::scalar::{lit, Scalar};

pub use run::{cfl_dt, run, step, Snapshot, StepDiagnostics, Trajectory};
pub use scheme::{aggregation_flux, diffusive_flux, FaceFlux};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("negative density {value} at cell {index} (t = {t}); time step too large or flux defect")]
    NonPositivityViolation { t: f64, index: usize, value: f64 },
    #[error("non-finite density at cell {index} (t = {t})")]
    NonFinite { t: f64, index: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    ReachedTEnd,
    /// Density exceeded `rho_max` at time `t`.
    BlowUpIndicator { t: f64 },
    /// The stable step fell below `dt_min` at time `t`.
    DtCollapse { t: f64 },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::ReachedTEnd => "ReachedTEnd",
            RunStatus::BlowUpIndicator { .. } => "BlowUpIndicator",
            RunStatus::DtCollapse { .. } => "DtCollapse",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::ReachedTEnd => f.write_str("ReachedTEnd"),
            RunStatus::BlowUpIndicator { t } => write!(f, "BlowUpIndicator(t={t})"),
            RunStatus::DtCollapse { t } => write!(f, "DtCollapse(t={t})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig<T> {
    pub params: RegimeParams<T>,
    pub grid: Grid<T>,
    pub kernel: KernelSpec<T>,
    pub t_end: T,
    pub cfl: T,
    /// Gradient regularization. `None` picks `1e-8 max ρ₀ / dx` at run start.
    pub delta: Option<T>,
    pub dt_min: T,
    pub dt_cap: T,
    /// Blow-up threshold. `None` picks `1e4 max ρ₀` at run start.
    pub rho_max: Option<T>,
    pub diag_every: usize,
    /// Exponent of the `∫ρ⟨x⟩^k` diagnostic.
    pub moment_k: T,
    pub method: ConvolutionMethod,
    /// Times at which the field is saved; steps are shortened to hit them.
    pub snapshot_times: Vec<T>,
}

/// Mass fraction in boundary cells above which a run no longer approximates
/// the whole-space problem.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-6;

impl<T: Scalar> SolverConfig<T> {
    /// Defaults: `ε = 2dx`, `cfl = 0.5`, `k` at the middle of the moment
    /// window, a diagnostic row every 10 steps.
    pub fn new(params: RegimeParams<T>, grid: Grid<T>, t_end: T) -> Result<Self, SolverError> {
        let kernel = KernelSpec::for_grid(params.alpha, &grid)?;
        let (lo, hi) = params.moment_window();
        let cfg = Self {
            params,
            grid,
            kernel,
            t_end,
            cfl: lit(0.5),
            delta: None,
            dt_min: lit(1e-12),
            dt_cap: t_end,
            rho_max: None,
            diag_every: 10,
            moment_k: lit::<T>(0.5) * (lo + hi),
            method: ConvolutionMethod::Fft,
            snapshot_times: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if self.grid.dim() != self.params.d as usize {
            return bad(format!(
                "grid dimension {} differs from d = {}",
                self.grid.dim(),
                self.params.d
            ));
        }
        self.kernel.check_dimension(self.grid.dim())?;
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.dt_min > T::zero()) {
            return bad(format!("dt_min must be positive, got {}", self.dt_min));
        }
        if !(self.dt_cap > T::zero()) {
            return bad(format!("dt_cap must be positive, got {}", self.dt_cap));
        }
        if !(self.params.lambda >= T::zero()) || !self.params.lambda.is_finite() {
            return bad(format!("lambda must be nonnegative, got {}", self.params.lambda));
        }
        if let Some(delta) = self.delta {
            if !(delta >= T::zero()) || !delta.is_finite() {
                return bad(format!("delta must be nonnegative, got {delta}"));
            }
        }
        if self.diag_every == 0 {
            return bad("diag_every must be at least 1".into());
        }
        if !(self.moment_k > T::zero()) {
            return bad(format!("moment exponent must be positive, got {}", self.moment_k));
        }
        if self.snapshot_times.iter().any(|&s| !(s >= T::zero() && s <= self.t_end)) {
            return bad("snapshot times must lie in [0, t_end]".into());
        }
        Ok(())
    }
}

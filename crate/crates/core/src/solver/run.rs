use std::io::Write;

use serde::Serialize;

use crate::fields::{ConvolutionOperator, DensityField, Grid};
use crate::functionals::{entropy, fisher_dissipation, moment, p_fisher, quadratic_form};
use crate::scalar::{lit, Scalar};

use super::scheme::{apply_flux, face_velocity, stable_dt, upwind_flux};
use super::{diffusive_flux, RunStatus, SolverConfig, SolverError, BOUNDARY_MASS_LIMIT};

/// One diagnostic record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics<T> {
    pub t: T,
    /// Length of the step that ended at `t` (0 for the initial row).
    pub dt: T,
    pub mass: T,
    pub min_density: T,
    pub max_density: T,
    pub entropy: T,
    pub p_fisher: T,
    pub moment_k: T,
    pub interaction_energy: T,
    /// `|ΔS/Δt - R̄|` over the step ending at `t`, where `R̄` is the mean of
    /// the discrete entropy production rate at both ends of the step.
    pub entropy_dissipation_residual: Option<T>,
    /// The residual divided by the mean `I_p` over the step.
    pub relative_residual: Option<T>,
}

#[derive(Debug, Clone)]
pub struct Snapshot<T> {
    pub t: T,
    pub field: DensityField<T>,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub config: SolverConfig<T>,
    /// Regularization actually used.
    pub delta: T,
    /// Blow-up threshold actually used.
    pub rho_max: T,
    pub rows: Vec<StepDiagnostics<T>>,
    pub status: RunStatus,
    pub steps: usize,
    /// Largest boundary-cell mass fraction seen after any step.
    pub max_boundary_fraction: T,
    pub final_field: DensityField<T>,
    pub snapshots: Vec<Snapshot<T>>,
}

impl<T: Scalar> Trajectory<T> {
    /// Whether the support stayed away from the box walls.
    pub fn boundary_valid(&self) -> bool {
        self.max_boundary_fraction.as_f64() < BOUNDARY_MASS_LIMIT
    }

    pub fn max_density(&self) -> T {
        self.rows.iter().map(|r| r.max_density).fold(T::zero(), T::max)
    }

    pub fn max_entropy(&self) -> T {
        self.rows
            .iter()
            .map(|r| r.entropy)
            .fold(T::neg_infinity(), T::max)
    }

    /// Largest `|M(t) - M(0)| / M(0)` over the recorded rows.
    pub fn mass_drift(&self) -> T {
        let m0 = self.rows[0].mass;
        self.rows
            .iter()
            .map(|r| ((r.mass - m0) / m0).abs())
            .fold(T::zero(), T::max)
    }

    pub const CSV_HEADER: &'static str = "t,dt,mass,min,max,entropy,p_fisher,moment_k,interaction,residual,status";

    /// Diagnostics as CSV, ending with a `# config-hash:` comment line.
    pub fn write_csv<W: Write>(&self, mut w: W, config_hash: &str) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        let last = self.rows.len() - 1;
        for (i, r) in self.rows.iter().enumerate() {
            let status = if i == last { self.status.label() } else { "running" };
            let residual = r
                .entropy_dissipation_residual
                .map(|v| v.as_f64().to_string())
                .unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.t.as_f64(),
                r.dt.as_f64(),
                r.mass.as_f64(),
                r.min_density.as_f64(),
                r.max_density.as_f64(),
                r.entropy.as_f64(),
                r.p_fisher.as_f64(),
                r.moment_k.as_f64(),
                r.interaction_energy.as_f64(),
                residual,
                status
            )?;
        }
        writeln!(w, "# config-hash: {config_hash}")
    }
}

/// Convolution operators and resolved constants shared by all steps.
struct Stepper<T: Scalar> {
    grid: Grid<T>,
    p: T,
    lambda: T,
    delta: T,
    cfg: SolverConfig<T>,
    velocity: Vec<ConvolutionOperator<T>>,
    interaction: ConvolutionOperator<T>,
    divergence: Option<ConvolutionOperator<T>>,
}

impl<T: Scalar> Stepper<T> {
    fn new(cfg: &SolverConfig<T>, initial: &DensityField<T>) -> Result<Self, SolverError> {
        cfg.validate()?;
        let grid = cfg.grid;
        if *initial.grid() != grid {
            return Err(SolverError::InvalidConfig(
                "initial field grid differs from the configured grid".into(),
            ));
        }
        let delta = cfg
            .delta
            .unwrap_or_else(|| lit::<T>(1e-8) * initial.max() / grid.dx());
        let aggregating = cfg.params.lambda > T::zero();
        let velocity = if aggregating {
            ConvolutionOperator::velocity(grid, &cfg.kernel)?
        } else {
            Vec::new()
        };
        let divergence = if aggregating {
            Some(ConvolutionOperator::new(grid, cfg.kernel.divergence_table(&grid))?)
        } else {
            None
        };
        Ok(Self {
            grid,
            p: cfg.params.p,
            lambda: cfg.params.lambda,
            delta,
            cfg: cfg.clone(),
            velocity,
            interaction: ConvolutionOperator::new(grid, cfg.kernel.interaction_table(&grid))?,
            divergence,
        })
    }

    /// Total face flux and the stable step for `rho`.
    fn plan(&self, rho: &DensityField<T>) -> (Vec<Vec<T>>, T) {
        let mut flux = diffusive_flux(rho, self.p, self.delta);
        let face_v: Option<Vec<Vec<T>>> = if self.velocity.is_empty() {
            None
        } else {
            Some(
                self.velocity
                    .iter()
                    .enumerate()
                    .map(|(a, op)| face_velocity(&op.apply(rho.values(), self.cfg.method), &self.grid, a))
                    .collect(),
            )
        };
        if let Some(fv) = &face_v {
            for (a, v) in fv.iter().enumerate() {
                let agg = upwind_flux(rho.values(), &self.grid, a, v, self.lambda);
                for (f, g) in flux[a].iter_mut().zip(agg) {
                    *f += g;
                }
            }
        }
        let dt = stable_dt(
            &self.grid,
            rho.values(),
            self.p,
            self.delta,
            self.lambda,
            face_v.as_deref(),
            self.cfg.cfl,
            self.cfg.dt_cap,
        );
        (flux, dt)
    }

    /// Discrete entropy production rate: `-D_δ(ρ) + λ ∫ρ (div K^ε * ρ)`.
    fn production(&self, rho: &DensityField<T>) -> T {
        let diss = fisher_dissipation(rho, self.p, self.delta);
        match &self.divergence {
            Some(op) => -diss + self.lambda * quadratic_form(rho, op, self.cfg.method),
            None => -diss,
        }
    }

    fn diagnostics(&self, rho: &DensityField<T>, t: T, dt: T) -> StepDiagnostics<T> {
        StepDiagnostics {
            t,
            dt,
            mass: rho.mass(),
            min_density: rho.min(),
            max_density: rho.max(),
            entropy: entropy(rho),
            p_fisher: p_fisher(rho, self.p),
            moment_k: moment(rho, self.cfg.moment_k),
            interaction_energy: quadratic_form(rho, &self.interaction, self.cfg.method),
            entropy_dissipation_residual: None,
            relative_residual: None,
        }
    }
}

/// Stable step for `field` under `config`, before clipping to `t_end`.
pub fn cfl_dt<T: Scalar>(field: &DensityField<T>, config: &SolverConfig<T>) -> Result<T, SolverError> {
    Ok(Stepper::new(config, field)?.plan(field).1)
}

/// One explicit step of length `dt`, which must not exceed [`cfl_dt`].
pub fn step<T: Scalar>(field: &DensityField<T>, config: &SolverConfig<T>, dt: T) -> Result<DensityField<T>, SolverError> {
    let stepper = Stepper::new(config, field)?;
    let (flux, limit) = stepper.plan(field);
    if !(dt > T::zero()) || dt > limit * lit::<T>(1.0 + 1e-12) {
        return Err(SolverError::InvalidConfig(format!(
            "dt = {dt} outside (0, {limit}]"
        )));
    }
    let values = apply_flux(field.grid(), field.values(), &flux, dt, T::zero())?;
    Ok(DensityField::from_raw(*field.grid(), values))
}

/// Integrates from `initial` to `t_end` or until a blow-up indicator fires.
pub fn run<T: Scalar>(initial: &DensityField<T>, config: &SolverConfig<T>) -> Result<Trajectory<T>, SolverError> {
    let stepper = Stepper::new(config, initial)?;
    let max0 = initial.max();
    let rho_max = config.rho_max.unwrap_or_else(|| lit::<T>(1e4) * max0);
    if !(rho_max > max0) {
        return Err(SolverError::InvalidConfig(format!(
            "rho_max = {rho_max} must exceed the initial maximum {max0}"
        )));
    }
    let mut targets: Vec<T> = config.snapshot_times.clone();
    targets.sort_by(|a, b| a.partial_cmp(b).expect("finite snapshot times"));
    targets.dedup();
    let mut snapshots = Vec::new();
    if targets.first() == Some(&T::zero()) {
        snapshots.push(Snapshot {
            t: T::zero(),
            field: initial.clone(),
        });
        targets.remove(0);
    }
    let mut targets = targets.into_iter().peekable();

    let mut field = initial.clone();
    let mut t = T::zero();
    let mut rows = vec![stepper.diagnostics(&field, t, T::zero())];
    let mut max_boundary = field.boundary_mass_fraction();
    let mut steps = 0usize;
    let near = lit::<T>(1.0 + 1e-6);
    let half = lit::<T>(0.5);

    let status = loop {
        if t >= config.t_end {
            break RunStatus::ReachedTEnd;
        }
        let (flux, stable) = stepper.plan(&field);
        if stable < config.dt_min {
            break RunStatus::DtCollapse { t: t.as_f64() };
        }
        let target = targets.peek().copied().unwrap_or(config.t_end).min(config.t_end);
        let (dt, hit) = if t + stable * near >= target {
            (target - t, true)
        } else {
            (stable, false)
        };
        steps += 1;
        let finishing = hit && target >= config.t_end;
        let record = steps % config.diag_every == 0 || finishing;
        let before = record.then(|| (entropy(&field), stepper.production(&field), p_fisher(&field, stepper.p)));

        let values = apply_flux(&stepper.grid, field.values(), &flux, dt, t)?;
        field = DensityField::from_raw(stepper.grid, values);
        t = if hit { target } else { t + dt };
        max_boundary = max_boundary.max(field.boundary_mass_fraction());

        if hit && targets.peek() == Some(&target) {
            targets.next();
            snapshots.push(Snapshot {
                t,
                field: field.clone(),
            });
        }
        let blown = field.max() > rho_max;
        if record || blown {
            let mut row = stepper.diagnostics(&field, t, dt);
            if let Some((s0, r0, i0)) = before {
                let rate = (row.entropy - s0) / dt;
                let r1 = stepper.production(&field);
                let res = (rate - half * (r0 + r1)).abs();
                row.entropy_dissipation_residual = Some(res);
                let scale = half * (i0 + row.p_fisher);
                row.relative_residual = (scale > T::zero()).then(|| res / scale);
            }
            rows.push(row);
        }
        if blown {
            break RunStatus::BlowUpIndicator { t: t.as_f64() };
        }
    };
    if rows.last().map(|r| r.t) != Some(t) {
        rows.push(stepper.diagnostics(&field, t, T::zero()));
    }
    Ok(Trajectory {
        config: config.clone(),
        delta: stepper.delta,
        rho_max,
        rows,
        status,
        steps,
        max_boundary_fraction: max_boundary,
        final_field: field,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{discretize, Profile};
    use crate::regime::RegimeParams;

    fn heat_config(n: usize, t_end: f64) -> SolverConfig<f64> {
        let params = RegimeParams::validate(1, 1.4, 0.8, 1.0).unwrap().p_heat();
        let grid = Grid::new(1, 8.0, n).unwrap();
        SolverConfig::new(params, grid, t_end).unwrap()
    }

    #[test]
    fn constant_field_is_steady() {
        let mut cfg = heat_config(32, 0.1);
        cfg.params.p = 2.0;
        cfg.delta = Some(0.0);
        let f = DensityField::new(cfg.grid, vec![0.3; 32]).unwrap();
        let dt = cfl_dt(&f, &cfg).unwrap();
        assert_eq!(dt, 0.1);
        let next = step(&f, &cfg, dt).unwrap();
        assert_eq!(next.values(), f.values());
    }

    #[test]
    fn heat_variance_grows_linearly() {
        let mut cfg = heat_config(128, 0.05);
        cfg.params.p = 2.0;
        cfg.delta = Some(0.0);
        let f = discretize(&Profile::gaussian(&[0.0], 0.7, 1.0), &cfg.grid).unwrap();
        let var = |f: &DensityField<f64>| {
            let g = f.grid();
            let m: f64 = f.values().iter().sum();
            (0..g.len()).map(|i| g.coordinate(i).powi(2) * f.values()[i]).sum::<f64>() / m
        };
        let dt = cfl_dt(&f, &cfg).unwrap();
        let next = step(&f, &cfg, dt).unwrap();
        assert!((var(&next) - var(&f) - 2.0 * dt).abs() < 1e-10 * dt.max(1.0));
    }

    #[test]
    fn rejects_oversized_step() {
        let cfg = heat_config(64, 0.1);
        let f = discretize(&Profile::gaussian(&[0.0], 1.0, 1.0), &cfg.grid).unwrap();
        let dt = cfl_dt(&f, &cfg).unwrap();
        assert!(step(&f, &cfg, 3.0 * dt).is_err());
    }

    #[test]
    fn p_heat_run_dissipates() {
        let mut cfg = heat_config(128, 0.02);
        cfg.diag_every = 5;
        cfg.snapshot_times = vec![0.0, 0.01];
        let f = discretize(&Profile::gaussian(&[0.0], 1.0, 1.0), &cfg.grid).unwrap();
        let traj = run(&f, &cfg).unwrap();
        assert_eq!(traj.status, RunStatus::ReachedTEnd);
        assert_eq!(traj.rows.last().unwrap().t, 0.02);
        assert!(traj.mass_drift() < 1e-12);
        assert_eq!(traj.snapshots.len(), 2);
        assert_eq!(traj.snapshots[1].t, 0.01);
        for w in traj.rows.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[1].entropy <= w[0].entropy + 1e-12);
        }
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, "abc").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(Trajectory::<f64>::CSV_HEADER));
        assert!(text.trim_end().ends_with("# config-hash: abc"));
        assert!(text.contains(",ReachedTEnd\n"));
    }

    #[test]
    fn blow_up_indicator() {
        let params = RegimeParams::validate(1, 1.4f64, 0.8, 1.0).unwrap();
        let grid = Grid::new(1, 4.0, 64).unwrap();
        let mut cfg = SolverConfig::new(params, grid, 1.0).unwrap();
        let f = discretize(&Profile::gaussian(&[0.0], 0.5, 20.0), &grid).unwrap();
        cfg.rho_max = Some(f.max() * 1.05);
        let traj = run(&f, &cfg).unwrap();
        assert!(matches!(traj.status, RunStatus::BlowUpIndicator { .. }));
        assert!(traj.rows.last().unwrap().max_density > f.max() * 1.05);
    }
}

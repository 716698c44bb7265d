//! Mass sweeps across the critical threshold.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, RunConfigFile};
use crate::solver::{run, RunStatus};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub multiplier: f64,
    pub mass: f64,
    pub mass_ratio: f64,
    pub status: RunStatus,
    pub max_entropy: f64,
    pub max_density: f64,
    pub mass_drift: f64,
    pub boundary_valid: bool,
    pub steps: usize,
}

/// Runs `base` once per multiplier of the critical mass. Runs execute in
/// parallel; rows come back in input order.
pub fn sweep(base: &RunConfigFile, multipliers: &[f64]) -> Result<Vec<SweepRow>, ConfigError> {
    if multipliers.is_empty() {
        return Err(ConfigError::Invalid("empty multiplier list".into()));
    }
    if let Some(m) = multipliers.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(ConfigError::Invalid(format!("multipliers must be positive, got {m}")));
    }
    let prepared = multipliers
        .iter()
        .map(|&m| {
            let mut cfg = base.clone();
            cfg.mass_multiplier = Some(m);
            cfg.prepare().map(|p| (m, p))
        })
        .collect::<Result<Vec<_>, _>>()?;
    prepared
        .into_par_iter()
        .map(|(m, p)| {
            let traj = run(&p.initial, &p.solver)?;
            let mass = p.initial.mass();
            Ok(SweepRow {
                multiplier: m,
                mass,
                mass_ratio: mass / p.critical_mass.expect("sweep configs have a critical mass"),
                status: traj.status,
                max_entropy: traj.max_entropy(),
                max_density: traj.max_density(),
                mass_drift: traj.mass_drift(),
                boundary_valid: traj.boundary_valid(),
                steps: traj.steps,
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str =
    "multiplier,mass,mass_over_critical,status,max_entropy,max_density,mass_drift,boundary_valid,steps";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W, config_hash: &str) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.multiplier,
            r.mass,
            r.mass_ratio,
            r.status,
            r.max_entropy,
            r.max_density,
            r.mass_drift,
            r.boundary_valid,
            r.steps
        )?;
    }
    writeln!(w, "# config-hash: {config_hash}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfigFile {
        RunConfigFile::from_json(
            r#"{
            "d": 2, "p": "5/3", "alpha": 1, "lambda": 1,
            "grid": {"n": 24, "half_width": 6.0},
            "initial": {"kind": "gaussian", "center": [0, 0], "sigma": 1.0, "mass": 1.0},
            "t_end": 0.002, "diag_every": 50,
            "output": {"dir": "out"}
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn ordered_rows() {
        let rows = sweep(&base(), &[0.5, 0.25]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].multiplier, 0.5);
        assert!((rows[1].mass_ratio - 0.25).abs() < 1e-12);
        assert!(rows.iter().all(|r| r.status == RunStatus::ReachedTEnd));
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf, "h").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().contains(",ReachedTEnd,"));
    }

    #[test]
    fn empty_list_is_an_error() {
        assert!(sweep(&base(), &[]).is_err());
        assert!(sweep(&base(), &[-1.0]).is_err());
    }
}

//! JSON run configuration shared by `simulate` and `sweep`.

use std::fmt;
use std::path::PathBuf;

use num_rational::Rational64;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::constants::{critical_mass, ConstantError};
use crate::fields::{discretize, ConvolutionMethod, DensityField, FieldError, Grid, KernelSpec, Profile};
use crate::regime::{parse_exponent, RegimeError, RegimeParams};
use crate::rng::CounterRng;
use crate::scalar::Exponent;
use crate::solver::{SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Regime(#[from] RegimeError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Constant(#[from] ConstantError),
}

/// An exponent read from JSON as a number or an `"a/b"` string and kept
/// exact. Serialized as a string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactParam(pub Rational64);

impl ExactParam {
    pub fn as_f64(&self) -> f64 {
        self.0.as_f64()
    }
}

impl Serialize for ExactParam {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ExactParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExactParam;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or an \"a/b\" string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExactParam, E> {
                parse_exponent(v).map(ExactParam).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExactParam, E> {
                Ok(ExactParam(Rational64::from_integer(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExactParam, E> {
                i64::try_from(v)
                    .map(|v| ExactParam(Rational64::from_integer(v)))
                    .map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExactParam, E> {
                // shortest round-trip form keeps the digits that were written
                self.visit_str(&v.to_string())
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    #[serde(default = "OutputSpec::default_diagnostics")]
    pub diagnostics: String,
    #[serde(default = "OutputSpec::default_summary")]
    pub summary: String,
    #[serde(default = "OutputSpec::default_snapshot_prefix")]
    pub snapshot_prefix: String,
}

impl OutputSpec {
    fn default_diagnostics() -> String {
        "diagnostics.csv".into()
    }

    fn default_summary() -> String {
        "summary.json".into()
    }

    fn default_snapshot_prefix() -> String {
        "snapshot".into()
    }
}

fn default_cfl() -> f64 {
    0.5
}

fn default_dt_min() -> f64 {
    1e-12
}

fn default_diag_every() -> usize {
    10
}

/// Contents of a run configuration file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub d: u32,
    pub p: ExactParam,
    pub alpha: ExactParam,
    /// `0` runs the p-heat equation.
    pub lambda: ExactParam,
    pub grid: GridSpec,
    pub initial: Profile,
    /// If set, the initial profile is rescaled to this multiple of the
    /// critical mass.
    #[serde(default)]
    pub mass_multiplier: Option<f64>,
    /// Relative amplitude of multiplicative uniform noise on the initial data.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default)]
    pub dt_cap: Option<f64>,
    #[serde(default)]
    pub rho_max: Option<f64>,
    #[serde(default = "default_diag_every")]
    pub diag_every: usize,
    #[serde(default)]
    pub moment_k: Option<f64>,
    /// Kernel regularization radius; defaults to `2 dx`.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub method: ConvolutionMethod,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    pub output: OutputSpec,
}

/// Inputs ready for [`crate::solver::run`].
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub params: RegimeParams<Rational64>,
    pub initial: DensityField<f64>,
    pub solver: SolverConfig<f64>,
    /// `None` where no critical mass is defined (`d = 1`).
    pub critical_mass: Option<f64>,
}

impl RunConfigFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Validated exact parameters; `lambda = 0` gives the p-heat equation.
    pub fn params(&self) -> Result<RegimeParams<Rational64>, ConfigError> {
        let zero = Rational64::from_integer(0);
        if self.lambda.0 == zero {
            let one = Rational64::from_integer(1);
            Ok(RegimeParams::validate(self.d, self.p.0, self.alpha.0, one)?.p_heat())
        } else {
            Ok(RegimeParams::validate(self.d, self.p.0, self.alpha.0, self.lambda.0)?)
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        config_hash(self)
    }

    pub fn prepare(&self) -> Result<PreparedRun, ConfigError> {
        let params = self.params()?;
        if self.grid.n > 4096 {
            return Err(ConfigError::Invalid(format!("grid.n = {} is too large", self.grid.n)));
        }
        let grid = Grid::new(self.d as usize, self.grid.half_width, self.grid.n)?;
        let float = params.convert(Exponent::as_f64);
        let m_c = if self.d >= 2 && float.lambda > 0.0 {
            Some(critical_mass::<f64, _>(&params)?.m_c)
        } else {
            None
        };
        let mut initial = discretize(&self.initial, &grid)?;
        if self.noise != 0.0 {
            if !(0.0..1.0).contains(&self.noise) {
                return Err(ConfigError::Invalid(format!("noise must lie in [0, 1), got {}", self.noise)));
            }
            let mut rng = CounterRng::new(self.seed);
            let values = initial
                .values()
                .iter()
                .map(|&v| v * (1.0 + self.noise * rng.uniform(-1.0, 1.0)))
                .collect();
            initial = DensityField::new(grid, values)?;
        }
        if let Some(mult) = self.mass_multiplier {
            let m_c = m_c.ok_or_else(|| {
                ConfigError::Invalid("mass_multiplier needs a critical mass (d >= 2, lambda > 0)".into())
            })?;
            if !(mult > 0.0) {
                return Err(ConfigError::Invalid(format!("mass_multiplier must be positive, got {mult}")));
            }
            initial = initial.rescale_to_mass(mult * m_c)?;
        }
        let mut solver = SolverConfig::new(float, grid, self.t_end)?;
        if let Some(eps) = self.eps {
            solver.kernel = KernelSpec::new(solver.kernel.alpha, eps)?;
        }
        solver.cfl = self.cfl;
        solver.delta = self.delta;
        solver.dt_min = self.dt_min;
        if let Some(cap) = self.dt_cap {
            solver.dt_cap = cap;
        }
        solver.rho_max = self.rho_max;
        solver.diag_every = self.diag_every;
        if let Some(k) = self.moment_k {
            solver.moment_k = k;
        }
        solver.method = self.method;
        solver.snapshot_times = self.snapshot_times.clone();
        solver.validate()?;
        Ok(PreparedRun {
            params,
            initial,
            solver,
            critical_mass: m_c,
        })
    }
}

/// SHA-256 hex digest of the JSON serialization of `value`.
pub fn config_hash<S: Serialize + ?Sized>(value: &S) -> String {
    let bytes = serde_json::to_vec(value).expect("configuration serializes to JSON");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "d": 2, "p": "5/3", "alpha": 1, "lambda": 1,
        "grid": {"n": 32, "half_width": 5.0},
        "initial": {"kind": "gaussian", "center": [0, 0], "sigma": 1.0, "mass": 1.0},
        "t_end": 0.01,
        "output": {"dir": "out"}
    }"#;

    #[test]
    fn parses_and_prepares() {
        let cfg = RunConfigFile::from_json(BASE).unwrap();
        assert_eq!(cfg.p.0, Rational64::new(5, 3));
        assert_eq!(cfg.cfl, 0.5);
        assert_eq!(cfg.output.summary, "summary.json");
        let run = cfg.prepare().unwrap();
        assert!((run.critical_mass.unwrap() - 2.683672169669775).abs() < 1e-12);
        assert!((run.initial.mass() - 1.0).abs() < 1e-5);
        assert_eq!(run.solver.kernel.eps, 2.0 * run.solver.grid.dx());
    }

    #[test]
    fn decimal_exponent_snaps() {
        let text = BASE.replace(r#""5/3""#, "1.6666667");
        let cfg = RunConfigFile::from_json(&text).unwrap();
        assert_eq!(cfg.p.0, Rational64::new(5, 3));
    }

    #[test]
    fn mass_multiplier_and_noise() {
        let text = BASE.replace(r#""t_end""#, r#""mass_multiplier": 0.5, "noise": 0.1, "seed": 3, "t_end""#);
        let run = RunConfigFile::from_json(&text).unwrap().prepare().unwrap();
        assert!((run.initial.mass() - 0.5 * run.critical_mass.unwrap()).abs() < 1e-12);
        let again = RunConfigFile::from_json(&text).unwrap().prepare().unwrap();
        assert_eq!(run.initial.values(), again.initial.values());
    }

    #[test]
    fn p_heat_from_zero_lambda() {
        let text = BASE.replace(r#""lambda": 1"#, r#""lambda": 0"#);
        let run = RunConfigFile::from_json(&text).unwrap().prepare().unwrap();
        assert_eq!(run.solver.params.lambda, 0.0);
        assert!(run.critical_mass.is_none());
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        let text = BASE.replace(r#""t_end""#, r#""colour": 1, "t_end""#);
        assert!(matches!(RunConfigFile::from_json(&text), Err(ConfigError::Parse(_))));
        let text = BASE.replace(r#""5/3""#, r#""6/5""#);
        assert!(matches!(RunConfigFile::from_json(&text).unwrap().prepare(), Err(ConfigError::Regime(_))));
        let text = BASE.replace(r#""t_end": 0.01"#, r#""t_end": 0.01, "cfl": 2"#);
        assert!(matches!(RunConfigFile::from_json(&text).unwrap().prepare(), Err(ConfigError::Solver(_))));
        assert!(RunConfigFile::from_json("{").is_err());
    }

    #[test]
    fn hash_is_stable() {
        let a = RunConfigFile::from_json(BASE).unwrap();
        let b = RunConfigFile::from_json(&BASE.replace("0.01", "1e-2")).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = RunConfigFile::from_json(&BASE.replace("0.01", "0.02")).unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}

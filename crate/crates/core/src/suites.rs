//! Verification suites run by `plad verify`.
//!
//! Random inputs come from [`CounterRng`] substreams, one per sample, so a
//! sample's field and exponents depend only on `(seed, index)`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::constants::{self, oracle, ConstantError};
use crate::fields::{discretize, DensityField, FieldError, Grid, Profile};
use crate::functionals::{
    bracket, check_gns, entropy_lower_bound_check, moment_lemma, nu_k, EntropyBound, FunctionalError, Inequality,
};
use crate::regime::{alpha_p, p_window, RegimeError, RegimeParams};
use crate::rng::CounterRng;
use crate::solver::{run, SolverConfig, SolverError};

/// Slack allowed on inequality ratios.
pub const RATIO_TOL: f64 = 1e-3;
/// Relative agreement required between closed forms and oracles.
pub const CONSTANT_TOL: f64 = 1e-5;
/// Largest admissible relative entropy-dissipation residual.
pub const DISSIPATION_TOL: f64 = 0.02;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}` (expected gns, moment, entropy-bound, constants or dissipation)")]
    UnknownSuite(String),
    #[error("sample count must be positive")]
    NoSamples,
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Constant(#[from] ConstantError),
    #[error(transparent)]
    Regime(#[from] RegimeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Gns,
    Moment,
    EntropyBound,
    Constants,
    Dissipation,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Gns,
        Suite::Moment,
        Suite::EntropyBound,
        Suite::Constants,
        Suite::Dissipation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Gns => "gns",
            Suite::Moment => "moment",
            Suite::EntropyBound => "entropy-bound",
            Suite::Constants => "constants",
            Suite::Dissipation => "dissipation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| SuiteError::UnknownSuite(s.to_string()))
    }
}

/// One checked inequality or comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub field_id: String,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `≤ 1` means the check holds (up to its tolerance).
    pub ratio: f64,
    pub pass: bool,
}

impl SuiteRow {
    fn inequality(field_id: &str, check: String, ineq: Inequality<f64>) -> Self {
        let ratio = ineq.ratio();
        Self {
            field_id: field_id.to_string(),
            check,
            lhs: ineq.lhs,
            rhs: ineq.rhs,
            ratio,
            pass: ratio.is_finite() && ratio <= 1.0 + RATIO_TOL,
        }
    }

    fn entropy(field_id: &str, check: String, b: &EntropyBound<f64>, tight: bool) -> Self {
        let ratio = 1.0 + (b.bound - b.entropy) / b.scale();
        let pass = if tight {
            b.gap().abs() <= RATIO_TOL * b.scale()
        } else {
            b.holds(RATIO_TOL)
        };
        Self {
            field_id: field_id.to_string(),
            check,
            lhs: b.bound,
            rhs: b.entropy,
            ratio,
            pass,
        }
    }

    fn agreement(field_id: String, check: &str, value: f64, reference: f64, tol: f64) -> Self {
        let ratio = value / reference;
        Self {
            field_id,
            check: check.to_string(),
            lhs: value,
            rhs: reference,
            ratio,
            pass: (ratio - 1.0).abs() <= tol,
        }
    }
}

/// A random Gaussian mixture on its grid.
#[derive(Debug, Clone)]
pub struct CorpusField {
    pub id: String,
    pub profile: Profile,
    pub field: DensityField<f64>,
    /// Stream positioned after the profile draws, for per-sample exponents.
    pub rng: CounterRng,
}

/// Grid used for corpus fields of dimension `d`.
pub fn corpus_grid(d: usize) -> Grid<f64> {
    match d {
        1 => Grid::new(1, 10.0, 1024),
        _ => Grid::new(2, 7.0, 128),
    }
    .expect("corpus grids are valid")
}

/// Sample `index`: 1 to 3 Gaussians with centers in `[-1.5, 1.5]^d`, widths
/// in `[0.4, 1]` and masses in `[0.2, 1]`.
pub fn corpus_field(seed: u64, index: u64, d: usize) -> Result<CorpusField, FieldError> {
    let mut rng = CounterRng::new(seed).substream(index);
    let count = rng.int_in(1, 3);
    let components = (0..count)
        .map(|_| {
            let center: Vec<f64> = (0..d).map(|_| rng.uniform(-1.5, 1.5)).collect();
            let sigma = rng.uniform(0.4, 1.0);
            let mass = rng.uniform(0.2, 1.0);
            Profile::gaussian(&center, sigma, mass)
        })
        .collect();
    let profile = Profile::Mixture { components };
    let field = discretize(&profile, &corpus_grid(d))?;
    Ok(CorpusField {
        id: format!("s{seed}-{index:03}-d{d}"),
        profile,
        field,
        rng,
    })
}

/// `samples` corpus fields, cycling through `dims`.
pub fn corpus(seed: u64, samples: usize, dims: &[usize]) -> Result<Vec<CorpusField>, FieldError> {
    (0..samples)
        .map(|i| corpus_field(seed, i as u64, dims[i % dims.len()]))
        .collect()
}

/// A point strictly inside the open p-window of dimension `d`.
fn inner_p(rng: &mut CounterRng, d: u32) -> f64 {
    let (lo, hi) = p_window::<f64>(d);
    lo + (hi - lo) * rng.uniform(0.05, 0.95)
}

fn gns_rows(seed: u64, samples: usize) -> Result<Vec<SuiteRow>, SuiteError> {
    let mut rows = Vec::with_capacity(samples);
    for mut s in corpus(seed, samples, &[2])? {
        let p = inner_p(&mut s.rng, 2);
        let params = RegimeParams::validate(2, p, 1.0, 1.0)?;
        let r = params.r.expect("p < d in two dimensions");
        let q = s.rng.uniform(1.0, r);
        let ineq = check_gns(&s.field, &params, q)?;
        rows.push(SuiteRow::inequality(&s.id, format!("gns p={p:.6} q={q:.6}"), ineq));
    }
    Ok(rows)
}

fn moment_rows(seed: u64, samples: usize) -> Result<Vec<SuiteRow>, SuiteError> {
    let mut rows = Vec::with_capacity(2 * samples);
    for mut s in corpus(seed, samples, &[1, 2])? {
        let d = s.field.grid().dim() as u32;
        let p = inner_p(&mut s.rng, d);
        let k = alpha_p(d, p) * s.rng.uniform(0.05, 0.95);
        let ineq = moment_lemma(&s.field, p, k)?;
        rows.push(SuiteRow::inequality(&s.id, format!("moment p<2 p={p:.6} k={k:.6}"), ineq));
        let p = s.rng.uniform(2.0, 3.0);
        let k = s.rng.uniform(0.05, 1.0);
        let ineq = moment_lemma(&s.field, p, k)?;
        rows.push(SuiteRow::inequality(&s.id, format!("moment p>=2 p={p:.6} k={k:.6}"), ineq));
    }
    Ok(rows)
}

/// `M e^{-ν_k ⟨x⟩^k}`, for which the entropy bound is an equality.
pub fn equality_profile(d: usize, k: f64, mass: f64) -> Result<DensityField<f64>, SuiteError> {
    let nu = nu_k(d as u32, k)?;
    let grid = match d {
        1 => Grid::new(1, 40.0, 4096)?,
        _ => Grid::new(2, 30.0, 512)?,
    };
    Ok(DensityField::from_fn(grid, |x: [f64; 2]| mass * (-nu * bracket(x).powf(k)).exp())?)
}

fn entropy_rows(seed: u64, samples: usize) -> Result<Vec<SuiteRow>, SuiteError> {
    let mut rows = Vec::with_capacity(samples + 2);
    for mut s in corpus(seed, samples, &[1, 2])? {
        let k = s.rng.uniform(0.2, 1.0);
        let b = entropy_lower_bound_check(&s.field, k)?;
        rows.push(SuiteRow::entropy(&s.id, format!("entropy-bound k={k:.6}"), &b, false));
    }
    for d in [1, 2] {
        let f = equality_profile(d, 1.0, 1.7)?;
        let b = entropy_lower_bound_check(&f, 1.0)?;
        rows.push(SuiteRow::entropy(&format!("equality-d{d}"), "entropy-bound tight k=1".into(), &b, true));
    }
    Ok(rows)
}

/// `(d, q)` pairs for the Sobolev comparison.
pub const SOBOLEV_PAIRS: [(u32, f64); 7] = [
    (3, 2.0),
    (2, 1.5),
    (2, 5.0 / 3.0),
    (3, 1.5),
    (4, 2.0),
    (3, 2.5),
    (2, 1.2),
];

/// `(d, α)` pairs for the HLS comparison.
pub const HLS_PAIRS: [(u32, f64); 7] = [(2, 1.0), (3, 2.0), (2, 0.5), (2, 1.5), (3, 1.0), (1, 0.5), (4, 2.0)];

fn constant_rows() -> Result<Vec<SuiteRow>, SuiteError> {
    let mut rows = Vec::new();
    for (d, q) in SOBOLEV_PAIRS {
        rows.push(SuiteRow::agreement(
            format!("sobolev-d{d}-q{q:.6}"),
            "closed form / oracle",
            constants::sobolev_constant(d, q)?,
            oracle::sobolev_constant(d, q)?,
            CONSTANT_TOL,
        ));
    }
    for (d, alpha) in HLS_PAIRS {
        rows.push(SuiteRow::agreement(
            format!("hls-d{d}-alpha{alpha:.6}"),
            "closed form / oracle",
            constants::hls_constant(d, alpha)?,
            oracle::hls_constant(d, alpha)?,
            CONSTANT_TOL,
        ));
    }
    for (p, alpha) in [(5.0 / 3.0, 1.0), (1.8, 0.5), (1.5, 1.2)] {
        let base = constants::critical_mass::<f64, f64>(&RegimeParams::validate(2, p, alpha, 1.0)?)?.m_c;
        for lambda in [0.5, 2.0, 4.0] {
            let m = constants::critical_mass::<f64, f64>(&RegimeParams::validate(2, p, alpha, lambda)?)?.m_c;
            rows.push(SuiteRow::agreement(
                format!("critical-mass-d2-p{p:.6}-lambda{lambda}"),
                "M_c(lambda) / M_c(1) lambda^(-1/(3-p))",
                m,
                base * lambda.powf(-1.0 / (3.0 - p)),
                1e-12,
            ));
        }
    }
    Ok(rows)
}

fn dissipation_rows(seed: u64, samples: usize) -> Result<Vec<SuiteRow>, SuiteError> {
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut rng = CounterRng::new(seed).substream(i as u64);
        // small p makes δ^{p-2} and hence the explicit step prohibitive
        let p = rng.uniform(1.3, 1.45);
        let ap = alpha_p(1, p);
        let alpha = rng.uniform((1.0 - ap).max(0.0) + 0.05, 0.95);
        let lambda = if i % 2 == 0 { 0.0 } else { rng.uniform(0.1, 1.0) };
        let sigma = rng.uniform(0.8, 1.2);
        let mass = rng.uniform(0.5, 1.5);
        let params = RegimeParams::validate(1, p, alpha, 1.0)?;
        let params = if lambda == 0.0 {
            params.p_heat()
        } else {
            params.with_lambda(lambda)?
        };
        let grid = Grid::new(1, 8.0, 256)?;
        let mut cfg = SolverConfig::new(params, grid, 2e-4)?;
        cfg.diag_every = 100;
        let initial = discretize(&Profile::gaussian(&[0.0], sigma, mass), &grid)?;
        let traj = run(&initial, &cfg)?;
        let worst = traj
            .rows
            .iter()
            .filter_map(|r| r.relative_residual)
            .fold(0.0, f64::max);
        rows.push(SuiteRow {
            field_id: format!("s{seed}-{i:03}-d1"),
            check: format!("dissipation p={p:.6} alpha={alpha:.6} lambda={lambda:.6}"),
            lhs: worst,
            rhs: DISSIPATION_TOL,
            ratio: worst / DISSIPATION_TOL,
            pass: worst <= DISSIPATION_TOL,
        });
    }
    Ok(rows)
}

/// Runs `suite`. `samples` and `seed` are ignored by the deterministic
/// constants suite.
pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Result<Vec<SuiteRow>, SuiteError> {
    if samples == 0 && suite != Suite::Constants {
        return Err(SuiteError::NoSamples);
    }
    match suite {
        Suite::Gns => gns_rows(seed, samples),
        Suite::Moment => moment_rows(seed, samples),
        Suite::EntropyBound => entropy_rows(seed, samples),
        Suite::Constants => constant_rows(),
        Suite::Dissipation => dissipation_rows(seed, samples),
    }
}

pub const SUITE_CSV_HEADER: &str = "field_id,check,lhs,rhs,ratio,pass";

pub fn write_suite_csv<W: Write>(rows: &[SuiteRow], mut w: W, config_hash: &str) -> std::io::Result<()> {
    writeln!(w, "{SUITE_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.field_id, r.check, r.lhs, r.rhs, r.ratio, r.pass)?;
    }
    writeln!(w, "# config-hash: {config_hash}")
}

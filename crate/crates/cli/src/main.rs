use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use plad::config::{config_hash, ConfigError, RunConfigFile};
use plad::constants::critical_mass;
use plad::fields::io::write_plad;
use plad::regime::{is_keller_segel_point, parse_exponent, RegimeParams};
use plad::scalar::Exponent;
use plad::solver::{run, SolverError};
use plad::suites::{run_suite, write_suite_csv, Suite, SuiteError};
use plad::sweep::{sweep, write_sweep_csv};
use plad::Rational;

/// Simulation and verification for p-Laplacian aggregation-diffusion.
#[derive(Debug, Parser)]
#[command(name = "plad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify (d, p, alpha, lambda) and print exponents and constants as JSON.
    Classify {
        #[arg(long)]
        d: u32,
        /// Decimal or `a/b`
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Run one simulation from a JSON config.
    Simulate { config: PathBuf },
    /// Run a config at several multiples of the critical mass.
    Sweep {
        config: PathBuf,
        /// Comma-separated multipliers of the critical mass
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        multipliers: Vec<f64>,
        /// Summary CSV path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and print a pass/fail CSV.
    Verify {
        #[arg(long, value_parser = ["gns", "moment", "entropy-bound", "constants", "dissipation"])]
        suite: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report CSV path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    /// Bad input: exit code 2.
    Invalid(String),
    /// The computation or output failed: exit code 3.
    Runtime(String),
}

impl Failure {
    fn invalid(e: impl ToString) -> Self {
        Failure::Invalid(e.to_string())
    }

    fn runtime(e: impl ToString) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Solver(SolverError::InvalidConfig(_)) | ConfigError::Solver(SolverError::Field(_)) => {
                Failure::invalid(e)
            }
            ConfigError::Solver(_) => Failure::runtime(e),
            _ => Failure::invalid(e),
        }
    }
}

impl From<SuiteError> for Failure {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::UnknownSuite(_) | SuiteError::NoSamples => Failure::invalid(e),
            _ => Failure::runtime(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Classify { d, p, alpha, lambda } => classify(d, &p, &alpha, &lambda),
        Command::Simulate { config } => simulate(&config),
        Command::Sweep {
            config,
            multipliers,
            out,
        } => run_sweep(&config, &multipliers, out.as_deref()),
        Command::Verify {
            suite,
            samples,
            seed,
            out,
        } => verify(&suite, samples, seed, out.as_deref()),
    });
    match result {
        Ok(code) => code,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("PLAD_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::invalid(format!("PLAD_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(Failure::runtime)
}

fn exact(r: &Rational) -> Value {
    json!(r.to_string())
}

fn classify(d: u32, p: &str, alpha: &str, lambda: &str) -> Result<ExitCode, Failure> {
    let p = parse_exponent(p).map_err(Failure::invalid)?;
    let alpha = parse_exponent(alpha).map_err(Failure::invalid)?;
    let lambda = parse_exponent(lambda).map_err(Failure::invalid)?;
    let params = RegimeParams::validate(d, p, alpha, lambda).map_err(Failure::invalid)?;
    let (k_lo, k_hi) = params.moment_window();
    let constants = match critical_mass::<f64, _>(&params) {
        Ok(c) => json!({
            "c_dp": c.c_dp,
            "m_c": c.m_c,
            "sobolev": c.sobolev,
            "hls": c.hls,
        }),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let report = json!({
        "d": d,
        "p": exact(&params.p),
        "alpha": exact(&params.alpha),
        "lambda": exact(&params.lambda),
        "regime": params.regime().to_string(),
        "alpha_p": exact(&params.alpha_p),
        "alpha_p_value": params.alpha_p.as_f64(),
        "p_conj": exact(&params.p_conj),
        "p_star": params.p_star.as_ref().map(exact),
        "r": params.r.as_ref().map(exact),
        "moment_window": [exact(&k_lo), exact(&k_hi)],
        "keller_segel_point": is_keller_segel_point(d, params.p, params.alpha),
        "warnings": params.warnings.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "constants": constants,
    });
    println!("{}", serde_json::to_string_pretty(&report).map_err(Failure::runtime)?);
    Ok(ExitCode::SUCCESS)
}

fn load_config(path: &Path) -> Result<RunConfigFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    Ok(RunConfigFile::from_json(&text)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn simulate(path: &Path) -> Result<ExitCode, Failure> {
    let cfg = load_config(path)?;
    let prepared = cfg.prepare()?;
    let hash = cfg.hash();
    let traj = run(&prepared.initial, &prepared.solver).map_err(Failure::runtime)?;

    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
    let mut w = create(&dir.join(&cfg.output.diagnostics))?;
    traj.write_csv(&mut w, &hash).map_err(Failure::runtime)?;
    w.flush().map_err(Failure::runtime)?;

    let mut snapshots = Vec::new();
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let name = format!("{}_{i:04}.plad", cfg.output.snapshot_prefix);
        let mut w = create(&dir.join(&name))?;
        write_plad(&snap.field, &mut w).map_err(Failure::runtime)?;
        w.flush().map_err(Failure::runtime)?;
        snapshots.push(json!({ "t": snap.t, "file": name }));
    }

    let mass = prepared.initial.mass();
    let last = traj.rows.last().expect("trajectory has rows");
    let summary = json!({
        "status": traj.status.label(),
        "status_time": match traj.status {
            plad::solver::RunStatus::ReachedTEnd => None,
            plad::solver::RunStatus::BlowUpIndicator { t } | plad::solver::RunStatus::DtCollapse { t } => Some(t),
        },
        "t_final": last.t,
        "steps": traj.steps,
        "mass": mass,
        "critical_mass": prepared.critical_mass,
        "mass_over_critical": prepared.critical_mass.map(|m| mass / m),
        "mass_drift": traj.mass_drift(),
        "max_density": traj.max_density(),
        "max_entropy": traj.max_entropy(),
        "min_density": traj.rows.iter().map(|r| r.min_density).fold(f64::INFINITY, f64::min),
        "delta": traj.delta,
        "rho_max": traj.rho_max,
        "boundary_valid": traj.boundary_valid(),
        "max_boundary_fraction": traj.max_boundary_fraction,
        "snapshots": snapshots,
        "config_hash": hash,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(Failure::runtime)?;
    fs::write(dir.join(&cfg.output.summary), format!("{text}\n")).map_err(Failure::runtime)?;
    println!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn write_to<F>(out: Option<&Path>, f: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let mut w = create(path)?;
            f(&mut w).and_then(|()| w.flush()).map_err(Failure::runtime)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(Failure::runtime)
        }
    }
}

fn run_sweep(path: &Path, multipliers: &[f64], out: Option<&Path>) -> Result<ExitCode, Failure> {
    let cfg = load_config(path)?;
    if multipliers.is_empty() {
        return Err(Failure::invalid("empty multiplier list"));
    }
    let rows = sweep(&cfg, multipliers)?;
    let hash = config_hash(&json!({ "config": cfg, "multipliers": multipliers }));
    write_to(out, |w| write_sweep_csv(&rows, w, &hash))?;
    Ok(ExitCode::SUCCESS)
}

fn verify(suite: &str, samples: usize, seed: u64, out: Option<&Path>) -> Result<ExitCode, Failure> {
    let suite: Suite = suite.parse()?;
    let rows = run_suite(suite, samples, seed)?;
    let hash = config_hash(&json!({ "suite": suite.name(), "samples": samples, "seed": seed }));
    write_to(out, |w| write_suite_csv(&rows, w, &hash))?;
    let passed = rows.iter().filter(|r| r.pass).count();
    eprintln!("{suite}: {passed}/{} passed", rows.len());
    Ok(if passed == rows.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

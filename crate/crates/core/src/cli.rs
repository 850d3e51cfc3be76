//! The `dicke-ed` command line.
//!
//! Exit codes: 0 on success, 1 when verification or a run fails, 2 on usage
//! errors (bad flags, malformed config files, unknown names).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::acceptance;
use crate::analytics::{self, Branch};
use crate::dicke::{ModelParams, DEFAULT_EPSILON};
use crate::error::Error;
use crate::hilbert::SpinLength;
use crate::sweep::{self, fmt_f64, Grid, SweepConfig};

#[derive(Parser, Debug)]
#[command(name = "dicke-ed", version, about = "Exact diagonalization of the Dicke model and its limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one parameter point and print its observables as key=value.
    Ground(GroundArgs),
    /// Run a κ sweep from a config file and write CSV.
    Sweep(SweepArgs),
    /// Tabulate a closed-form curve as CSV.
    Analytic(AnalyticArgs),
    /// Run acceptance criteria.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct GroundArgs {
    #[arg(long = "two_j", alias = "two-j")]
    two_j: u32,
    #[arg(long = "omega_over_delta", alias = "omega-over-delta")]
    omega_over_delta: f64,
    #[arg(long)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Symmetry-breaking field; defaults to 1e-4·delta.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "max_nb", alias = "max-nb", default_value_t = crate::eigensolver::MAX_CUTOFF)]
    max_nb: usize,
    /// One-sided susceptibility reusing the record's own solve.
    #[arg(long)]
    fast: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// key=value config file; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; overrides the config, stdout if neither is set.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    fast: bool,
    /// Write 0 in the wall_time_ms column so reruns are byte-identical.
    #[arg(long = "no-timing", alias = "no_timing")]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    /// One of: order_parameter, susceptibility, mf_energy,
    /// oscillator_variance, cs_entropy, co_entropy, spin_variance,
    /// rabi_delta, rabi_susceptibility, rabi_entropy.
    #[arg(long)]
    curve: String,
    /// κ grid, `start:stop:step` or a comma list.
    #[arg(long)]
    kappa: Option<String>,
    /// ξ grid for the rabi_* curves.
    #[arg(long)]
    xi: Option<String>,
    #[arg(long = "two_j", alias = "two-j", default_value_t = 1)]
    two_j: u32,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// mf, mf-co (alias co), cs, fo, squeezed, rabi, properties or all.
    #[arg(long, default_value = "all")]
    suite: String,
}

/// Curves available to `analytic`, with the grid variable they use.
pub const CURVES: &[(&str, &str)] = &[
    ("order_parameter", "kappa"),
    ("susceptibility", "kappa"),
    ("mf_energy", "kappa"),
    ("oscillator_variance", "kappa"),
    ("cs_entropy", "kappa"),
    ("co_entropy", "kappa"),
    ("spin_variance", "kappa"),
    ("rabi_delta", "xi"),
    ("rabi_susceptibility", "xi"),
    ("rabi_entropy", "xi"),
];

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Ground(a) => ground(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Analytic(a) => analytic(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}

fn ground(a: GroundArgs) -> Result<i32, Failure> {
    let spin = SpinLength::new(a.two_j).map_err(|e| Failure::Usage(e.to_string()))?;
    ModelParams::with_kappa(spin, a.delta, a.omega_over_delta * a.delta, a.kappa)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let cfg = SweepConfig {
        kappa: Grid::List(vec![a.kappa]),
        two_j: a.two_j,
        omega_over_delta: a.omega_over_delta,
        delta: a.delta,
        epsilon: a.epsilon.unwrap_or(DEFAULT_EPSILON * a.delta),
        window: 0.0,
        tol: a.tol,
        seed: a.seed,
        max_nb: a.max_nb,
        fast: a.fast,
        ..Default::default()
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let (r, converged) = sweep::full_point(a.kappa, &cfg)?;
    let mut out = std::io::stdout().lock();
    let lines = [
        ("kappa", fmt_f64(r.kappa)),
        ("lambda", fmt_f64(r.lambda)),
        ("two_j", r.two_j.to_string()),
        ("omega_over_delta", fmt_f64(r.omega_over_delta)),
        ("epsilon", fmt_f64(r.epsilon)),
        ("boson_cutoff", r.boson_cutoff.to_string()),
        ("energy", fmt_f64(r.energy)),
        ("jx", fmt_f64(r.jx)),
        ("jx_over_j", fmt_f64(r.jx_over_j)),
        ("chi", fmt_f64(r.chi)),
        ("delta_q", fmt_f64(r.delta_q)),
        ("delta_j", fmt_f64(r.delta_j)),
        ("entropy_nats", fmt_f64(r.entropy_nats)),
        ("parity", fmt_f64(r.parity)),
        ("occupancy", fmt_f64(r.occupancy)),
        ("converged", converged.to_string()),
    ];
    for (k, v) in lines {
        writeln!(out, "{k}={v}").map_err(|e| Failure::Run(e.to_string()))?;
    }
    Ok(if converged { 0 } else { 1 })
}

fn run_sweep(a: SweepArgs) -> Result<i32, Failure> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            sweep::parse_config(&text)?
        }
        None => SweepConfig::default(),
    };
    if a.output.is_some() {
        cfg.output = a.output;
    }
    cfg.fast |= a.fast;
    if a.no_timing {
        cfg.timing = false;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let rows = sweep::run_sweep(&cfg)?;
    let flagged = rows.iter().filter(|r| r.status.is_some()).count();
    if flagged > 0 {
        eprintln!("warning: {flagged} of {} points flagged; see the status column", rows.len());
    }
    match &cfg.output {
        Some(path) => sweep::write_csv(path, &rows)?,
        None => print!("{}", sweep::to_csv(&rows)),
    }
    Ok(0)
}

/// Evaluates a named closed-form curve at one grid value.
pub fn curve_value(curve: &str, x: f64, j: f64, delta: f64) -> Option<f64> {
    Some(match curve {
        "order_parameter" => analytics::mf_order_parameter(x, 1.0, Branch::Positive),
        "susceptibility" => analytics::mf_susceptibility(x),
        "mf_energy" => analytics::mf_energy(analytics::mf_theta(x, Branch::Positive), x, j, delta),
        "oscillator_variance" => analytics::co_oscillator_variance(x),
        "cs_entropy" => analytics::cs_entropy_divergence(x),
        "co_entropy" => analytics::co_entropy(x, j),
        "spin_variance" => analytics::fo_spin_variance(x),
        "rabi_delta" => analytics::rabi_renormalized_delta(x, delta),
        "rabi_susceptibility" => analytics::rabi_fo_susceptibility(x, delta),
        "rabi_entropy" => analytics::rabi_fo_entropy(x),
        _ => return None,
    })
}

fn analytic(a: AnalyticArgs) -> Result<i32, Failure> {
    let variable = CURVES
        .iter()
        .find(|(name, _)| *name == a.curve)
        .map(|(_, var)| *var)
        .ok_or_else(|| {
            let names: Vec<&str> = CURVES.iter().map(|(n, _)| *n).collect();
            Failure::Usage(format!("unknown curve `{}`; expected one of {}", a.curve, names.join(", ")))
        })?;
    let values = match variable {
        "kappa" => a.kappa.as_deref(),
        _ => a.xi.as_deref(),
    }
    .ok_or_else(|| Failure::Usage(format!("curve `{}` needs --{variable}", a.curve)))?;
    let grid: Grid = values.parse().map_err(Failure::Usage)?;
    let j = SpinLength::new(a.two_j).map_err(|e| Failure::Usage(e.to_string()))?.j();
    if !(a.delta > 0.0) {
        return Err(Failure::Usage("delta must be positive".into()));
    }
    let mut text = format!("{variable},{}\n", a.curve);
    for x in grid.points() {
        let y = curve_value(&a.curve, x, j, a.delta).expect("curve name checked");
        text.push_str(&format!("{},{}\n", fmt_f64(x), fmt_f64(y)));
    }
    match a.output {
        Some(path) => std::fs::write(&path, text).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<i32, Failure> {
    let ids = acceptance::suite(&a.suite).ok_or_else(|| {
        let names: Vec<&str> = acceptance::SUITES.iter().map(|(n, _)| *n).collect();
        Failure::Usage(format!("unknown suite `{}`; expected one of {}", a.suite, names.join(", ")))
    })?;
    let mut failed = 0;
    for &id in ids {
        let r = acceptance::run_criterion(id).expect("suite ids are valid");
        print!("{r}");
        let _ = std::io::stdout().flush();
        if !r.passed() {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", ids.len() - failed, ids.len());
    Ok(if failed == 0 { 0 } else { 1 })
}

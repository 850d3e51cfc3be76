//! Parameter sweeps over `κ` and their CSV output.
//!
//! Config files hold `key=value` lines; `#` starts a comment. Recognized
//! keys:
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `kappa` | `0:2:0.05` | comma list or `start:stop:step` |
//! | `two_j` | `10` | twice the spin length |
//! | `omega_over_delta` | `1` | |
//! | `delta` | `1` | |
//! | `epsilon` | `1e-4·delta` | symmetry-breaking field |
//! | `window` | `0.02` | points with `|κ−1| < window` are skipped |
//! | `tol` | `1e-12` | Lanczos tolerance |
//! | `seed` | `42` | Lanczos start vector seed |
//! | `tail_tol` | `1e-12` | boson tail-weight bound |
//! | `max_nb` | `16384` | largest boson cutoff |
//! | `mode` | `full` | `full`, `lmg`, `bos_effective` or `analytic` |
//! | `fast` | `false` | one-sided susceptibility |
//! | `timing` | `true` | record wall time; `false` writes `0` |
//! | `output` | none | CSV path |
//!
//! Points are solved in parallel. The worker count comes from the
//! `DICKE_WORKERS` environment variable, or all available processors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::analytics::{self, Branch};
use crate::dicke::{ModelParams, DEFAULT_EPSILON};
use crate::effective_models::{
    above_threshold_alpha, build_bos_above, build_bos_below, build_lmg_with_field, displaced_cutoff, fock_q_moments,
};
use crate::eigensolver::{converge_cutoff, solve_ground, suggested_start_cutoff, LanczosConfig, SolverConfig, MAX_CUTOFF};
use crate::error::{Error, Result};
use crate::hilbert::SpinLength;
use crate::observables::{order_parameter, susceptibility_on_basis, ObservableRecord, SusceptibilityConfig};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "DICKE_WORKERS";

pub const CSV_HEADER: &str = "kappa,lambda,two_j,omega_over_delta,epsilon,boson_cutoff,energy,jx,jx_over_j,chi,delta_q,delta_j,entropy_nats,parity,occupancy,mode,wall_time_ms";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Full,
    Lmg,
    BosEffective,
    Analytic,
}

impl SweepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::Full => "full",
            SweepMode::Lmg => "lmg",
            SweepMode::BosEffective => "bos_effective",
            SweepMode::Analytic => "analytic",
        }
    }
}

impl FromStr for SweepMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(SweepMode::Full),
            "lmg" => Ok(SweepMode::Lmg),
            "bos_effective" => Ok(SweepMode::BosEffective),
            "analytic" => Ok(SweepMode::Analytic),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// A `κ` grid, either listed or as an inclusive arithmetic range.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    /// Grid points in ascending order, duplicates removed.
    pub fn points(&self) -> Vec<f64> {
        let mut pts = match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                // Rounded so `0:2:0.1` yields 0.3, not 0.30000000000000004.
                (0..=n).map(|i| round12(start + i as f64 * step)).collect()
            }
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", t.trim()));
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("range `{s}` must be start:stop:step"));
            }
            let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || !(stop >= start) {
                return Err(format!("range `{s}` needs step > 0 and stop >= start"));
            }
            Ok(Grid::Range { start, stop, step })
        } else {
            let values = s.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?;
            if values.is_empty() {
                return Err("empty grid".into());
            }
            Ok(Grid::List(values))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub kappa: Grid,
    pub two_j: u32,
    pub omega_over_delta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub window: f64,
    pub tol: f64,
    pub seed: u64,
    pub tail_tol: f64,
    pub max_nb: usize,
    pub mode: SweepMode,
    pub fast: bool,
    pub timing: bool,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kappa: Grid::Range {
                start: 0.0,
                stop: 2.0,
                step: 0.05,
            },
            two_j: 10,
            omega_over_delta: 1.0,
            delta: 1.0,
            epsilon: DEFAULT_EPSILON,
            window: 0.02,
            tol: 1e-12,
            seed: 42,
            tail_tol: 1e-12,
            max_nb: MAX_CUTOFF,
            mode: SweepMode::Full,
            fast: false,
            timing: true,
            output: None,
        }
    }
}

impl SweepConfig {
    /// Grid points with the window around `κ = 1` removed.
    pub fn grid(&self) -> Vec<f64> {
        self.kappa
            .points()
            .into_iter()
            .filter(|k| self.window == 0.0 || (k - 1.0).abs() >= self.window - 1e-12)
            .collect()
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            lanczos: LanczosConfig {
                tol: self.tol,
                seed: self.seed,
                ..Default::default()
            },
            tail_tol: self.tail_tol,
            max_cutoff: self.max_nb,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.grid().is_empty() {
            return bad("kappa grid is empty after the window exclusion".into());
        }
        if self.grid().iter().any(|k| !(*k >= 0.0)) {
            return bad("kappa values must be non-negative".into());
        }
        if !(self.window >= 0.0) {
            return bad(format!("window must be non-negative, got {}", self.window));
        }
        if !(self.delta > 0.0) || !(self.omega_over_delta >= 0.0) {
            return bad("need delta > 0 and omega_over_delta >= 0".into());
        }
        if self.omega_over_delta == 0.0 && self.mode != SweepMode::Analytic {
            return bad("omega_over_delta = 0 is only meaningful in analytic mode".into());
        }
        if self.max_nb < 8 || self.max_nb > MAX_CUTOFF {
            return bad(format!("max_nb must lie in [8, {MAX_CUTOFF}], got {}", self.max_nb));
        }
        SpinLength::new(self.two_j)?;
        Ok(())
    }
}

/// Parses a config file; every error names its line.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::default();
    let mut epsilon_set = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config {
            line: line_no,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        fn num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value.parse().map_err(|_| format!("`{key}` expects a number, got `{value}`"))
        }
        fn flag(key: &str, value: &str) -> std::result::Result<bool, String> {
            value.parse().map_err(|_| format!("`{key}` expects true or false, got `{value}`"))
        }
        let applied: std::result::Result<(), String> = match key {
            "kappa" => value.parse().map(|g| cfg.kappa = g),
            "two_j" => num(key, value).map(|v| cfg.two_j = v),
            "omega_over_delta" => num(key, value).map(|v| cfg.omega_over_delta = v),
            "delta" => num(key, value).map(|v| cfg.delta = v),
            "epsilon" => num(key, value).map(|v| {
                cfg.epsilon = v;
                epsilon_set = true;
            }),
            "window" => num(key, value).map(|v| cfg.window = v),
            "tol" => num(key, value).map(|v| cfg.tol = v),
            "seed" => num(key, value).map(|v| cfg.seed = v),
            "tail_tol" => num(key, value).map(|v| cfg.tail_tol = v),
            "max_nb" => num(key, value).map(|v| cfg.max_nb = v),
            "mode" => value.parse().map(|m| cfg.mode = m),
            "fast" => flag(key, value).map(|v| cfg.fast = v),
            "timing" => flag(key, value).map(|v| cfg.timing = v),
            "output" => {
                cfg.output = Some(PathBuf::from(value));
                Ok(())
            }
            other => Err(format!("unknown key `{other}`")),
        };
        applied.map_err(err)?;
    }
    if !epsilon_set {
        cfg.epsilon = DEFAULT_EPSILON * cfg.delta;
    }
    Ok(cfg)
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub record: ObservableRecord,
    pub mode: SweepMode,
    pub wall_time_ms: u64,
    /// `None` when every solve converged.
    pub status: Option<String>,
}

impl CsvRow {
    fn fields(&self) -> Vec<String> {
        let r = &self.record;
        vec![
            fmt_f64(r.kappa),
            fmt_f64(r.lambda),
            r.two_j.to_string(),
            fmt_f64(r.omega_over_delta),
            fmt_f64(r.epsilon),
            r.boson_cutoff.to_string(),
            fmt_f64(r.energy),
            fmt_f64(r.jx),
            fmt_f64(r.jx_over_j),
            fmt_f64(r.chi),
            fmt_f64(r.delta_q),
            fmt_f64(r.delta_j),
            fmt_f64(r.entropy_nats),
            fmt_f64(r.parity),
            fmt_f64(r.occupancy),
            self.mode.as_str().to_string(),
            self.wall_time_ms.to_string(),
        ]
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn empty_record(p_kappa: f64, cfg: &SweepConfig) -> ObservableRecord {
    let spin = SpinLength::new(cfg.two_j).expect("validated");
    let omega = cfg.omega_over_delta * cfg.delta;
    ObservableRecord {
        kappa: p_kappa,
        lambda: analytics::lambda_from_kappa(spin.j(), cfg.delta, omega, p_kappa).unwrap_or(f64::NAN),
        two_j: cfg.two_j,
        omega_over_delta: cfg.omega_over_delta,
        epsilon: cfg.epsilon,
        boson_cutoff: 0,
        energy: f64::NAN,
        jx: f64::NAN,
        jx_over_j: f64::NAN,
        chi: f64::NAN,
        delta_q: f64::NAN,
        delta_j: f64::NAN,
        entropy_nats: f64::NAN,
        parity: f64::NAN,
        occupancy: f64::NAN,
    }
}

/// Full-model record at one `κ`: cutoff-converged solve at `ε`, then the
/// susceptibility on the same truncation.
pub fn full_point(kappa: f64, cfg: &SweepConfig) -> Result<(ObservableRecord, bool)> {
    let spin = SpinLength::new(cfg.two_j)?;
    let p = ModelParams::with_kappa(spin, cfg.delta, cfg.omega_over_delta * cfg.delta, kappa)?.with_epsilon(cfg.epsilon);
    let solver = cfg.solver();
    let start = suggested_start_cutoff(&p).min(cfg.max_nb);
    let mut gs = converge_cutoff(&p, start, &solver)?;
    let fd = SusceptibilityConfig::default();
    let forward_ok = cfg.fast && cfg.epsilon > 0.0;
    let (chi, chi_ok) = if forward_ok {
        // Forward difference from the record's own point, refined to the
        // susceptibility residual bound first.
        let tight = LanczosConfig {
            residual_tol: Some(fd.residual * cfg.delta),
            ..solver.lanczos.clone()
        };
        let cutoff_ok = gs.converged;
        gs = solve_ground(&p, &gs.basis, &tight, Some(&gs.vector))?;
        gs.converged &= cutoff_ok;
        let step = 2.0 * fd.step * cfg.delta;
        let hi = solve_ground(&p.with_epsilon(cfg.epsilon + step), &gs.basis, &tight, Some(&gs.vector))?;
        let jx_hi = order_parameter(&hi).0;
        let jx = order_parameter(&gs).0;
        (cfg.delta / p.j() * (jx_hi - jx) / step, hi.converged)
    } else {
        susceptibility_on_basis(&p, &gs.basis, &solver, &fd, Some(&gs.vector))?
    };
    Ok((ObservableRecord::measure(&gs, chi), gs.converged && chi_ok))
}

fn lmg_point(kappa: f64, cfg: &SweepConfig) -> Result<ObservableRecord> {
    let spin = SpinLength::new(cfg.two_j)?;
    let j = spin.j();
    let solve = |eps: f64| -> Result<(f64, Vec<f64>)> { build_lmg_with_field(kappa, cfg.delta, spin, eps)?.ground() };
    let jx_of = |v: &[f64]| {
        let jx = crate::hilbert::spin_matrices(spin).jx;
        jx.expectation(v)
    };
    let (energy, v) = solve(cfg.epsilon)?;
    let fd = SusceptibilityConfig::default();
    let (c, h) = (fd.field * cfg.delta, fd.step * cfg.delta);
    let chi = cfg.delta / j * (jx_of(&solve(c + h)?.1)? - jx_of(&solve(c - h)?.1)?) / (2.0 * h);
    let jx = jx_of(&v)?;
    Ok(ObservableRecord {
        energy,
        jx,
        jx_over_j: jx / j,
        chi,
        delta_j: crate::observables::spin_variance_of(spin, &v),
        ..empty_record(kappa, cfg)
    })
}

fn bos_point(kappa: f64, cfg: &SweepConfig) -> Result<ObservableRecord> {
    let j = SpinLength::new(cfg.two_j)?.j();
    let omega = cfg.omega_over_delta * cfg.delta;
    let (h, cutoff) = if kappa < 1.0 {
        (build_bos_below(kappa, omega, j, cfg.delta, 160)?, 160)
    } else if kappa > 1.0 {
        let alpha = above_threshold_alpha(kappa, j, cfg.delta, omega)?;
        let cutoff = displaced_cutoff(alpha).max(160);
        (build_bos_above(kappa, omega, j, cfg.delta, alpha, cutoff)?, cutoff)
    } else {
        return Err(Error::InvalidParameter("the effective oscillator excludes kappa = 1".into()));
    };
    let (energy, v) = h.ground()?;
    let (_, delta_q) = fock_q_moments(cutoff, &v)?;
    let occupancy = v.iter().enumerate().map(|(n, x)| n as f64 * x * x).sum();
    Ok(ObservableRecord {
        boson_cutoff: cutoff,
        energy,
        delta_q,
        occupancy,
        ..empty_record(kappa, cfg)
    })
}

fn analytic_point(kappa: f64, cfg: &SweepConfig) -> ObservableRecord {
    let j = SpinLength::new(cfg.two_j).expect("validated").j();
    let theta = analytics::mf_theta(kappa, Branch::Positive);
    let jx = analytics::mf_order_parameter(kappa, j, Branch::Positive);
    ObservableRecord {
        epsilon: 0.0,
        energy: analytics::mf_energy(theta, kappa, j, cfg.delta),
        jx,
        jx_over_j: jx / j,
        chi: analytics::mf_susceptibility(kappa),
        delta_q: analytics::co_oscillator_variance(kappa),
        delta_j: analytics::fo_spin_variance(kappa),
        entropy_nats: analytics::co_entropy(kappa, j),
        ..empty_record(kappa, cfg)
    }
}

fn run_point(kappa: f64, cfg: &SweepConfig) -> CsvRow {
    let t0 = Instant::now();
    let (record, status) = match cfg.mode {
        SweepMode::Full => match full_point(kappa, cfg) {
            Ok((r, true)) => (r, None),
            Ok((r, false)) => (r, Some("unconverged".to_string())),
            Err(e) => (empty_record(kappa, cfg), Some(format!("error: {e}"))),
        },
        SweepMode::Lmg => flag_error(lmg_point(kappa, cfg), kappa, cfg),
        SweepMode::BosEffective => flag_error(bos_point(kappa, cfg), kappa, cfg),
        SweepMode::Analytic => (analytic_point(kappa, cfg), None),
    };
    let wall_time_ms = if cfg.timing { t0.elapsed().as_millis() as u64 } else { 0 };
    CsvRow {
        record,
        mode: cfg.mode,
        wall_time_ms,
        status,
    }
}

fn flag_error(r: Result<ObservableRecord>, kappa: f64, cfg: &SweepConfig) -> (ObservableRecord, Option<String>) {
    match r {
        Ok(r) => (r, None),
        Err(e) => (empty_record(kappa, cfg), Some(format!("error: {e}"))),
    }
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every grid point. Failed or unconverged points are flagged in the
/// row's `status` rather than aborting the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<CsvRow>> {
    cfg.validate()?;
    let grid = cfg.grid();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers_from_env() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    // `collect` keeps grid order, which is ascending in κ.
    Ok(pool.install(|| grid.par_iter().map(|&k| run_point(k, cfg)).collect()))
}

/// CSV text. A trailing `status` column appears only when some row is
/// flagged.
pub fn to_csv(rows: &[CsvRow]) -> String {
    let flagged = rows.iter().any(|r| r.status.is_some());
    let mut out = String::from(CSV_HEADER);
    if flagged {
        out.push_str(",status");
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row.fields().join(","));
        if flagged {
            let status = row.status.as_deref().unwrap_or("ok").replace([',', '\n'], ";");
            let _ = write!(out, ",{status}");
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    std::fs::write(path, to_csv(rows))?;
    Ok(())
}

/// Parses CSV text produced by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Config {
        line: 1,
        message: "missing header".into(),
    })?;
    let flagged = match header {
        h if h == CSV_HEADER => false,
        h if h.strip_suffix(",status") == Some(CSV_HEADER) => true,
        other => {
            return Err(Error::Config {
                line: 1,
                message: format!("unexpected header `{other}`"),
            })
        }
    };
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let err = |message: String| Error::Config {
            line: line_no,
            message,
        };
        let cells: Vec<&str> = line.split(',').collect();
        let expected = 17 + usize::from(flagged);
        if cells.len() != expected {
            return Err(err(format!("expected {expected} columns, found {}", cells.len())));
        }
        let f = |i: usize| cells[i].parse::<f64>().map_err(|_| err(format!("column {}: `{}` is not a number", i + 1, cells[i])));
        let u = |i: usize| cells[i].parse::<u64>().map_err(|_| err(format!("column {}: `{}` is not an integer", i + 1, cells[i])));
        let record = ObservableRecord {
            kappa: f(0)?,
            lambda: f(1)?,
            two_j: u(2)? as u32,
            omega_over_delta: f(3)?,
            epsilon: f(4)?,
            boson_cutoff: u(5)? as usize,
            energy: f(6)?,
            jx: f(7)?,
            jx_over_j: f(8)?,
            chi: f(9)?,
            delta_q: f(10)?,
            delta_j: f(11)?,
            entropy_nats: f(12)?,
            parity: f(13)?,
            occupancy: f(14)?,
        };
        let mode = cells[15].parse().map_err(err)?;
        let status = match flagged.then(|| cells[17]) {
            None | Some("ok") => None,
            Some(s) => Some(s.to_string()),
        };
        rows.push(CsvRow {
            record,
            mode,
            wall_time_ms: u(16)?,
            status,
        });
    }
    Ok(rows)
}

//! Subcommand execution and the exit-code mapping.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use amrmc::experiments::{run_sweep_with, ExperimentError};
use amrmc::moments::{
    critical_curve, expected_continuation_error_closed_form, expected_mse_closed_form, first_cross_moment_normal,
    fourth_cross_moment_normal, lognormal_moments, theorem3_bound, worst_case_bounds_normal, MomentError,
    MseSetting, Theorem3Params,
};
use amrmc::paths::ExerciseGrid;
use amrmc::regression::{check_assumptions, price_bermudan, RegressionError};
use amrmc::rng::SeedCoordinates;
use serde::Serialize;
use thiserror::Error;

use crate::config::{BoundsParams, Params, RunConfig, SweepFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment fallback for the worker cap.
pub const THREADS_ENV: &str = "AMRMC_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<RegressionError> for CliError {
    fn from(e: RegressionError) -> Self {
        match e {
            RegressionError::Gram { .. } | RegressionError::MissingInverse => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::GramConditioning { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Regression(r) => r.into(),
            ExperimentError::Moment(m) => m.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

/// Worker cap: command-line flag, then the document, then `AMRMC_THREADS`.
/// `None` lets the pool size itself.
pub fn resolve_threads(
    flag: Option<usize>,
    config: Option<usize>,
    env: Option<&str>,
) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag.or(config) {
        return if n == 0 { Err(CliError::Validation("threads must be positive".into())) } else { Ok(Some(n)) };
    }
    match env.map(str::trim) {
        None | Some("") | Some("auto") => Ok(None),
        Some(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("{THREADS_ENV} must be a positive integer or \"auto\", got {s:?}"))),
        },
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize");
    s.push('\n');
    s
}

fn moments_csv(setting: MseSetting<f64>, k_max: usize) -> Result<String, CliError> {
    let mut out = String::new();
    match setting {
        MseSetting::Normal { rho } => {
            out.push_str("setting,k1,k2,first_cross_moment,fourth_cross_moment\n");
            for k1 in 0..=k_max {
                for k2 in 0..=k_max {
                    let first = first_cross_moment_normal(k1, k2, rho)?;
                    let fourth = fourth_cross_moment_normal(k1, k2, rho)?;
                    writeln!(out, "normal,{k1},{k2},{},{}", g6(first), g6(fourth)).expect("string write");
                }
            }
        }
        MseSetting::Lognormal { t1, t2 } => {
            out.push_str("setting,k1,k2,first_cross_moment,fourth_cross_moment,log_fourth_cross_moment\n");
            for k1 in 0..=k_max {
                for k2 in 0..=k_max {
                    let m = lognormal_moments(k1, k2, t1, t2)?;
                    writeln!(out, "lognormal,{k1},{k2},{},{},{}", g6(m.first), g6(m.fourth), g6(m.log_fourth))
                        .expect("string write");
                }
            }
        }
    }
    Ok(out)
}

fn g6(x: f64) -> String {
    amrmc::experiments::format_significant(x, 6)
}

#[derive(Serialize)]
struct ExpectedReport {
    kind: &'static str,
    setting: MseSetting<f64>,
    #[serde(rename = "K")]
    order: usize,
    #[serde(rename = "N")]
    n_paths: u64,
    value: f64,
}

fn bounds_json(params: &BoundsParams) -> Result<String, CliError> {
    Ok(match *params {
        BoundsParams::WorstCase { order, n_paths, rho } => json(&worst_case_bounds_normal(order, n_paths, rho)?),
        BoundsParams::ExpectedMse { setting, order, n_paths } => json(&ExpectedReport {
            kind: "expected_mse",
            setting,
            order,
            n_paths,
            value: expected_mse_closed_form(setting, order, n_paths)?,
        }),
        BoundsParams::ContinuationError { setting, order, n_paths } => json(&ExpectedReport {
            kind: "continuation_error",
            setting,
            order,
            n_paths,
            value: expected_continuation_error_closed_form(setting, order, n_paths)?,
        }),
        BoundsParams::Multiperiod { setting, ref times, n, order, n_paths } => {
            let grid = ExerciseGrid::new(times.clone(), 0.0).map_err(|e| CliError::Validation(e.to_string()))?;
            let m = grid.len();
            json(&theorem3_bound(Theorem3Params {
                setting,
                m,
                n,
                order,
                n_paths,
                c: grid.max_ratio(),
                t_first: grid.time(1),
                t_m: grid.time(m),
            })?)
        }
    })
}

/// Produce the data output of a run; diagnostics go to `log`.
pub fn execute(config: &RunConfig, log: &mut (dyn std::io::Write + Send)) -> Result<String, CliError> {
    let seed = SeedCoordinates::new(config.base_seed, Vec::new());
    match &config.params {
        Params::Price(p) => Ok(json(&price_bermudan(p, &seed)?)),
        Params::Check(c) => {
            let report = check_assumptions(c.process, &c.grid, &c.payoff, c.basis, c.probe_paths, &seed)?;
            Ok(json(&report))
        }
        Params::Sweep { grid, format } => {
            let total = grid.k_values.len() * grid.n_values.len();
            let mut done = 0;
            let result = run_sweep_with(grid, |cell| {
                done += 1;
                let _ = writeln!(log, "[{done}/{total}] K={} N={} mse_mean={}", cell.order, cell.n_paths, g6(cell.mse_mean));
            })?;
            Ok(match format {
                SweepFormat::Csv => result.to_csv(),
                SweepFormat::Json => result.to_json() + "\n",
                SweepFormat::Plot => json(&result.plot_data()),
            })
        }
        Params::Moments(m) => moments_csv(m.setting, m.k_max),
        Params::Bounds(b) => bounds_json(b),
        Params::Critical(c) => {
            let mut out = String::new();
            for &n in &c.n_values {
                let curve = critical_curve(c.setting, n)?;
                writeln!(out, "{n} {:.3} {:.3}", curve.lower, curve.upper).expect("string write");
            }
            Ok(out)
        }
    }
}

/// Write `data` to `path`, or to standard output when `path` is `None`.
pub fn write_output(path: Option<&Path>, data: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, data).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(data.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Run `config` under a pool of `threads` workers and write its output.
pub fn dispatch_with(
    config: &RunConfig,
    threads: Option<usize>,
    out: Option<&Path>,
    log: &mut (dyn std::io::Write + Send),
) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    let data = pool.install(|| execute(config, log))?;
    write_output(out.or(config.output.as_deref()), &data)
}

/// Run a validated configuration with its own thread and output settings;
/// returns the process exit code.
pub fn dispatch(config: &RunConfig) -> i32 {
    let mut stderr = std::io::stderr();
    let env = std::env::var(THREADS_ENV).ok();
    let result = resolve_threads(None, config.threads, env.as_deref())
        .and_then(|threads| dispatch_with(config, threads, None, &mut stderr));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

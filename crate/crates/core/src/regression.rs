//! Quasi-regression: projection onto the basis with the exact Gram matrix, and
//! the backward-induction Bermudan pricer built on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{eval_basis_into, BasisError, BasisFamily, BasisSpec};
use crate::linalg::Matrix;
use crate::moments::{gram_analysis, GramAnalysis};
use crate::paths::{ExerciseGrid, GridError, PathSampler, ProcessKind};
use crate::rng::SeedCoordinates;
use crate::scalar::Scalar;
use crate::stats::RunningMoments;

/// Rows per reduction chunk. Fixed so results do not depend on the worker count.
pub const CHUNK_ROWS: u64 = 4096;

/// Label of the single path set reused by [`PathMode::Shared`].
const SHARED_LABEL: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegressionError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("Gram matrix at date {date} (t = {t}) is too ill-conditioned to invert (condition estimate {condition:e})")]
    Gram { date: usize, t: f64, condition: f64 },
    #[error("Gram inverse unavailable")]
    MissingInverse,
    #[error("expected {expected} values, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("at least one path is required")]
    NoPaths,
    #[error("invalid payoff: {0}")]
    Payoff(String),
}

/// The process whose law makes a basis family's Gram matrix known exactly.
pub fn natural_process(family: BasisFamily) -> ProcessKind {
    match family {
        BasisFamily::HermiteNormalized => ProcessKind::StandardBrownian,
        BasisFamily::ExponentialMartingale => ProcessKind::DriftAdjustedGeometricBrownian,
    }
}

/// `Psi^{-1} gamma~` with `gamma~_k = N^{-1} sum_i y_i psi_k(x_i)`.
///
/// `basis_values` is `N x (K+1)`, one row per path.
pub fn project<T: Scalar>(y: &[T], basis_values: &Matrix<T>, gram: &GramAnalysis<T>) -> Result<Vec<T>, RegressionError> {
    let n = y.len();
    if n == 0 {
        return Err(RegressionError::NoPaths);
    }
    if basis_values.rows() != n {
        return Err(RegressionError::Dimension { expected: n, actual: basis_values.rows() });
    }
    if basis_values.cols() != gram.size() {
        return Err(RegressionError::Dimension { expected: gram.size(), actual: basis_values.cols() });
    }
    let mut gamma = vec![T::zero(); gram.size()];
    for (i, &yi) in y.iter().enumerate() {
        for (g, &p) in gamma.iter_mut().zip(basis_values.row(i)) {
            *g = *g + yi * p;
        }
    }
    let nn = T::of_usize(n);
    gamma.iter_mut().for_each(|g| *g = *g / nn);
    gram.apply_inverse(&gamma).ok_or(RegressionError::MissingInverse)
}

/// `sum_k beta_k psi_k(x)` at each state.
pub fn continuation_eval(
    coefficients: &[f64],
    basis: BasisSpec,
    t: f64,
    states: &[f64],
) -> Result<Vec<f64>, RegressionError> {
    if coefficients.len() != basis.size() {
        return Err(RegressionError::Dimension { expected: basis.size(), actual: coefficients.len() });
    }
    let mut psi = vec![0.0; basis.size()];
    states
        .iter()
        .map(|&s| {
            eval_basis_into(basis, t, s, &mut psi)?;
            Ok(dot(coefficients, &psi))
        })
        .collect()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Payoff functions `h_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffKind {
    Call { strike: f64 },
    Put { strike: f64 },
    Identity,
    Zero,
    /// `s^exponent`.
    Power { exponent: f64 },
    /// `h_n(s) = sum_k c_{nk} psi_{nk}(s)`, one coefficient row per date
    /// `0..=m`. An empty row is the zero function; at date 0 only `c_{00}` may
    /// be nonzero.
    LinearBasisCombination { basis: BasisSpec, coefficients: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffSpec {
    pub function: PayoffKind,
    /// Dates in `0..=m` where exercise is allowed; `None` means all of them.
    /// Elsewhere `V_n = C_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exercise_dates: Option<Vec<usize>>,
}

impl PayoffSpec {
    /// Exercisable at every date including `t_0`.
    pub fn bermudan(kind: PayoffKind) -> Self {
        PayoffSpec { function: kind, exercise_dates: None }
    }

    /// Exercisable only at the last of `m` dates.
    pub fn european(kind: PayoffKind, m: usize) -> Self {
        PayoffSpec { function: kind, exercise_dates: Some(vec![m]) }
    }

    pub fn is_exercisable(&self, n: usize) -> bool {
        self.exercise_dates.as_ref().is_none_or(|d| d.contains(&n))
    }

    /// Check the payoff against an `m`-date grid.
    pub fn validate(&self, m: usize) -> Result<(), RegressionError> {
        if let Some(d) = &self.exercise_dates {
            if let Some(bad) = d.iter().find(|&&n| n > m) {
                return Err(RegressionError::Payoff(format!("exercise date {bad} beyond m = {m}")));
            }
        }
        match &self.function {
            PayoffKind::Call { strike } | PayoffKind::Put { strike } if !strike.is_finite() => {
                Err(RegressionError::Payoff(format!("strike must be finite, got {strike}")))
            }
            PayoffKind::Power { exponent } if !exponent.is_finite() => {
                Err(RegressionError::Payoff(format!("exponent must be finite, got {exponent}")))
            }
            PayoffKind::LinearBasisCombination { basis, coefficients } => {
                if coefficients.len() != m + 1 {
                    return Err(RegressionError::Payoff(format!(
                        "expected {} coefficient rows (dates 0..={m}), got {}",
                        m + 1,
                        coefficients.len()
                    )));
                }
                for (n, row) in coefficients.iter().enumerate() {
                    if !row.is_empty() && row.len() != basis.size() {
                        return Err(RegressionError::Payoff(format!(
                            "date {n}: expected {} coefficients, got {}",
                            basis.size(),
                            row.len()
                        )));
                    }
                }
                if coefficients[0].iter().skip(1).any(|&c| c != 0.0) {
                    return Err(RegressionError::Payoff("only the constant term may be set at date 0".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `h_n(s)` at date `n` (time `t`); callers must have validated the spec.
    pub fn value(&self, n: usize, t: f64, s: f64) -> f64 {
        match &self.function {
            PayoffKind::Call { strike } => (s - strike).max(0.0),
            PayoffKind::Put { strike } => (strike - s).max(0.0),
            PayoffKind::Identity => s,
            PayoffKind::Zero => 0.0,
            PayoffKind::Power { exponent } => s.powf(*exponent),
            PayoffKind::LinearBasisCombination { basis, coefficients } => {
                let row = &coefficients[n];
                if row.is_empty() {
                    0.0
                } else if n == 0 {
                    row[0]
                } else {
                    let mut psi = vec![0.0; basis.size()];
                    match eval_basis_into(*basis, t, s, &mut psi) {
                        Ok(()) => dot(row, &psi),
                        Err(_) => f64::NAN,
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// A fresh independent batch for every regression date.
    #[default]
    Independent,
    /// One path set reused at every date.
    Shared,
}

/// Inputs to [`price_bermudan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricerConfig {
    pub process: ProcessKind,
    pub grid: ExerciseGrid,
    pub payoff: PayoffSpec,
    pub basis: BasisSpec,
    /// Paths per date.
    pub n_paths: u64,
    #[serde(default)]
    pub path_mode: PathMode,
}

/// Fitted coefficients `beta_n` for one date.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DateFit {
    pub date: usize,
    pub t: f64,
    pub n_paths: u64,
    pub seed: SeedCoordinates,
    pub gamma: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub gram_condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub process: ProcessKind,
    pub basis: BasisSpec,
    pub path_mode: PathMode,
    pub times: Vec<f64>,
    /// Dates `1..m-1` in increasing order.
    pub dates: Vec<DateFit>,
    /// `V_0 = max(h_0(S(0)), C_0)` (just `C_0` if date 0 is not exercisable).
    pub value_estimate: f64,
    /// `C_0 = N^{-1} sum_i V_1(S_1^{(i)})`.
    pub continuation_estimate: f64,
    /// Sampling standard error of `C_0` given the fitted coefficients.
    pub continuation_std_error: f64,
    pub final_n_paths: u64,
    pub final_seed: SeedCoordinates,
}

impl CoefficientSet {
    /// `beta_n` for `n` in `1..m`.
    pub fn coefficients(&self, n: usize) -> Option<&[f64]> {
        self.dates.iter().find(|d| d.date == n).map(|d| d.coefficients.as_slice())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficient sets serialize")
    }
}

/// Deterministic chunked reduction over rows `0..n`: `body(row, acc)` is
/// applied sequentially within a chunk, chunks are merged in index order.
fn reduce_rows<A, I, B, M>(n: u64, init: I, body: B, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    B: Fn(u64, &mut A) + Sync,
    M: Fn(&mut A, A),
{
    let chunks = n.div_ceil(CHUNK_ROWS);
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for row in c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(n) {
                body(row, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

fn add_into(acc: &mut [f64], other: &[f64]) {
    acc.iter_mut().zip(other).for_each(|(a, b)| *a += b);
}

/// Value `V_n(s)` given the fitted continuation at date `n` (zero at `m`).
struct ValueFunction<'a> {
    payoff: &'a PayoffSpec,
    basis: BasisSpec,
    m: usize,
    times: &'a [f64],
    fits: &'a [Option<Vec<f64>>],
}

impl ValueFunction<'_> {
    fn value(&self, n: usize, s: f64, psi: &mut [f64]) -> f64 {
        let t = self.times[n - 1];
        let c = if n == self.m {
            0.0
        } else {
            let beta = self.fits[n].as_ref().expect("later dates are fitted first");
            // states come from the sampler, so the basis accepts them
            eval_basis_into(self.basis, t, s, psi).expect("sampled state in basis domain");
            dot(beta, psi)
        };
        if self.payoff.is_exercisable(n) {
            self.payoff.value(n, t, s).max(c)
        } else {
            c
        }
    }
}

/// Backward induction with quasi-regression at dates `m-1, ..., 1`:
/// `C_m = 0`, `V_n = max(h_n, C_n)`, `beta_n = Psi_n^{-1} gamma_n` from a batch
/// reaching `t_{n+1}`, then `C_0` is the mean of `V_1` over a final batch.
///
/// Seed labels: date `n` uses `seed.child(n)`, the final batch `seed.child(0)`;
/// in shared mode every step reuses `seed.child(u64::MAX)`.
pub fn price_bermudan(config: &PricerConfig, seed: &SeedCoordinates) -> Result<CoefficientSet, RegressionError> {
    let PricerConfig { process, ref grid, ref payoff, basis, n_paths, path_mode } = *config;
    if n_paths == 0 {
        return Err(RegressionError::NoPaths);
    }
    let m = grid.len();
    payoff.validate(m)?;
    // fail early, naming the first bad date
    let grams = (1..m)
        .map(|n| {
            let t = grid.time(n);
            let g = gram_analysis(basis, t);
            if g.inverse.is_none() {
                Err(RegressionError::Gram { date: n, t, condition: g.condition_estimate })
            } else {
                Ok(g)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let shared = match path_mode {
        PathMode::Shared => Some(PathSampler::new(process, grid, &seed.child(SHARED_LABEL))?),
        PathMode::Independent => None,
    };
    let sampler_for = |n: usize, label: u64| -> Result<(PathSampler, SeedCoordinates), RegressionError> {
        match &shared {
            Some(s) => Ok((s.clone(), seed.child(SHARED_LABEL))),
            None => {
                let coords = seed.child(label);
                let sub = ExerciseGrid::new(grid.times()[..n].to_vec(), grid.t0_state())?;
                Ok((PathSampler::new(process, &sub, &coords)?, coords))
            }
        }
    };

    let size = basis.size();
    let mut fits: Vec<Option<Vec<f64>>> = vec![None; m];
    let mut dates = Vec::with_capacity(m.saturating_sub(1));
    for n in (1..m).rev() {
        let (sampler, coords) = sampler_for(n + 1, n as u64)?;
        let width = sampler.dates();
        let value_fn = ValueFunction { payoff, basis, m, times: grid.times(), fits: &fits };
        let t_n = grid.time(n);
        let sums = reduce_rows(
            n_paths,
            || (vec![0.0; size], vec![0.0; size], vec![0.0; width], vec![0.0; size]),
            |row, (acc, psi_n, states, scratch)| {
                sampler.fill_row(row, states);
                let v = value_fn.value(n + 1, states[n], scratch);
                eval_basis_into(basis, t_n, states[n - 1], psi_n).expect("sampled state in basis domain");
                acc.iter_mut().zip(psi_n.iter()).for_each(|(a, p)| *a += v * p);
            },
            |total, part| add_into(&mut total.0, &part.0),
        )
        .0;
        let gamma: Vec<f64> = sums.iter().map(|s| s / n_paths as f64).collect();
        let g = &grams[n - 1];
        let beta = g.apply_inverse(&gamma).ok_or(RegressionError::MissingInverse)?;
        dates.push(DateFit {
            date: n,
            t: t_n,
            n_paths,
            seed: coords,
            gamma,
            coefficients: beta.clone(),
            gram_condition: g.condition_estimate,
        });
        fits[n] = Some(beta);
    }
    dates.reverse();

    let (sampler, final_seed) = sampler_for(1, 0)?;
    let width = sampler.dates();
    let value_fn = ValueFunction { payoff, basis, m, times: grid.times(), fits: &fits };
    let moments = reduce_rows(
        n_paths,
        || (RunningMoments::default(), vec![0.0; width], vec![0.0; size]),
        |row, (acc, states, scratch)| {
            sampler.fill_row(row, states);
            acc.push(value_fn.value(1, states[0], scratch));
        },
        |total, part| total.0.merge(&part.0),
    )
    .0;
    let c0 = moments.mean;
    let value_estimate = if payoff.is_exercisable(0) { payoff.value(0, 0.0, grid.t0_state()).max(c0) } else { c0 };
    Ok(CoefficientSet {
        process,
        basis,
        path_mode,
        times: grid.times().to_vec(),
        dates,
        value_estimate,
        continuation_estimate: c0,
        continuation_std_error: moments.std_error(),
        final_n_paths: n_paths,
        final_seed,
    })
}

/// `Y = sum_k a_k psi_k(S(t2))` regressed on the basis at `t1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinglePeriodTarget {
    pub basis: BasisSpec,
    pub t1: f64,
    pub t2: f64,
    pub target_coefficients: Vec<f64>,
    /// Exact projection coefficients of `Y` at `t1`.
    pub true_beta: Vec<f64>,
}

impl SinglePeriodTarget {
    /// `beta_k = a_k (t1/t2)^{k/2}` for Hermite, `beta_k = a_k` for the
    /// exponential family (each `psi_k` is then a martingale).
    pub fn new(basis: BasisSpec, t1: f64, t2: f64, target_coefficients: Vec<f64>) -> Result<Self, RegressionError> {
        if target_coefficients.len() != basis.size() {
            return Err(RegressionError::Dimension { expected: basis.size(), actual: target_coefficients.len() });
        }
        if !(t1 > 0.0 && t2 > t1 && t2.is_finite()) {
            return Err(RegressionError::Grid(GridError::NotIncreasing { index: 1, value: t2 }));
        }
        let true_beta = match basis.family {
            BasisFamily::HermiteNormalized => {
                let r = (t1 / t2).sqrt();
                target_coefficients.iter().enumerate().map(|(k, a)| a * r.powi(k as i32)).collect()
            }
            BasisFamily::ExponentialMartingale => target_coefficients.clone(),
        };
        Ok(SinglePeriodTarget { basis, t1, t2, target_coefficients, true_beta })
    }

    pub fn process(&self) -> ProcessKind {
        natural_process(self.basis.family)
    }

    pub fn grid(&self) -> ExerciseGrid {
        ExerciseGrid::for_process(self.process(), vec![self.t1, self.t2]).expect("validated dates")
    }
}

/// One single-period regression: `gamma~` and `beta~ = Psi^{-1} gamma~`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinglePeriodRun {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl SinglePeriodRun {
    /// `|beta~ - beta|^2`.
    pub fn squared_error(&self, target: &SinglePeriodTarget) -> f64 {
        self.beta.iter().zip(&target.true_beta).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Regress `Y` on `N` fresh paths. `gram` must be the analysis at `target.t1`.
pub fn run_single_period(
    target: &SinglePeriodTarget,
    gram: &GramAnalysis<f64>,
    n_paths: u64,
    seed: &SeedCoordinates,
) -> Result<SinglePeriodRun, RegressionError> {
    if n_paths == 0 {
        return Err(RegressionError::NoPaths);
    }
    let sampler = PathSampler::new(target.process(), &target.grid(), seed)?;
    let size = target.basis.size();
    let (a, basis, t1, t2) = (&target.target_coefficients, target.basis, target.t1, target.t2);
    let sums = reduce_rows(
        n_paths,
        || (vec![0.0; size], vec![0.0; size], [0.0; 2]),
        |row, (acc, psi, states)| {
            sampler.fill_row(row, states);
            eval_basis_into(basis, t2, states[1], psi).expect("sampled state in basis domain");
            let y = dot(a, psi);
            eval_basis_into(basis, t1, states[0], psi).expect("sampled state in basis domain");
            acc.iter_mut().zip(psi.iter()).for_each(|(g, p)| *g += y * p);
        },
        |total, part| add_into(&mut total.0, &part.0),
    )
    .0;
    let gamma: Vec<f64> = sums.iter().map(|s| s / n_paths as f64).collect();
    let beta = gram.apply_inverse(&gamma).ok_or(RegressionError::MissingInverse)?;
    Ok(SinglePeriodRun { gamma, beta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Warn,
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl From<&RunningMoments> for Estimate {
    fn from(m: &RunningMoments) -> Self {
        Estimate { mean: m.mean, std_error: m.std_error() }
    }
}

/// One link `E[psi_{n,k}^p] <= E[psi_{n+1,k}^p]` of the moment chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentChainCheck {
    pub power: u32,
    pub k: usize,
    pub date: usize,
    pub lower_date: Estimate,
    pub upper_date: Estimate,
    /// Paired difference `psi_{n+1,k}^p - psi_{n,k}^p` over the probe paths.
    pub difference: Estimate,
    pub status: CheckStatus,
}

/// `E[h_n^4(S_n)]` against `(t_n / t_{n-1})^{2K}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffGrowthCheck {
    pub date: usize,
    pub fourth_moment: Estimate,
    pub bound: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub probe_paths: u64,
    pub seed: SeedCoordinates,
    pub moment_chain: Vec<MomentChainCheck>,
    pub payoff_growth: Vec<PayoffGrowthCheck>,
    pub moment_chain_status: CheckStatus,
    pub payoff_growth_status: CheckStatus,
}

/// Minimum probe size accepted by [`check_assumptions`].
pub const MIN_PROBE_PATHS: u64 = 10_000;

/// Monte Carlo diagnostics for the moment-growth hypotheses of the error
/// analysis. Findings only warn: the pricer stays usable either way.
///
/// A chain link warns when the paired difference is more than four standard
/// errors below zero; a payoff date warns when its estimated fourth moment
/// exceeds the bound. Date 1 has an infinite bound and always passes.
pub fn check_assumptions(
    process: ProcessKind,
    grid: &ExerciseGrid,
    payoff: &PayoffSpec,
    basis: BasisSpec,
    probe_paths: u64,
    seed: &SeedCoordinates,
) -> Result<AssumptionReport, RegressionError> {
    if probe_paths < MIN_PROBE_PATHS {
        return Err(RegressionError::Payoff(format!("probe_paths must be at least {MIN_PROBE_PATHS}")));
    }
    let m = grid.len();
    payoff.validate(m)?;
    let sampler = PathSampler::new(process, grid, seed)?;
    let size = basis.size();
    let times = grid.times();
    // per date: psi^2 and psi^4 for each k, and h^4
    let slots = m * (2 * size + 1);
    let diff_slots = m.saturating_sub(1) * 2 * size;
    let (levels, diffs, _, _) = reduce_rows(
        probe_paths,
        || (vec![RunningMoments::default(); slots], vec![RunningMoments::default(); diff_slots], vec![0.0; m], vec![0.0; size * m]),
        |row, (lv, df, states, psi)| {
            sampler.fill_row(row, states);
            for n in 0..m {
                let p = &mut psi[n * size..(n + 1) * size];
                eval_basis_into(basis, times[n], states[n], p).expect("sampled state in basis domain");
                let base = n * (2 * size + 1);
                for k in 0..size {
                    let sq = p[k] * p[k];
                    lv[base + k].push(sq);
                    lv[base + size + k].push(sq * sq);
                }
                let h = payoff.value(n + 1, times[n], states[n]);
                lv[base + 2 * size].push(h.powi(4));
            }
            for n in 0..m.saturating_sub(1) {
                for k in 0..size {
                    let (a, b) = (psi[n * size + k], psi[(n + 1) * size + k]);
                    df[n * 2 * size + k].push(b * b - a * a);
                    df[n * 2 * size + size + k].push(b.powi(4) - a.powi(4));
                }
            }
        },
        |total, part| {
            total.0.iter_mut().zip(&part.0).for_each(|(a, b)| a.merge(b));
            total.1.iter_mut().zip(&part.1).for_each(|(a, b)| a.merge(b));
        },
    );

    let mut moment_chain = Vec::new();
    for n in 0..m.saturating_sub(1) {
        for (pi, power) in [2u32, 4].into_iter().enumerate() {
            for k in 0..size {
                let lower = &levels[n * (2 * size + 1) + pi * size + k];
                let upper = &levels[(n + 1) * (2 * size + 1) + pi * size + k];
                let d = &diffs[n * 2 * size + pi * size + k];
                let ok = !(d.mean < -4.0 * d.std_error());
                moment_chain.push(MomentChainCheck {
                    power,
                    k,
                    date: n + 1,
                    lower_date: lower.into(),
                    upper_date: upper.into(),
                    difference: d.into(),
                    status: if ok { CheckStatus::Pass } else { CheckStatus::Warn },
                });
            }
        }
    }
    let payoff_growth: Vec<PayoffGrowthCheck> = (0..m)
        .map(|n| {
            let est = &levels[n * (2 * size + 1) + 2 * size];
            let bound = if n == 0 { f64::INFINITY } else { (times[n] / times[n - 1]).powi(2 * basis.order as i32) };
            let ok = est.mean <= bound;
            PayoffGrowthCheck {
                date: n + 1,
                fourth_moment: est.into(),
                bound,
                status: if ok { CheckStatus::Pass } else { CheckStatus::Warn },
            }
        })
        .collect();
    let all = |pass: bool| if pass { CheckStatus::Pass } else { CheckStatus::Warn };
    Ok(AssumptionReport {
        probe_paths,
        seed: seed.clone(),
        moment_chain_status: all(moment_chain.iter().all(|c| c.status == CheckStatus::Pass)),
        payoff_growth_status: all(payoff_growth.iter().all(|c| c.status == CheckStatus::Pass)),
        moment_chain,
        payoff_growth,
    })
}
